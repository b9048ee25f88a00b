#pragma once

#include <optional>
#include <span>
#include <vector>

#include "critlab/drift.hpp"
#include "critlab/field.hpp"
#include "critlab/solver.hpp"

namespace critlab {

// v(tau, y) = lambda u(t, lambda y), lambda = sqrt(T e^{-tau}) = sqrt(T - t).
struct RescaledFrame {
    double T = 0.0;
    double tau = 0.0;
    double lambda = 0.0;
    Field v;
    std::optional<Field> b_tilde;
};

double rescaled_time(double t, double T);
double physical_time(double tau, double T);

// Without y_grid the frame uses the matched grid y = x / lambda, on which
// the change of variables is exact. b_tilde = lambda^{1-k} b(lambda y).
RescaledFrame to_selfsim(const Field& u, double t, double T, double k, const std::optional<Grid>& y_grid = {},
                         const DriftSpec* drift = nullptr);
// Inverse map u(x) = v(x / lambda) / lambda on the given x-grid.
Field from_selfsim(const RescaledFrame& frame, const Grid& x_grid);

struct DriftScaling {
    double rescaled = 0.0;
    double physical = 0.0;
    double predicted = 0.0;  // lambda^{1-k-1/p} ||b||_{p,inf}
    double rel_residual = 0.0;
};

DriftScaling rescaled_drift_norm(const DriftSpec& b, double tau, double T, double k, double p, const Grid& x_grid);

// eta_a(v) = v^2/2 for v <= a, a (v - a/2) above.
double eta(double v, double a);
double eta_derivative(double v, double a);

struct EntropyPoint {
    double tau = 0.0;
    double eta_integral = 0.0;
    double lhs = 0.0;         // d/dtau int eta_a, finite differences
    double rhs = 0.0;         // -|v_{a,y}|^2/2 - |v_a|^2/8
    double drift_term = 0.0;  // int v_{a,y} b~ v_a^{k+1}
    double margin = 0.0;      // rhs - lhs
    bool noisy = false;       // derivative noise above 10% of |rhs|
};

struct EntropyDiag {
    double a = 0.0;
    std::vector<EntropyPoint> points;
    bool flagged = false;
    // min over tau of margin / |rhs|.
    double min_relative_margin = 0.0;
};

// Frames must share T and be uniform in tau; each frame may carry its own
// y-grid since the integrals are grid-local.
EntropyDiag entropy_series(std::span<const RescaledFrame> frames, double a, double k = 1.0);

struct AdmissibleLevel {
    double a_bar = 0.0;
    std::vector<double> levels;
    std::vector<double> min_relative_margin;
};

// Largest a on a log grid [a_lo, a_hi] whose dissipation margin stays
// above -tol |rhs| at every tau.
AdmissibleLevel admissible_level(std::span<const RescaledFrame> frames, double a_lo, double a_hi, std::size_t n_levels,
                                 double k, double tol = 1e-3);

// Trapezoid integral over tau >= tau_bar of |v_a|_inf^3 / 2 + |v_a|_2^2 / 8.
double entropy_budget(std::span<const RescaledFrame> frames, double a_bar, double tau_bar = 0.0);

// Slope of log |v(tau)|_2^2 against tau for tau >= tau_min.
double l2_decay_fit(std::span<const RescaledFrame> frames, double tau_min);

struct LadderReport {
    std::vector<double> exponents;  // q = 2^m
    std::vector<double> norms;
    double sup = 0.0;
    double top_gap = 0.0;            // |norms.back() - sup| / sup
    double ladder_exponent = 0.0;    // (1 - 1/p) / (1 - 1/p - k/2)
    double printed_exponent = 0.0;   // (k/2) / (1 - 1/p - k/2)
    bool holder_steps = true;        // |u|_{2q} <= |u|_inf^{1/2} |u|_q^{1/2}
    bool log_convex = true;          // |u|_{2^m} <= |u|_{2^{m+1}}^{2/3} |u|_{2^{m-1}}^{1/3}
};

LadderReport norm_ladder(const Field& u, std::size_t M, double p, double k);

// Least-squares slope of log sup_norm against log t over [t_lo, t_hi].
double decay_fit_physical(std::span<const DiagnosticRow> series, double t_lo, double t_hi);

}  // namespace critlab
