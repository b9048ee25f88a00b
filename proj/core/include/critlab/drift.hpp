#pragma once

#include <functional>
#include <string>
#include <vector>

#include "critlab/field.hpp"
#include "critlab/lorentz.hpp"

namespace critlab {

enum class DriftFamily {
    stationary_con1,
    stationary_con2,
    blowup_con1,
    blowup_con2,
    constant,
    custom_table,
    power_tail,  // -A x (1 + x^2)^{-(1 + 1/p)/2}, b in L^{p,inf}
    saturating,  // -A tanh(x / w), b_x in every L^{p,inf}
};

enum class Case { con1, con2 };

struct StationaryPair;

std::string to_string(DriftFamily f);
std::string to_string(Case c);

struct DriftParams {
    double p = infinity;
    double k = 1.0;
    double alpha = 0.0;
    double beta = 0.0;
    double x_bar = 1.0;
    double epsilon = 0.0;
    double amplitude = 1.0;
    double width = 1.0;
};

// Immutable, validated description of an autonomous drift b(x).
class DriftSpec {
  public:
    static DriftSpec constant(double value);
    static DriftSpec power_tail(double amplitude, double p);
    static DriftSpec saturating(double amplitude, double width);
    // Two-column text: x b per line, '#' comments; linear interpolation,
    // constant extension outside the table.
    static DriftSpec table(std::vector<double> x, std::vector<double> b);
    static DriftSpec load_table(const std::string& path);

    DriftFamily family() const noexcept { return family_; }
    const DriftParams& params() const noexcept { return params_; }

    double value(double t, double x) const;
    double derivative(double t, double x) const;
    bool is_zero() const noexcept;

    Field sample(const Grid& grid, double t = 0.0) const;
    Field sample_derivative(const Grid& grid, double t = 0.0) const;

  private:
    DriftSpec(DriftFamily family, DriftParams params);

    friend StationaryPair stationary_pair_con1(double p, double k);
    friend StationaryPair stationary_pair_con2(double p, double k);
    friend DriftSpec blowup_drift_con1(double, double, double, double, double, double);
    friend DriftSpec blowup_drift_con2(double, double, double, double, double);

    DriftFamily family_;
    DriftParams params_;
    std::vector<double> table_x_;
    std::vector<double> table_b_;
};

struct StationaryProfile {
    double exponent = 0.0;  // u_s = (1 + x^2)^{-exponent}
    double operator()(double x) const;
    Field sample(const Grid& grid) const;
};

struct StationaryPair {
    StationaryProfile profile;
    DriftSpec drift;
};

double critic(double p, Case c);

StationaryPair stationary_pair_con1(double p, double k);
StationaryPair stationary_pair_con2(double p, double k);

// Upper end of the admissible x_bar window for the con1 blow-up drift.
double blowup_con1_window(double alpha, double beta, double k);
// Lower bound on x_bar for the con2 blow-up drift.
double blowup_con2_threshold(double alpha, double k);

DriftSpec blowup_drift_con1(double alpha, double beta, double x_bar, double epsilon, double k, double p);
DriftSpec blowup_drift_con2(double alpha, double x_bar, double epsilon, double k, double p);

struct EnvelopeReport {
    bool holds = true;
    double worst_violation = 0.0;  // outside [-2 eps, 2 eps]
    double inner_band = 0.0;       // largest |x| in the inner zone with a violation
};

// Checks the blow-up envelopes on the grid points; for the odd drifts the
// bounds are imposed on x >= 0 and mirrored.
EnvelopeReport validate_envelope(const DriftSpec& spec, const Grid& grid);

struct HolderReport {
    double max_ratio = 0.0;
    double derivative_norm = 0.0;  // ||b_x||_{p,inf}
    std::size_t pairs = 0;
};

// |b(x) - b(x')| <= p' ||b_x||_{p,inf} |x - x'|^{1/p'} on seeded random pairs.
HolderReport holder_continuity_check(const DriftSpec& spec, double p, const Grid& grid, std::size_t n_pairs,
                                     unsigned long long seed);

// Raw con2 profile derivative without the exponent window, for the
// sharpness check of ||b_x||_{p,inf} under grid refinement.
double blowup_con2_derivative_raw(double alpha, double x_bar, double epsilon, double x);

}  // namespace critlab
