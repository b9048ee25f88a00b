#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "critlab/drift.hpp"
#include "critlab/field.hpp"

namespace critlab {

enum class AdvectionScheme { upwind, muscl };

struct RunConfig {
    double k = 1.0;
    DriftSpec drift = DriftSpec::constant(0.0);
    Field u0 = Field(Grid(1.0, 1));
    double t_max = 1.0;
    // <= 0 selects the default 1e3 * ||u0||_inf.
    double blowup_threshold = 0.0;
    double dt_floor = 1e-10;
    // Upper bound on the step; <= 0 means unbounded.
    double dt_max = 0.0;
    double cfl = 0.9;
    double theta = 0.5;
    AdvectionScheme scheme = AdvectionScheme::muscl;
    std::size_t diagnostics_stride = 100;
    // Times at which the solver lands exactly and keeps a frame.
    std::vector<double> record_times;

    const Grid& grid() const noexcept { return u0.grid(); }
    double threshold() const;
    void validate() const;
};

struct SolverState {
    double t = 0.0;
    Field u;
    double dt = 0.0;
    std::size_t step_count = 0;
    // Mass that left through x = +-L, integrated in time.
    double boundary_outflow = 0.0;
    // Mass added by clamping round-off negatives to zero.
    double clamp_mass = 0.0;
    std::size_t theta_fallbacks = 0;

    static SolverState initial(const RunConfig& config);
};

// Largest step allowed by the advective CFL condition (infinite if b u^k = 0).
double cfl_limit(const SolverState& state, const RunConfig& config);

// One IMEX step of length dt; dt must respect cfl_limit().
SolverState step(const SolverState& state, const RunConfig& config, double dt);

// Method-of-lines rate du/dt of the semi-discrete scheme.
Field semi_discrete_rate(const Field& u, double t, const RunConfig& config);

enum class Classification { completed, blow_up, dt_collapse };

std::string to_string(Classification c);

struct DiagnosticRow {
    double t = 0.0;
    double sup_norm = 0.0;
    double l2_norm = 0.0;
    double mass = 0.0;
    double energy = 0.0;
    double boundary_flux = 0.0;
    // int x b u^{k+1}; the energy identity reads dE/dt = 2m + 2 * drift_work.
    double drift_work = 0.0;
};

struct RunReport {
    Classification classification = Classification::completed;
    std::vector<DiagnosticRow> series;
    SolverState terminal;
    Trajectory frames;
    bool domain_too_small = false;
    double last_resolved_time = 0.0;
    double initial_mass = 0.0;
};

RunReport solve(const RunConfig& config);

DiagnosticRow diagnostics(const SolverState& state, const RunConfig& config);

struct EnergyIdentity {
    double dE_dt_numeric = 0.0;  // sum x^2 du/dt dx from the scheme
    double rhs = 0.0;            // 2m + 2 int x b u^{k+1}
    double paper_form = 0.0;     // 2m - 2 int x b u^{k+1}, as printed
};

EnergyIdentity energy_flux_identity(const SolverState& state, const RunConfig& config);

// Scalar comparison ODE y' = a - b / y^gamma for the energy moment.
struct ComparisonOde {
    double a = 0.0;
    double b = 0.0;
    double gamma = 0.0;

    // (b / a)^{1/gamma}; infinite when a = 0.
    double stall_point() const;
    // Time for y to reach 0 from y0, or nothing when y0 >= stall point.
    std::optional<double> hitting_time(double y0) const;
    // Time for y to fall from y to 0 below the stall point.
    double time_to_zero(double y) const;

    struct Path {
        std::vector<double> t;
        std::vector<double> y;
    };
    // Adaptive Runge-Kutta integration until y falls below y_stop * y0.
    Path integrate(double y0, double y_stop = 1e-8) const;
    // Log-log slope of y against T - t over the final decades of the path.
    double near_hit_exponent(double y0) const;
};

struct MomentOdeInput {
    Case drift_case = Case::con2;
    double m = 1.0;
    double E0 = 1.0;
    double alpha = 1.0;
    std::optional<double> beta;
    double k = 3.0;
    // Measured int u^{k+1} |x b| at t = 0.
    double drift_integral = 0.0;
    double x_bar = 1.0;
};

struct MomentOdePrediction {
    ComparisonOde ode;
    double analytic_b = 0.0;  // coefficient from the moment proposition
    std::optional<double> hitting_time;
    double exponent_fit = 0.0;
    double exponent_expected = 0.0;
};

MomentOdePrediction moment_ode_envelope(const MomentOdeInput& in);

}  // namespace critlab
