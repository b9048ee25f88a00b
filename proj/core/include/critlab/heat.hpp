#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "critlab/field.hpp"

namespace critlab {

class DriftSpec;

struct KernelSample {
    double t = 0.0;
    Field values;
    // G: 1 - grid integral. G_x: 1/sqrt(pi t) - grid integral of |G_x|.
    double tail_mass = 0.0;
};

KernelSample heat_kernel(double t, const Grid& grid);
KernelSample heat_kernel_gradient(double t, const Grid& grid);

enum class ConvolutionMethod { direct, fft };

// Full linear convolution scaled by dx. The result lives on a symmetric grid
// of n_f + n_g - 1 cells with the common spacing.
Field convolve(const Field& f, const Field& g, ConvolutionMethod method = ConvolutionMethod::direct);

// Copy values onto a grid with the same spacing and aligned centers; cells
// outside the source are zero.
Field restrict_to(const Field& f, const Grid& target);

struct ScalingFit {
    double slope = 0.0;
    double intercept = 0.0;
    std::vector<double> norms;
};

// Least-squares slope of log ||G_x(t)||_{p,1} against log t.
ScalingFit kernel_gradient_scaling(double p, std::span<const double> times, const Grid& grid);

struct DuhamelResult {
    Field value;
    bool coarse_mesh_warning = false;
};

struct DuhamelOptions {
    // Geometric refinement of the last sub-interval stops once it is
    // shorter than dx^2 or after this many halvings.
    std::size_t max_grading_levels = 40;
    ConvolutionMethod method = ConvolutionMethod::fft;
};

// Mild-solution operator at time t for a trajectory on a uniform time mesh
// whose first frame is u0:
//   G(t) * u0 - int_0^t G_x(t - s) * (b u|u|^k)(s) ds.
DuhamelResult duhamel_apply(const Trajectory& u, const DriftSpec& b, double k, double t,
                            const DuhamelOptions& options = {});

enum class NormCase { con1, con2 };

struct PicardOptions {
    double t_bar = 0.01;
    std::size_t time_steps = 16;
    double tol = 1e-10;
    std::size_t max_iter = 50;
    NormCase norm_case = NormCase::con2;
    // Integrability exponent of b (con1) or b_x (con2); selects L^{p',1}.
    double p = 2.0;
    // r = 2 ||u0||_inf + radius_margin.
    double radius_margin = 0.0;
    DuhamelOptions duhamel;
};

struct PicardState {
    std::vector<Trajectory> iterates;
    std::vector<double> distances;
    std::vector<double> contraction_estimates;
    double radius = 0.0;
};

struct PicardResult {
    PicardState state;
    Trajectory solution;
    std::size_t iterations = 0;
    bool converged = false;
    bool coarse_mesh_warning = false;

    double contraction_ratio() const;
};

PicardResult picard_solve(const Field& u0, const DriftSpec& b, double k, const PicardOptions& options);

struct MomentGrowthReport {
    std::vector<double> times;
    std::vector<double> weighted;  // int (1 + x^2)|u(t)|
    double c_min = 0.0;            // smallest C with W(t) <= W(0) exp(C (1 + r^k) t)
    double heat_law_excess = 0.0;  // max_t W(t) - W(0) - 2 m(0) t
};

MomentGrowthReport moment_growth_check(const Trajectory& traj, double k, double r);

}  // namespace critlab
