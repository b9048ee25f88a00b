#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "critlab/drift.hpp"
#include "critlab/errors.hpp"
#include "critlab/heat.hpp"
#include "critlab/lorentz.hpp"

namespace critlab {

namespace {

// P(T, z) = int_0^T G(tau, z) dtau.
double heat_time_integral(double T, double z) {
    if (T <= 0.0)
        return 0.0;
    const double az = std::abs(z);
    const double s = std::sqrt(T);
    return s / std::sqrt(std::numbers::pi) * std::exp(-az * az / (4.0 * T)) - 0.5 * az * std::erfc(az / (2.0 * s));
}

Grid kernel_grid(const Grid& g) { return Grid::with_spacing(g.dx(), 2 * g.size() - 1); }

// Cell averages of G(t, .) over cells centred at m dx, |m| < n.
Field heat_cell_kernel(double t, const Grid& g) {
    const Grid kg = kernel_grid(g);
    const double dx = g.dx();
    const double w = 2.0 * std::sqrt(t);
    Field k(kg);
    for (std::size_t i = 0; i < kg.size(); ++i) {
        const double z = std::abs(kg.center(i));
        const double lo = (z - 0.5 * dx) / w;
        const double hi = (z + 0.5 * dx) / w;
        // erfc difference keeps relative accuracy in the tails.
        k[i] = lo >= 0.0 ? 0.5 * (std::erfc(lo) - std::erfc(hi)) / dx : 0.5 * (std::erf(hi) - std::erf(lo)) / dx;
    }
    return k;
}

// Cell averages of int G_x(tau, .) dtau over tau in [tau_lo, tau_hi].
void add_gradient_cell_kernel(double tau_lo, double tau_hi, double weight, Field& k) {
    const Grid& kg = k.grid();
    const double dx = kg.dx();
    auto integrated = [&](double z) { return heat_time_integral(tau_hi, z) - heat_time_integral(tau_lo, z); };
    double left = integrated(kg.face(0));
    for (std::size_t i = 0; i < kg.size(); ++i) {
        const double right = integrated(kg.face(i + 1));
        k[i] += weight * (right - left) / dx;
        left = right;
    }
}

// Weights of the Duhamel integral at one target time: a heat kernel for
// u0 and one combined gradient kernel per trajectory frame.
struct TargetPlan {
    Field heat;
    std::vector<Field> frame_kernels;
    bool coarse = false;
};

TargetPlan plan_target(double t, double step, std::size_t n_frames, const Grid& g, const DuhamelOptions& opt) {
    TargetPlan plan;
    plan.heat = heat_cell_kernel(t, g);
    const double dx2 = g.dx() * g.dx();

    // Uniform nodes strictly below t, then a graded last interval.
    std::size_t last = static_cast<std::size_t>(std::floor(t / step * (1.0 + 1e-12)));
    if (last * step >= t * (1.0 - 1e-12) && last > 0)
        --last;
    std::vector<std::pair<double, double>> pieces;
    for (std::size_t i = 0; i < last; ++i)
        pieces.emplace_back(i * step, (i + 1) * step);
    const double h = t - last * step;
    std::size_t levels = 0;
    while (h * std::ldexp(1.0, -static_cast<int>(levels)) > dx2 && levels < opt.max_grading_levels)
        ++levels;
    plan.coarse = h * std::ldexp(1.0, -static_cast<int>(levels)) > dx2;
    double lo = last * step;
    for (std::size_t l = 1; l <= levels; ++l) {
        const double hi = t - h * std::ldexp(1.0, -static_cast<int>(l));
        pieces.emplace_back(lo, hi);
        lo = hi;
    }
    pieces.emplace_back(lo, t);

    const std::size_t used = std::min(n_frames, last + 2);
    plan.frame_kernels.assign(used, Field(kernel_grid(g)));
    for (auto [a, b] : pieces) {
        const double mid = 0.5 * (a + b);
        std::size_t i = std::min(static_cast<std::size_t>(mid / step), n_frames - 1);
        double w = mid / step - static_cast<double>(i);
        if (i + 1 >= used) {
            i = used - 1;
            w = 0.0;
        }
        add_gradient_cell_kernel(t - b, t - a, 1.0 - w, plan.frame_kernels[i]);
        if (w > 0.0)
            add_gradient_cell_kernel(t - b, t - a, w, plan.frame_kernels[i + 1]);
    }
    return plan;
}

Field nonlinearity(const Field& u, const DriftSpec& b, double k, double t) {
    const Grid& g = u.grid();
    Field f(g);
    for (std::size_t i = 0; i < g.size(); ++i)
        f[i] = b.value(t, g.center(i)) * u[i] * std::pow(std::abs(u[i]), k);
    return f;
}

Field apply_plan(const TargetPlan& plan, const Field& u0, const std::vector<Field>& flux, ConvolutionMethod method) {
    const Grid& g = u0.grid();
    Field out = restrict_to(convolve(u0, plan.heat, method), g);
    for (std::size_t i = 0; i < plan.frame_kernels.size(); ++i) {
        if (sup_norm(flux[i]) == 0.0)
            continue;
        const Field c = restrict_to(convolve(flux[i], plan.frame_kernels[i], method), g);
        for (std::size_t j = 0; j < g.size(); ++j)
            out[j] -= c[j];
    }
    return out;
}

double uniform_step(const Trajectory& u) {
    if (u.times.size() < 2 || u.times.size() != u.frames.size())
        throw InvalidArgument("duhamel: trajectory needs at least two frames with times");
    if (u.times.front() != 0.0)
        throw InvalidArgument("duhamel: trajectory must start at t = 0");
    const double step = u.times[1] - u.times[0];
    for (std::size_t i = 1; i < u.times.size(); ++i)
        if (std::abs(u.times[i] - i * step) > 1e-9 * step * static_cast<double>(i))
            throw InvalidArgument("duhamel: trajectory time mesh must be uniform");
    return step;
}

double distance(const Field& a, const Field& b, const PicardOptions& opt) {
    Field d = a;
    for (std::size_t i = 0; i < d.size(); ++i)
        d[i] -= b[i];
    if (opt.norm_case == NormCase::con2)
        return l2_norm(d);
    if (std::isinf(opt.p))
        return mass(d);
    const double pc = opt.p / (opt.p - 1.0);
    return lorentz_norm(d, LorentzIndex(pc, 1.0), Convention::double_star);
}

}  // namespace

DuhamelResult duhamel_apply(const Trajectory& u, const DriftSpec& b, double k, double t, const DuhamelOptions& options) {
    const double step = uniform_step(u);
    if (!(t > 0.0) || t > u.times.back() * (1.0 + 1e-12))
        throw InvalidArgument("duhamel: target time must lie in (0, t_bar]");
    if (!(k > 0.0))
        throw InvalidArgument("duhamel: k must be positive");
    const TargetPlan plan = plan_target(t, step, u.frames.size(), u.frames.front().grid(), options);
    std::vector<Field> flux;
    for (std::size_t i = 0; i < plan.frame_kernels.size(); ++i)
        flux.push_back(nonlinearity(u.frames[i], b, k, u.times[i]));
    return {apply_plan(plan, u.frames.front(), flux, options.method), plan.coarse};
}

double PicardResult::contraction_ratio() const {
    double r = 0.0;
    for (double c : state.contraction_estimates)
        r = std::max(r, c);
    return r;
}

PicardResult picard_solve(const Field& u0, const DriftSpec& b, double k, const PicardOptions& opt) {
    require_finite(u0, "picard_solve");
    for (double v : u0.values())
        if (v < 0.0)
            throw InvalidArgument("picard_solve: u0 must be nonnegative");
    if (!(opt.t_bar > 0.0) || opt.time_steps == 0)
        throw InvalidArgument("picard_solve: need t_bar > 0 and at least one time step");
    if (!(k > 0.0))
        throw InvalidArgument("picard_solve: k must be positive");
    if (opt.norm_case == NormCase::con1 && !(opt.p > 1.0))
        throw InvalidArgument("picard_solve: con1 distance needs p > 1");

    const std::size_t M = opt.time_steps;
    const double step = opt.t_bar / static_cast<double>(M);
    const Grid& g = u0.grid();

    PicardResult res;
    res.state.radius = 2.0 * sup_norm(u0) + opt.radius_margin;

    std::vector<TargetPlan> plans;
    Trajectory current;
    current.times.push_back(0.0);
    current.frames.push_back(u0);
    for (std::size_t j = 1; j <= M; ++j) {
        const double t = j * step;
        plans.push_back(plan_target(t, step, M + 1, g, opt.duhamel));
        res.coarse_mesh_warning = res.coarse_mesh_warning || plans.back().coarse;
        current.times.push_back(t);
        current.frames.push_back(restrict_to(convolve(u0, plans.back().heat, opt.duhamel.method), g));
    }
    res.state.iterates.push_back(current);

    for (std::size_t it = 1; it <= opt.max_iter; ++it) {
        std::vector<Field> flux;
        for (std::size_t i = 0; i <= M; ++i)
            flux.push_back(nonlinearity(current.frames[i], b, k, current.times[i]));
        Trajectory next;
        next.times = current.times;
        next.frames.push_back(u0);
        double d = 0.0;
        for (std::size_t j = 1; j <= M; ++j) {
            next.frames.push_back(apply_plan(plans[j - 1], u0, flux, opt.duhamel.method));
            d = std::max(d, distance(next.frames[j], current.frames[j], opt));
            if (sup_norm(next.frames[j]) > res.state.radius)
                throw NonContraction("picard_solve: iterate left the ball ||u||_inf <= r at t = "
                                         + std::to_string(next.times[j]) + "; try a smaller t_bar",
                                     infinity, opt.t_bar);
        }
        res.state.iterates.push_back(next);
        res.state.distances.push_back(d);
        res.iterations = it;
        current = std::move(next);
        if (d <= opt.tol * std::max(1.0, sup_norm(u0))) {
            res.converged = true;
            break;
        }
        if (res.state.distances.size() >= 2) {
            const double ratio = d / res.state.distances[res.state.distances.size() - 2];
            res.state.contraction_estimates.push_back(ratio);
            if (ratio >= 1.0)
                throw NonContraction("picard_solve: measured contraction ratio " + std::to_string(ratio)
                                         + " >= 1; try a smaller t_bar",
                                     ratio, opt.t_bar);
        }
    }
    res.solution = current;
    return res;
}

}  // namespace critlab
