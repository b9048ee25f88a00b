#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/numeric/odeint.hpp>

#include "critlab/errors.hpp"
#include "critlab/solver.hpp"

namespace critlab {

double ComparisonOde::stall_point() const {
    if (a <= 0.0)
        return std::numeric_limits<double>::infinity();
    return std::pow(b / a, 1.0 / gamma);
}

std::optional<double> ComparisonOde::hitting_time(double y0) const {
    if (!(b > 0.0) || !(gamma > 0.0) || !(y0 > 0.0))
        throw InvalidArgument("comparison ODE needs b > 0, gamma > 0, y0 > 0");
    if (y0 >= stall_point())
        return std::nullopt;
    if (a == 0.0)
        return std::pow(y0, 1.0 + gamma) / ((1.0 + gamma) * b);
    return time_to_zero(y0);
}

double ComparisonOde::time_to_zero(double y) const {
    // dt/dy = y^gamma / (a y^gamma - b), integrated from y down to 0.
    auto integrand = [this](double s) {
        const double sg = std::pow(s, gamma);
        return sg / (b - a * sg);
    };
    // s^gamma is not smooth at 0; tanh-sinh copes with the endpoint.
    return boost::math::quadrature::tanh_sinh<double>().integrate(integrand, 0.0, y, 1e-12);
}

ComparisonOde::Path ComparisonOde::integrate(double y0, double y_stop) const {
    namespace ode = boost::numeric::odeint;
    using State = std::array<double, 1>;
    Path path;
    auto rhs = [this](const State& y, State& dy, double) { dy[0] = a - b / std::pow(std::max(y[0], 1e-300), gamma); };
    auto stepper = ode::make_controlled(1e-12, 1e-12, ode::runge_kutta_dopri5<State>());
    State y{y0};
    double t = 0.0;
    const auto hit = hitting_time(y0);
    double dt = hit ? *hit * 1e-4 : 1e-4;
    path.t.push_back(t);
    path.y.push_back(y0);
    const double t_end = hit ? 2.0 * *hit : 1e3;
    for (std::size_t guard = 0; guard < 2000000 && y[0] > y_stop * y0 && t < t_end; ++guard) {
        State trial = y;
        double tt = t, h = dt;
        if (stepper.try_step(rhs, trial, tt, h) == ode::fail) {
            dt = h;
            continue;
        }
        if (!(trial[0] > 0.0)) {
            // Overshot the hitting point; shrink and retry.
            dt *= 0.25;
            continue;
        }
        y = trial;
        t = tt;
        dt = h;
        path.t.push_back(t);
        path.y.push_back(y[0]);
    }
    return path;
}

double ComparisonOde::near_hit_exponent(double y0) const {
    const auto hit = hitting_time(y0);
    if (!hit)
        throw InvalidArgument("near_hit_exponent: y0 is above the stall point");
    const Path path = integrate(y0, 1e-7);
    // Anchor T at the last point of the path; subtracting path times from the
    // quadrature value of T loses the small gaps to cancellation.
    const double T = path.t.back() + time_to_zero(path.y.back());
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < path.t.size(); ++i) {
        const double rel = path.y[i] / y0;
        const double gap = T - path.t[i];
        if (rel < 1e-2 && rel > 1e-6 && gap > 0.0) {
            lx.push_back(std::log(gap));
            ly.push_back(std::log(path.y[i]));
        }
    }
    if (lx.size() < 3)
        throw SolverFault("near_hit_exponent: too few samples near the hitting time", *hit, path.t.size());
    const double m = static_cast<double>(lx.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

MomentOdePrediction moment_ode_envelope(const MomentOdeInput& in) {
    if (!(in.m > 0.0) || !(in.E0 > 0.0) || !(in.drift_integral > 0.0))
        throw InvalidArgument("moment_ode_envelope needs positive m, E0 and drift integral");
    const double k = in.k;
    double gamma = 0.0, mexp = 0.0, K = 0.0;
    auto branch = [&](double shift) {
        // shift = -(1 - alpha) or -(1 - beta) for con1, -(alpha + 1) or -1 for con2.
        gamma = 0.5 * (k + shift);
        K = 2.0 * k / (k + shift);
        mexp = 0.5 * (3.0 * k + 2.0 + shift);
    };
    // Radius of the split in the moment proposition; inside x_bar selects the
    // inner exponent.
    auto radius = [&](double shift) {
        const double s = 3.0 * k + 2.0 + shift;
        const double kk = 2.0 * k / (k + shift);
        return std::pow(kk, -k / s) * std::pow(in.drift_integral, -1.0 / s) * std::pow(in.E0, (k + 1.0) / s);
    };
    if (in.drift_case == Case::con1) {
        const double inner = -(1.0 - in.alpha);
        if (!in.beta || radius(inner) <= in.x_bar)
            branch(inner);
        else
            branch(-(1.0 - *in.beta));
    } else {
        const double inner = -(in.alpha + 1.0);
        if (radius(inner) <= in.x_bar)
            branch(inner);
        else
            branch(-1.0);
    }
    if (!(gamma > 0.0))
        throw InvalidArgument("moment_ode_envelope: exponent gamma must be positive (supercritical k)");

    MomentOdePrediction out;
    out.ode.a = 2.0 * in.m;
    out.ode.gamma = gamma;
    out.ode.b = 2.0 * in.drift_integral * std::pow(in.E0, gamma);
    out.analytic_b = 2.0 * std::pow(0.5 * in.m, mexp) * std::pow(K, -k);
    out.hitting_time = out.ode.hitting_time(in.E0);
    out.exponent_expected = 1.0 / (1.0 + gamma);
    if (out.hitting_time)
        out.exponent_fit = out.ode.near_hit_exponent(in.E0);
    return out;
}

}  // namespace critlab
