#include "critlab/selfsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "critlab/errors.hpp"
#include "critlab/lorentz.hpp"

namespace critlab {

namespace {

// Piecewise-linear interpolation through cell centers, tapering to zero at
// the Dirichlet boundary.
double interpolate(const Field& f, double x) {
    const Grid& g = f.grid();
    const double L = g.half_width();
    if (std::abs(x) > L * (1.0 + 1e-12))
        throw InvalidArgument("interpolation point lies outside the grid");
    const double s = (x + L) / g.dx() - 0.5;
    const auto n = static_cast<long long>(g.size());
    auto val = [&](long long i) { return (i < 0 || i >= n) ? 0.0 : f[static_cast<std::size_t>(i)]; };
    if (s <= 0.0) {
        // Between the boundary (value 0, at s = -1/2) and the first center.
        return val(0) * std::max(0.0, 1.0 + 2.0 * s);
    }
    if (s >= static_cast<double>(n - 1)) {
        const double over = s - static_cast<double>(n - 1);
        return val(n - 1) * std::max(0.0, 1.0 - 2.0 * over);
    }
    const auto i = static_cast<long long>(std::floor(s));
    const double w = s - static_cast<double>(i);
    return (1.0 - w) * val(i) + w * val(i + 1);
}

double slope_fit(const std::vector<double>& x, const std::vector<double>& y) {
    const double m = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

struct EntropyTerms {
    double eta_integral = 0.0;
    double grad_sq = 0.0;
    double va_sq = 0.0;
    double drift = 0.0;
};

EntropyTerms entropy_terms(const RescaledFrame& fr, double a, double k) {
    EntropyTerms e;
    const Grid& g = fr.v.grid();
    const double dy = g.dx();
    Field va(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
        e.eta_integral += eta(fr.v[i], a);
        va[i] = std::min(fr.v[i], a);
        e.va_sq += va[i] * va[i];
    }
    const Field vy = centered_derivative(va);
    for (std::size_t i = 0; i < g.size(); ++i) {
        e.grad_sq += vy[i] * vy[i];
        if (fr.b_tilde)
            e.drift += vy[i] * (*fr.b_tilde)[i] * std::pow(std::max(va[i], 0.0), k + 1.0);
    }
    e.eta_integral *= dy;
    e.grad_sq *= dy;
    e.va_sq *= dy;
    e.drift *= dy;
    return e;
}

}  // namespace

double rescaled_time(double t, double T) {
    if (!(T > 0.0) || !(t >= 0.0) || !(t < T))
        throw InvalidArgument("rescaling needs 0 <= t < T");
    return -std::log1p(-t / T);
}

double physical_time(double tau, double T) { return -T * std::expm1(-tau); }

RescaledFrame to_selfsim(const Field& u, double t, double T, double k, const std::optional<Grid>& y_grid,
                         const DriftSpec* drift) {
    RescaledFrame fr;
    fr.T = T;
    fr.tau = rescaled_time(t, T);
    fr.lambda = std::sqrt(T - t);
    const double lam = fr.lambda;
    const Grid& xg = u.grid();
    if (!y_grid) {
        const Grid yg(xg.half_width() / lam, xg.size());
        Field v(yg);
        for (std::size_t i = 0; i < yg.size(); ++i)
            v[i] = lam * u[i];
        fr.v = std::move(v);
    } else {
        if (y_grid->half_width() * lam > xg.half_width() * (1.0 + 1e-12))
            throw InvalidArgument("to_selfsim: y-grid maps outside the x-domain");
        fr.v = Field::sample(*y_grid, [&](double y) { return lam * interpolate(u, lam * y); });
    }
    if (drift) {
        const double pre = std::pow(lam, 1.0 - k);
        const Grid& yg = fr.v.grid();
        Field bt(yg);
        for (std::size_t i = 0; i < yg.size(); ++i)
            bt[i] = pre * drift->value(t, y_grid ? lam * yg.center(i) : xg.center(i));
        fr.b_tilde = std::move(bt);
    }
    return fr;
}

Field from_selfsim(const RescaledFrame& fr, const Grid& x_grid) {
    const double lam = fr.lambda;
    if (x_grid.half_width() / lam > fr.v.grid().half_width() * (1.0 + 1e-12))
        throw InvalidArgument("from_selfsim: x-grid maps outside the y-domain");
    return Field::sample(x_grid, [&](double x) { return interpolate(fr.v, x / lam) / lam; });
}

DriftScaling rescaled_drift_norm(const DriftSpec& b, double tau, double T, double k, double p, const Grid& x_grid) {
    const double t = physical_time(tau, T);
    const double lam = std::sqrt(T * std::exp(-tau));
    const LorentzIndex idx(p, infinity);
    const Field physical = b.sample(x_grid, t);
    // Matched grid y = x / lambda: sample values scale, widths shrink by lambda.
    const Grid yg(x_grid.half_width() / lam, x_grid.size());
    Field bt(yg);
    const double pre = std::pow(lam, 1.0 - k);
    for (std::size_t i = 0; i < yg.size(); ++i)
        bt[i] = pre * physical[i];
    DriftScaling out;
    out.physical = lorentz_norm(physical, idx, Convention::double_star);
    out.rescaled = lorentz_norm(bt, idx, Convention::double_star);
    const double inv_p = std::isinf(p) ? 0.0 : 1.0 / p;
    out.predicted = std::pow(lam, 1.0 - k - inv_p) * out.physical;
    out.rel_residual = out.predicted > 0.0 ? std::abs(out.rescaled - out.predicted) / out.predicted
                                           : std::abs(out.rescaled);
    return out;
}

double eta(double v, double a) { return v <= a ? 0.5 * v * v : a * (v - 0.5 * a); }

double eta_derivative(double v, double a) { return v <= a ? v : a; }

EntropyDiag entropy_series(std::span<const RescaledFrame> frames, double a, double k) {
    if (!(a > 0.0))
        throw InvalidArgument("entropy_series needs a > 0");
    EntropyDiag diag;
    diag.a = a;
    const std::size_t n = frames.size();
    if (n < 3)
        throw InvalidArgument("entropy_series needs at least three frames");
    const double h = frames[1].tau - frames[0].tau;
    for (std::size_t i = 1; i < n; ++i) {
        if (frames[i].T != frames[0].T)
            throw InvalidArgument("entropy_series: frames must share T");
        if (std::abs(frames[i].tau - frames[0].tau - i * h) > 1e-6 * h * static_cast<double>(i))
            throw InvalidArgument("entropy_series: tau mesh must be uniform");
    }
    std::vector<EntropyTerms> terms;
    for (const auto& fr : frames)
        terms.push_back(entropy_terms(fr, a, k));

    diag.min_relative_margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        EntropyPoint pt;
        pt.tau = frames[i].tau;
        pt.eta_integral = terms[i].eta_integral;
        pt.rhs = -0.5 * terms[i].grad_sq - 0.125 * terms[i].va_sq;
        pt.drift_term = terms[i].drift;
        if (i == 0) {
            pt.lhs = (-3.0 * terms[0].eta_integral + 4.0 * terms[1].eta_integral - terms[2].eta_integral) / (2.0 * h);
        } else if (i + 1 == n) {
            pt.lhs = (3.0 * terms[i].eta_integral - 4.0 * terms[i - 1].eta_integral + terms[i - 2].eta_integral)
                     / (2.0 * h);
        } else {
            const double fwd = (terms[i + 1].eta_integral - terms[i].eta_integral) / h;
            const double bwd = (terms[i].eta_integral - terms[i - 1].eta_integral) / h;
            pt.lhs = 0.5 * (fwd + bwd);
            pt.noisy = 0.5 * std::abs(fwd - bwd) > 0.1 * std::abs(pt.rhs);
        }
        pt.margin = pt.rhs - pt.lhs;
        diag.flagged = diag.flagged || pt.noisy;
        if (pt.rhs != 0.0)
            diag.min_relative_margin = std::min(diag.min_relative_margin, pt.margin / std::abs(pt.rhs));
        else if (pt.margin < 0.0)
            diag.min_relative_margin = -infinity;
        diag.points.push_back(pt);
    }
    if (std::isinf(diag.min_relative_margin) && diag.min_relative_margin > 0.0)
        diag.min_relative_margin = 0.0;
    return diag;
}

AdmissibleLevel admissible_level(std::span<const RescaledFrame> frames, double a_lo, double a_hi, std::size_t n_levels,
                                 double k, double tol) {
    if (!(a_lo > 0.0 && a_hi > a_lo) || n_levels < 2)
        throw InvalidArgument("admissible_level needs 0 < a_lo < a_hi and two or more levels");
    AdmissibleLevel out;
    const double ratio = std::log(a_hi / a_lo) / static_cast<double>(n_levels - 1);
    for (std::size_t i = 0; i < n_levels; ++i) {
        const double a = a_lo * std::exp(ratio * static_cast<double>(i));
        const EntropyDiag d = entropy_series(frames, a, k);
        out.levels.push_back(a);
        out.min_relative_margin.push_back(d.min_relative_margin);
        if (d.min_relative_margin >= -tol)
            out.a_bar = a;
    }
    return out;
}

double entropy_budget(std::span<const RescaledFrame> frames, double a_bar, double tau_bar) {
    double total = 0.0;
    double prev_tau = 0.0, prev_val = 0.0;
    bool have_prev = false;
    for (const auto& fr : frames) {
        if (fr.tau < tau_bar)
            continue;
        double sup = 0.0, sq = 0.0;
        for (double v : fr.v.values()) {
            const double va = std::min(v, a_bar);
            sup = std::max(sup, va);
            sq += va * va;
        }
        sq *= fr.v.grid().dx();
        const double val = 0.5 * sup * sup * sup + 0.125 * sq;
        if (have_prev)
            total += 0.5 * (val + prev_val) * (fr.tau - prev_tau);
        prev_tau = fr.tau;
        prev_val = val;
        have_prev = true;
    }
    return total;
}

double l2_decay_fit(std::span<const RescaledFrame> frames, double tau_min) {
    std::vector<double> x, y;
    for (const auto& fr : frames) {
        if (fr.tau < tau_min)
            continue;
        const double n = l2_norm(fr.v);
        if (n <= 0.0)
            continue;
        x.push_back(fr.tau);
        y.push_back(2.0 * std::log(n));
    }
    if (x.size() < 3)
        throw InvalidArgument("l2_decay_fit needs three or more nonzero frames past tau_min");
    return slope_fit(x, y);
}

LadderReport norm_ladder(const Field& u, std::size_t M, double p, double k) {
    if (M < 2)
        throw InvalidArgument("norm_ladder needs M >= 2");
    LadderReport rep;
    rep.sup = sup_norm(u);
    for (std::size_t m = 1; m <= M; ++m) {
        const double q = std::ldexp(1.0, static_cast<int>(m));
        rep.exponents.push_back(q);
        rep.norms.push_back(lp_norm(u, q));
    }
    rep.top_gap = rep.sup > 0.0 ? std::abs(rep.norms.back() - rep.sup) / rep.sup : 0.0;
    const double inv_p = std::isinf(p) ? 0.0 : 1.0 / p;
    const double denom = 1.0 - inv_p - 0.5 * k;
    rep.ladder_exponent = (1.0 - inv_p) / denom;
    rep.printed_exponent = 0.5 * k / denom;
    const double slack = 1.0 + 1e-12;
    for (std::size_t m = 0; m + 1 < rep.norms.size(); ++m)
        if (rep.norms[m + 1] > std::sqrt(rep.sup * rep.norms[m]) * slack)
            rep.holder_steps = false;
    for (std::size_t m = 1; m + 1 < rep.norms.size(); ++m)
        if (rep.norms[m] > std::pow(rep.norms[m + 1], 2.0 / 3.0) * std::pow(rep.norms[m - 1], 1.0 / 3.0) * slack)
            rep.log_convex = false;
    return rep;
}

double decay_fit_physical(std::span<const DiagnosticRow> series, double t_lo, double t_hi) {
    std::vector<double> x, y;
    for (const auto& row : series) {
        if (row.t < t_lo || row.t > t_hi || row.t <= 0.0 || row.sup_norm <= 0.0)
            continue;
        x.push_back(std::log(row.t));
        y.push_back(std::log(row.sup_norm));
    }
    if (x.size() < 3)
        throw InvalidArgument("decay_fit_physical needs three or more rows in [t_lo, t_hi]");
    return slope_fit(x, y);
}

}  // namespace critlab
