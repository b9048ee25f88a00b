#include "critlab/solver.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

#include "critlab/errors.hpp"
#include "critlab/lorentz.hpp"

namespace critlab {

namespace {

// u |u|^k, the sign-preserving power.
double spow(double u, double k) { return u * std::pow(std::abs(u), k); }

double minmod(double a, double b) {
    if (a * b <= 0.0)
        return 0.0;
    return std::abs(a) < std::abs(b) ? a : b;
}

// Advective face fluxes F_f = b(x_f) g(u_f), faces 0..n; ghost cells are 0.
std::vector<double> advective_fluxes(const Field& u, double t, const RunConfig& cfg, AdvectionScheme scheme) {
    const Grid& g = u.grid();
    const std::size_t n = g.size();
    std::vector<double> flux(n + 1, 0.0);
    if (cfg.drift.is_zero())
        return flux;
    auto cell = [&](long long i) -> double {
        return (i < 0 || i >= static_cast<long long>(n)) ? 0.0 : u[static_cast<std::size_t>(i)];
    };
    for (std::size_t f = 0; f <= n; ++f) {
        const double b = cfg.drift.value(t, g.face(f));
        if (b == 0.0)
            continue;
        const auto left = static_cast<long long>(f) - 1;
        const auto right = static_cast<long long>(f);
        double state;
        if (b > 0.0) {
            state = cell(left);
            if (scheme == AdvectionScheme::muscl)
                state += 0.5 * minmod(cell(left) - cell(left - 1), cell(right) - cell(left));
        } else {
            state = cell(right);
            if (scheme == AdvectionScheme::muscl)
                state -= 0.5 * minmod(cell(right) - cell(left), cell(right + 1) - cell(right));
        }
        flux[f] = b * spow(state, cfg.k);
    }
    return flux;
}

// (D u)_i with Dirichlet data imposed at the boundary faces via odd ghosts.
double laplacian(const Field& u, std::size_t i) {
    const std::size_t n = u.size();
    const double dx2 = u.grid().dx() * u.grid().dx();
    const double l = i == 0 ? -u[0] : u[i - 1];
    const double r = i + 1 == n ? -u[n - 1] : u[i + 1];
    return (l - 2.0 * u[i] + r) / dx2;
}

// Thomas algorithm for the constant-coefficient symmetric system of
// (I - theta dt D); a = off-diagonal, diag[i] per row.
void solve_tridiagonal(double a, std::vector<double>& diag, std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        assert(diag[i - 1] != 0.0);
        const double w = a / diag[i - 1];
        diag[i] -= w * a;
        rhs[i] -= w * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;)
        rhs[i] = (rhs[i] - a * rhs[i + 1]) / diag[i];
}

struct Attempt {
    Field u;
    double outflow;
};

Attempt attempt_step(const SolverState& s, const RunConfig& cfg, double dt, double theta, AdvectionScheme scheme) {
    const Field& u = s.u;
    const std::size_t n = u.size();
    const double dx = u.grid().dx();
    const std::vector<double> flux = advective_fluxes(u, s.t, cfg, scheme);

    std::vector<double> rhs(n), diag(n);
    const double r = theta * dt / (dx * dx);
    for (std::size_t i = 0; i < n; ++i) {
        rhs[i] = u[i] + (1.0 - theta) * dt * laplacian(u, i) - dt / dx * (flux[i + 1] - flux[i]);
        diag[i] = 1.0 + 2.0 * r;
    }
    diag[0] += r;
    diag[n - 1] += r;
    solve_tridiagonal(-r, diag, rhs);

    Field next(u.grid(), std::move(rhs));
    const double diffusive_out = 2.0 / dx * (theta * (next[0] + next[n - 1]) + (1.0 - theta) * (u[0] + u[n - 1]));
    const double outflow = dt * (flux[n] - flux[0] + diffusive_out);
    return {std::move(next), outflow};
}

double min_value(const Field& f) {
    double m = std::numeric_limits<double>::infinity();
    for (double v : f.values())
        m = std::min(m, v);
    return m;
}

}  // namespace

double RunConfig::threshold() const { return blowup_threshold > 0.0 ? blowup_threshold : 1e3 * sup_norm(u0); }

void RunConfig::validate() const {
    if (!(k > 0.0))
        throw InvalidArgument("run config: k must be positive");
    if (!(t_max > 0.0))
        throw InvalidArgument("run config: t_max must be positive");
    if (!(dt_floor > 0.0))
        throw InvalidArgument("run config: dt_floor must be positive");
    if (!(cfl > 0.0 && cfl <= 1.0))
        throw InvalidArgument("run config: cfl must lie in (0, 1]");
    if (!(theta >= 0.5 && theta <= 1.0))
        throw InvalidArgument("run config: theta must lie in [1/2, 1]");
    if (diagnostics_stride == 0)
        throw InvalidArgument("run config: diagnostics_stride must be positive");
    require_finite(u0, "run config u0");
    if (min_value(u0) < 0.0)
        throw InvalidArgument("run config: u0 must be nonnegative");
}

SolverState SolverState::initial(const RunConfig& config) {
    SolverState s;
    s.u = config.u0;
    return s;
}

double cfl_limit(const SolverState& s, const RunConfig& cfg) {
    if (cfg.drift.is_zero())
        return std::numeric_limits<double>::infinity();
    const Grid& g = s.u.grid();
    const std::size_t n = g.size();
    double speed = 0.0;
    for (std::size_t f = 0; f <= n; ++f) {
        const double ul = f == 0 ? 0.0 : s.u[f - 1];
        const double ur = f == n ? 0.0 : s.u[f];
        const double um = std::max(std::abs(ul), std::abs(ur));
        if (um == 0.0)
            continue;
        speed = std::max(speed, std::abs(cfg.drift.value(s.t, g.face(f))) * (cfg.k + 1.0) * std::pow(um, cfg.k));
    }
    return speed > 0.0 ? cfg.cfl * g.dx() / speed : std::numeric_limits<double>::infinity();
}

SolverState step(const SolverState& s, const RunConfig& cfg, double dt) {
    if (!(dt > 0.0))
        throw InvalidArgument("step needs dt > 0");
    const double scale = std::max(sup_norm(s.u), std::numeric_limits<double>::min());
    const double tol = -1e-14 * scale;

    SolverState next = s;
    Attempt a = attempt_step(s, cfg, dt, cfg.theta, cfg.scheme);
    if (min_value(a.u) < tol) {
        // Crank-Nicolson undershoot: fall back to backward Euler, then to
        // first-order upwinding, which is monotone under the CFL bound.
        ++next.theta_fallbacks;
        a = attempt_step(s, cfg, dt, 1.0, cfg.scheme);
        if (min_value(a.u) < tol)
            a = attempt_step(s, cfg, dt, 1.0, AdvectionScheme::upwind);
    }
    double clamped = 0.0;
    for (double& v : a.u.values()) {
        if (!std::isfinite(v))
            throw SolverFault("non-finite value after step", s.t, s.step_count);
        if (v < 0.0) {
            clamped -= v;
            v = 0.0;
        }
    }
    next.u = std::move(a.u);
    next.t = s.t + dt;
    next.dt = dt;
    next.step_count = s.step_count + 1;
    next.boundary_outflow = s.boundary_outflow + a.outflow;
    next.clamp_mass = s.clamp_mass + clamped * s.u.grid().dx();
    return next;
}

Field semi_discrete_rate(const Field& u, double t, const RunConfig& cfg) {
    const std::vector<double> flux = advective_fluxes(u, t, cfg, cfg.scheme);
    const double dx = u.grid().dx();
    Field rate(u.grid());
    for (std::size_t i = 0; i < u.size(); ++i)
        rate[i] = laplacian(u, i) - (flux[i + 1] - flux[i]) / dx;
    return rate;
}

std::string to_string(Classification c) {
    switch (c) {
    case Classification::completed: return "completed";
    case Classification::blow_up: return "blow_up";
    case Classification::dt_collapse: return "dt_collapse";
    }
    return "unknown";
}

DiagnosticRow diagnostics(const SolverState& s, const RunConfig& cfg) {
    DiagnosticRow row;
    row.t = s.t;
    row.sup_norm = sup_norm(s.u);
    row.l2_norm = l2_norm(s.u);
    row.mass = integral(s.u);
    row.energy = moment(s.u, 2.0);
    row.boundary_flux = s.boundary_outflow;
    const Grid& g = s.u.grid();
    double work = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = g.center(i);
        work += x * cfg.drift.value(s.t, x) * spow(s.u[i], cfg.k);
    }
    row.drift_work = work * g.dx();
    return row;
}

RunReport solve(const RunConfig& cfg) {
    cfg.validate();
    RunReport rep;
    SolverState s = SolverState::initial(cfg);
    rep.initial_mass = integral(s.u);
    const double threshold = cfg.threshold();

    std::vector<double> marks = cfg.record_times;
    marks.erase(std::remove_if(marks.begin(), marks.end(), [&](double t) { return !(t > 0.0 && t < cfg.t_max); }),
                marks.end());
    marks.push_back(cfg.t_max);
    std::sort(marks.begin(), marks.end());
    marks.erase(std::unique(marks.begin(), marks.end()), marks.end());
    std::size_t next_mark = 0;

    rep.frames.times.push_back(0.0);
    rep.frames.frames.push_back(s.u);
    rep.series.push_back(diagnostics(s, cfg));
    bool last_logged = true;

    while (s.t < cfg.t_max) {
        const double limit = cfl_limit(s, cfg);
        if (limit < cfg.dt_floor) {
            rep.classification = Classification::dt_collapse;
            break;
        }
        const double target = marks[next_mark];
        double dt = std::min(limit, target - s.t);
        if (cfg.dt_max > 0.0)
            dt = std::min(dt, cfg.dt_max);
        const bool lands = dt >= target - s.t;
        s = step(s, cfg, dt);
        last_logged = false;
        if (lands) {
            s.t = target;
            ++next_mark;
            rep.frames.times.push_back(s.t);
            rep.frames.frames.push_back(s.u);
        }
        const double sup = sup_norm(s.u);
        if (s.boundary_outflow > 0.01 * std::abs(rep.initial_mass))
            rep.domain_too_small = true;
        if (sup > threshold) {
            rep.classification = Classification::blow_up;
            break;
        }
        if (lands || s.step_count % cfg.diagnostics_stride == 0) {
            rep.series.push_back(diagnostics(s, cfg));
            last_logged = true;
        }
    }
    if (!last_logged)
        rep.series.push_back(diagnostics(s, cfg));
    rep.last_resolved_time = s.t;
    rep.terminal = std::move(s);
    return rep;
}

EnergyIdentity energy_flux_identity(const SolverState& s, const RunConfig& cfg) {
    const Field rate = semi_discrete_rate(s.u, s.t, cfg);
    const Grid& g = s.u.grid();
    double lhs = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
        lhs += g.center(i) * g.center(i) * rate[i];
    lhs *= g.dx();
    const DiagnosticRow row = diagnostics(s, cfg);
    return {lhs, 2.0 * row.mass + 2.0 * row.drift_work, 2.0 * row.mass - 2.0 * row.drift_work};
}

}  // namespace critlab
