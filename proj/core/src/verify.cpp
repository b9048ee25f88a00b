#include "critlab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "critlab/drift.hpp"
#include "critlab/errors.hpp"
#include "critlab/heat.hpp"
#include "critlab/io.hpp"
#include "critlab/lorentz.hpp"
#include "critlab/selfsim.hpp"
#include "critlab/solver.hpp"

namespace critlab {

namespace {

CheckResult at_most(std::string name, double value, double limit) {
    return {std::move(name), value <= limit, value, limit, {}};
}

Field gaussian(const Grid& g, double t, double center = 0.0) {
    return Field::average(g, [&](double x) { return 0.5 * std::erf((x - center) / (2.0 * std::sqrt(t))); });
}

SuiteReport lorentz_suite(std::uint64_t seed) {
    SuiteReport rep{"lorentz", {}};
    const Grid g(4.0, 2048);

    // Indicator of measure mu: ||.||_{p,inf} = mu^{1/p}, ||.||_{p,1} = mu^{1/p} (p + p').
    const Field ind = Field::average(g, [](double x) { return std::clamp(x + 0.5, 0.0, 1.0); });
    for (double p : {1.5, 2.0, 4.0}) {
        const LorentzIndex weak(p, infinity), one(p, 1.0);
        const double e1 = std::abs(lorentz_norm(ind, weak, Convention::double_star) - 1.0);
        const double e2 = std::abs(lorentz_norm(ind, one, Convention::double_star) / (p + weak.conjugate()) - 1.0);
        rep.checks.push_back(at_most("indicator_oracle_p" + format_double(p), std::max(e1, e2), 1e-10));
    }

    const auto corpus = random_corpus(g, 24, seed);
    double sandwich = 0.0, holder = 0.0, young = 0.0, interp = 0.0;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const Field& f = corpus[i];
        const Field& h = corpus[(i + 7) % corpus.size()];
        for (double p : {1.5, 3.0}) {
            const double lp = lp_norm(f, p);
            const double pp = lorentz_norm(f, LorentzIndex(p, p), Convention::double_star);
            const double pc = p / (p - 1.0);
            sandwich = std::max({sandwich, lp / pp, pp / (pc * lp)});
        }
        holder = std::max(holder, check_holder(f, h, LorentzIndex(4.0, 2.0), LorentzIndex(4.0, 4.0),
                                               LorentzIndex(2.0, 2.0)).ratio);
        young = std::max(young, check_young(f, h, LorentzIndex(1.5, 2.0), LorentzIndex(1.5, 2.0),
                                            LorentzIndex(3.0, 2.0)).ratio);
        interp = std::max(interp, check_interpolation(f, 1.5, 2.0, 6.0, 2.0, 3.0, 2.0).bound.ratio);
    }
    rep.checks.push_back(at_most("sandwich_corpus", sandwich, 1.0 + 1e-12));
    rep.checks.push_back(at_most("holder_corpus", holder, 1.0));
    rep.checks.push_back(at_most("young_corpus", young, 1.0));
    rep.checks.push_back(at_most("interpolation_corpus", interp, 1.0));

    const Field zero(g);
    rep.checks.push_back(at_most("zero_field", lorentz_norm(zero, LorentzIndex(2.0, 1.0), Convention::double_star), 0.0));
    return rep;
}

SuiteReport heat_suite() {
    SuiteReport rep{"heat", {}};
    const Grid g(20.0, 4096);
    double worst_neg = 0.0;
    const KernelSample k = heat_kernel(1.0, g);
    for (double v : k.values.values())
        worst_neg = std::max(worst_neg, -v);
    rep.checks.push_back(at_most("kernel_positive", worst_neg, 0.0));
    rep.checks.push_back(at_most("kernel_mass", std::abs(integral(k.values) - 1.0), 1e-10));

    const std::vector<double> times{0.01, 0.0316, 0.1, 0.316, 1.0};
    const ScalingFit fit = kernel_gradient_scaling(2.0, times, Grid(10.0, 8192));
    rep.checks.push_back(at_most("gradient_scaling_p2", std::abs(fit.slope + 0.75), 0.05));

    // Semigroup: G(s) * G(t) = G(s + t).
    const Grid small(10.0, 1024);
    const Field a = heat_kernel(0.3, small).values;
    const Field b = heat_kernel(0.7, Grid::with_spacing(small.dx(), 2 * small.size() - 1)).values;
    const Field ab = restrict_to(convolve(a, b, ConvolutionMethod::fft), small);
    const Field c = heat_kernel(1.0, small).values;
    double err = 0.0;
    for (std::size_t i = 0; i < small.size(); ++i)
        err = std::max(err, std::abs(ab[i] - c[i]));
    rep.checks.push_back(at_most("semigroup", err / sup_norm(c), 1e-3));

    // Duhamel with b = 0 is the heat flow.
    Trajectory traj;
    traj.times = {0.0, 0.05, 0.1};
    const Field u0 = gaussian(small, 0.5);
    traj.frames = {u0, u0, u0};
    const DuhamelResult d = duhamel_apply(traj, DriftSpec::constant(0.0), 1.0, 0.1);
    const Field exact = gaussian(small, 0.6);
    double derr = 0.0;
    for (std::size_t i = 0; i < small.size(); ++i)
        derr = std::max(derr, std::abs(d.value[i] - exact[i]));
    rep.checks.push_back(at_most("duhamel_free_flow", derr / sup_norm(exact), 1e-3));
    return rep;
}

SuiteReport solver_suite() {
    SuiteReport rep{"solver", {}};
    RunConfig cfg;
    const Grid g(20.0, 800);
    cfg.u0 = gaussian(g, 1.0);
    cfg.t_max = 1.0;
    cfg.dt_max = 0.01;
    const RunReport heat = solve(cfg);
    const double m0 = integral(cfg.u0);
    const double drift = std::abs(integral(heat.terminal.u) + heat.terminal.boundary_outflow - m0) / m0;
    rep.checks.push_back(at_most("mass_conservation", drift, 1e-8));
    const Field exact = gaussian(g, 2.0);
    double l1 = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
        l1 += std::abs(heat.terminal.u[i] - exact[i]) * g.dx();
    rep.checks.push_back(at_most("heat_exact_l1", l1, 1e-3));

    RunConfig burg = cfg;
    burg.k = 1.0;
    burg.drift = DriftSpec::saturating(1.0, 1.0);
    burg.u0 = gaussian(g, 0.5);
    const SolverState s = SolverState::initial(burg);
    const EnergyIdentity id = energy_flux_identity(s, burg);
    rep.checks.push_back(at_most("energy_identity", std::abs(id.dE_dt_numeric - id.rhs) / std::abs(id.rhs), 1e-3));

    const RunReport br = solve(burg);
    double neg = 0.0;
    for (double v : br.terminal.u.values())
        neg = std::min(neg, v);
    rep.checks.push_back(at_most("positivity", -neg, 0.0));
    return rep;
}

SuiteReport selfsim_suite() {
    SuiteReport rep{"selfsim", {}};
    const Grid g(20.0, 1024);
    const Field u = gaussian(g, 0.7);
    const double T = 3.0, t = 1.2;
    const RescaledFrame fr = to_selfsim(u, t, T, 1.0);
    const Field back = from_selfsim(fr, g);
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
        err = std::max(err, std::abs(back[i] - u[i]));
    rep.checks.push_back(at_most("roundtrip", err / sup_norm(u), 1e-12));

    const double l2v = std::pow(l2_norm(fr.v), 2);
    const double l2u = std::pow(l2_norm(u), 2);
    const double pred = std::sqrt(T) * std::exp(-0.5 * fr.tau) * l2u;
    rep.checks.push_back(at_most("l2_identity", std::abs(l2v - pred) / pred, 1e-3));

    const DriftScaling ds = rescaled_drift_norm(DriftSpec::power_tail(1.0, 4.0), 0.8, T, 1.0, 4.0, g);
    rep.checks.push_back(at_most("drift_norm_scaling", ds.rel_residual, 1e-6));

    double jump = 0.0;
    for (double a : {0.1, 1.0, 3.0})
        jump = std::max(jump, std::abs(eta(a * (1 + 1e-12), a) - eta(a, a)));
    rep.checks.push_back(at_most("eta_continuous", jump, 1e-10));

    std::vector<RescaledFrame> zero;
    for (int i = 0; i < 4; ++i)
        zero.push_back(to_selfsim(Field(g), physical_time(0.1 * i, T), T, 1.0));
    const EntropyDiag d = entropy_series(zero, 1.0, 1.0);
    double worst = 0.0;
    for (const auto& p : d.points)
        worst = std::max({worst, std::abs(p.lhs), std::abs(p.rhs)});
    rep.checks.push_back(at_most("entropy_zero_field", worst, 0.0));

    const LadderReport lad = norm_ladder(u, 6, 2.0, 1.0);
    rep.checks.push_back({"ladder_holder_steps", lad.holder_steps && lad.log_convex, 0.0, 0.0, {}});
    return rep;
}

SuiteReport drifts_suite(std::uint64_t seed) {
    SuiteReport rep{"drifts", {}};
    const Grid g(60.0, 6000);
    const EnvelopeReport e1 = validate_envelope(blowup_drift_con1(0.0, 0.5, 1.0, 0.1, 1.5, infinity), g);
    rep.checks.push_back({"envelope_con1", e1.holds, e1.worst_violation, 0.0, {}});
    const EnvelopeReport e2 = validate_envelope(blowup_drift_con2(1.0, 8.0, 0.1, 3.0, 2.0), g);
    rep.checks.push_back({"envelope_con2", e2.holds, e2.worst_violation, 0.0, {}});

    // Stationary pairs are steady states of the semi-discrete scheme up to O(dx^2).
    for (Case c : {Case::con1, Case::con2}) {
        const StationaryPair pair = c == Case::con1 ? stationary_pair_con1(4.0, 0.5) : stationary_pair_con2(2.0, 1.0);
        RunConfig cfg;
        cfg.k = c == Case::con1 ? 0.5 : 1.0;
        cfg.drift = pair.drift;
        cfg.u0 = pair.profile.sample(Grid(30.0, 3000));
        const Field rate = semi_discrete_rate(cfg.u0, 0.0, cfg);
        // Boundary cells see the Dirichlet cut of the algebraic tail.
        double worst = 0.0;
        for (std::size_t i = 0; i < rate.size(); ++i)
            if (std::abs(cfg.u0.grid().center(i)) < 15.0)
                worst = std::max(worst, std::abs(rate[i]));
        rep.checks.push_back(at_most("stationary_residual_" + to_string(c), worst, 1e-3));
    }

    const HolderReport h = holder_continuity_check(DriftSpec::saturating(1.0, 0.5), 2.0, g, 400, seed);
    rep.checks.push_back(at_most("holder_continuity", h.max_ratio, 1.0));
    return rep;
}

}  // namespace

bool SuiteReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

std::vector<Field> random_corpus(const Grid& g, std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double L = g.half_width();
    std::vector<Field> out;
    for (std::size_t i = 0; i < count; ++i) {
        Field f(g);
        switch (i % 4) {
        case 0: {
            // A few steps of random height.
            for (int j = 0; j < 3; ++j) {
                const double a = (unif(rng) - 0.5) * L, w = 0.05 * L + 0.4 * L * unif(rng), h = 0.2 + unif(rng);
                for (std::size_t c = 0; c < g.size(); ++c)
                    if (std::abs(g.center(c) - a) < 0.5 * w)
                        f[c] += h;
            }
            break;
        }
        case 1: {
            const double a = (unif(rng) - 0.5) * L, s = 0.02 * L + 0.2 * L * unif(rng), h = 0.5 + 2.0 * unif(rng);
            f = Field::sample(g, [&](double x) { return h * std::exp(-0.5 * (x - a) * (x - a) / (s * s)); });
            break;
        }
        case 2: {
            // Integrable cusp |x - a|^{-1/4} cut at the grid scale.
            const double a = (unif(rng) - 0.5) * L;
            f = Field::sample(g, [&](double x) {
                const double r = std::max(std::abs(x - a), g.dx());
                return r < 0.3 * L ? std::pow(r, -0.25) : 0.0;
            });
            break;
        }
        default: {
            for (std::size_t c = 0; c < g.size(); ++c)
                f[c] = std::abs(g.center(c)) < 0.5 * L ? 2.0 * unif(rng) - 1.0 : 0.0;
            break;
        }
        }
        out.push_back(std::move(f));
    }
    return out;
}

const std::vector<std::string>& verify_suites() {
    static const std::vector<std::string> names{"lorentz", "heat", "solver", "selfsim", "drifts"};
    return names;
}

std::vector<SuiteReport> run_verify(const std::string& suite, std::uint64_t seed) {
    const auto& names = verify_suites();
    if (suite != "all" && std::find(names.begin(), names.end(), suite) == names.end())
        throw InvalidArgument("unknown suite '" + suite + "'");
    std::vector<SuiteReport> out;
    auto want = [&](const char* s) { return suite == "all" || suite == s; };
    auto guarded = [&](const char* name, auto&& fn) {
        if (!want(name))
            return;
        try {
            out.push_back(fn());
        } catch (const std::exception& e) {
            out.push_back({name, {{"exception", false, 0.0, 0.0, e.what()}}});
        }
    };
    guarded("lorentz", [&] { return lorentz_suite(seed); });
    guarded("heat", [&] { return heat_suite(); });
    guarded("solver", [&] { return solver_suite(); });
    guarded("selfsim", [&] { return selfsim_suite(); });
    guarded("drifts", [&] { return drifts_suite(seed); });
    return out;
}

}  // namespace critlab
