#include <doctest.h>

#include <cmath>
#include <numbers>

#include "critlab/drift.hpp"
#include "critlab/errors.hpp"
#include "critlab/selfsim.hpp"

using namespace critlab;

namespace {

Field heat_solution(const Grid& g, double t) {
    return Field::average(g, [=](double x) { return 0.5 * std::erf(x / (2.0 * std::sqrt(t))); });
}

std::vector<RescaledFrame> heat_frames(double T, double tau_max, std::size_t count, const Grid& g) {
    std::vector<RescaledFrame> out;
    for (std::size_t i = 0; i < count; ++i) {
        const double tau = tau_max * static_cast<double>(i) / static_cast<double>(count - 1);
        const double t = physical_time(tau, T);
        out.push_back(to_selfsim(heat_solution(g, t + 1.0), t, T, 1.0));
    }
    return out;
}

}  // namespace

TEST_CASE("time maps") {
    CHECK(rescaled_time(0.0, 2.0) == 0.0);
    CHECK(physical_time(rescaled_time(1.3, 2.0), 2.0) == doctest::Approx(1.3).epsilon(1e-14));
    CHECK_THROWS_AS(rescaled_time(2.0, 2.0), InvalidArgument);
    CHECK_THROWS_AS(rescaled_time(-0.1, 2.0), InvalidArgument);
}

TEST_CASE("rescaling identities on matched grids") {
    const Grid g(15.0, 1500);
    const Field u0 = heat_solution(g, 0.4);
    const RescaledFrame f0 = to_selfsim(u0, 0.0, 1.0, 1.0);
    for (std::size_t i = 0; i < g.size(); ++i)
        CHECK(f0.v[i] == u0[i]);

    const double T = 2.5;
    for (double t : {0.3, 1.7, 2.4}) {
        const Field u = heat_solution(g, 0.4 + t);
        const RescaledFrame fr = to_selfsim(u, t, T, 1.0);
        CHECK(std::abs(mass(fr.v) - mass(u)) <= 1e-10 * mass(u));
        const double l2v = std::pow(l2_norm(fr.v), 2), l2u = std::pow(l2_norm(u), 2);
        CHECK(std::abs(l2v - std::sqrt(T) * std::exp(-0.5 * fr.tau) * l2u) <= 1e-3 * l2v);
        const Field back = from_selfsim(fr, g);
        double err = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i)
            err = std::max(err, std::abs(back[i] - u[i]));
        CHECK(err <= 1e-8 * sup_norm(u));
    }
}

TEST_CASE("explicit y-grid interpolation") {
    const Grid g(10.0, 2000);
    const Field u = heat_solution(g, 1.0);
    const RescaledFrame fr = to_selfsim(u, 0.75, 1.0, 1.0, Grid(16.0, 1600));
    CHECK(std::abs(mass(fr.v) - mass(u)) < 1e-5);
    CHECK_THROWS_AS(to_selfsim(u, 0.0, 1.0, 1.0, Grid(12.0, 100)), InvalidArgument);

    const DriftSpec b = DriftSpec::saturating(1.0, 1.0);
    const RescaledFrame fb = to_selfsim(u, 0.75, 1.0, 2.0, {}, &b);
    REQUIRE(fb.b_tilde.has_value());
    const double lam = 0.5;
    CHECK((*fb.b_tilde)[1500] == doctest::Approx(std::pow(lam, -1.0) * b.value(0.75, g.center(1500))));
}

TEST_CASE("rescaled drift norm scaling") {
    const Grid g(40.0, 4000);
    const DriftSpec b = DriftSpec::power_tail(1.0, 4.0);
    for (double tau : {0.0, 0.5, 2.0})
        for (double k : {0.5, 0.75, 1.2})
            CHECK(rescaled_drift_norm(b, tau, 3.0, k, 4.0, g).rel_residual < 1e-6);
    // Critical k = 1 - 1/p leaves the norm invariant.
    const double n0 = rescaled_drift_norm(b, 0.0, 3.0, 0.75, 4.0, g).rescaled;
    const double n1 = rescaled_drift_norm(b, 3.0, 3.0, 0.75, 4.0, g).rescaled;
    CHECK(n1 == doctest::Approx(n0).epsilon(1e-10));
    const DriftScaling id = rescaled_drift_norm(b, 0.0, 1.0, 0.4, 4.0, g);
    CHECK(id.rescaled == doctest::Approx(id.physical).epsilon(1e-12));
}

TEST_CASE("eta is C^{1,1} at the cut") {
    for (double a : {0.01, 1.0, 7.0}) {
        CHECK(eta(a, a) == doctest::Approx(0.5 * a * a));
        CHECK(eta_derivative(std::nextafter(a, 0.0), a) == doctest::Approx(a));
        CHECK(eta_derivative(std::nextafter(a, 2 * a), a) == a);
        CHECK(eta(2.0 * a, a) == doctest::Approx(1.5 * a * a));
    }
}

TEST_CASE("entropy dissipation for the heat flow") {
    const auto frames = heat_frames(4.0, 3.0, 61, Grid(25.0, 2500));
    for (double a : {0.05, 0.2, 10.0}) {
        const EntropyDiag d = entropy_series(frames, a, 1.0);
        CHECK(d.min_relative_margin >= -1e-3);
        CHECK(d.points.size() == frames.size());
    }
    const AdmissibleLevel lvl = admissible_level(frames, 0.01, 10.0, 7, 1.0);
    CHECK(lvl.a_bar == doctest::Approx(10.0));
    CHECK(lvl.levels.size() == 7);

    std::vector<RescaledFrame> bad(frames.begin(), frames.begin() + 4);
    bad[2].tau += 0.01;
    CHECK_THROWS_AS(entropy_series(bad, 1.0, 1.0), InvalidArgument);
    CHECK_THROWS_AS(entropy_series(std::span(frames).first(2), 1.0, 1.0), InvalidArgument);
}

TEST_CASE("budget and L2 decay") {
    const Grid g(25.0, 2500);
    std::vector<RescaledFrame> zero;
    for (int i = 0; i < 5; ++i)
        zero.push_back(to_selfsim(Field(g), physical_time(0.5 * i, 2.0), 2.0, 1.0));
    CHECK(entropy_budget(zero, 1.0) == 0.0);

    const auto frames = heat_frames(2.0, 8.0, 81, g);
    CHECK(l2_decay_fit(frames, 3.0) == doctest::Approx(-0.5).epsilon(0.1));
    CHECK(entropy_budget(frames, 0.5) > 0.0);
}

TEST_CASE("norm ladder") {
    const Grid g(2.0, 4096);
    const Field ind = Field::average(g, [](double x) { return std::clamp(x, 0.0, 1.0); });
    const LadderReport li = norm_ladder(ind, 6, infinity, 1.0);
    for (double n : li.norms)
        CHECK(n == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(li.top_gap < 1e-12);
    CHECK(li.ladder_exponent == doctest::Approx(2.0));
    CHECK(li.printed_exponent == doctest::Approx(1.0));

    const Field bump = Field::sample(Grid(6.0, 6000), [](double x) { return std::exp(-x * x); });
    const LadderReport lb = norm_ladder(bump, 12, 4.0, 0.75);
    CHECK(lb.top_gap < 0.01);
    CHECK(lb.holder_steps);
    CHECK(lb.log_convex);
    CHECK(lb.ladder_exponent == doctest::Approx(2.0));

    const LadderReport lz = norm_ladder(Field(g), 4, 2.0, 0.25);
    CHECK(lz.sup == 0.0);
    CHECK(lz.top_gap == 0.0);
}

TEST_CASE("physical decay fit") {
    std::vector<DiagnosticRow> rows;
    for (int i = 0; i <= 40; ++i) {
        DiagnosticRow r;
        r.t = std::pow(10.0, -1.0 + 0.075 * i);
        r.sup_norm = 1.0 / std::sqrt(4.0 * std::numbers::pi * r.t);
        rows.push_back(r);
    }
    CHECK(decay_fit_physical(rows, 1.0, 100.0) == doctest::Approx(-0.5).epsilon(0.06));
    CHECK_THROWS_AS(decay_fit_physical(rows, 1e3, 1e4), InvalidArgument);
}
