#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "critlab/drift.hpp"
#include "critlab/errors.hpp"
#include "critlab/lorentz.hpp"
#include "critlab/solver.hpp"

using namespace critlab;

namespace {

double interior_residual(const StationaryPair& pair, double k, double dx, double L) {
    RunConfig cfg;
    cfg.k = k;
    cfg.drift = pair.drift;
    cfg.u0 = pair.profile.sample(Grid(L, static_cast<std::size_t>(std::lround(2.0 * L / dx))));
    const Field rate = semi_discrete_rate(cfg.u0, 0.0, cfg);
    double worst = 0.0;
    for (std::size_t i = 0; i < rate.size(); ++i)
        if (std::abs(cfg.u0.grid().center(i)) < 0.5 * L)
            worst = std::max(worst, std::abs(rate[i]));
    return worst;
}

double weak_norm_of_derivative(double alpha, double p, std::size_t n) {
    const Grid g(4.0, n);
    const double eps = g.dx();
    const Field bx = Field::sample(g, [&](double x) { return blowup_con2_derivative_raw(alpha, 8.0, eps, x); });
    return lorentz_norm(bx, LorentzIndex(p, infinity), Convention::double_star);
}

}  // namespace

TEST_CASE("critic") {
    CHECK(critic(infinity, Case::con1) == 1.0);
    CHECK(critic(infinity, Case::con2) == 2.0);
    CHECK(critic(2.0, Case::con1) == 0.5);
    CHECK(critic(1.0, Case::con2) == 1.0);
    CHECK(critic(4.0, Case::con2) == 1.75);
    CHECK_THROWS_AS(critic(0.5, Case::con1), InvalidArgument);
}

TEST_CASE("stationary pair con1") {
    const StationaryPair s = stationary_pair_con1(4.0, 0.5);
    CHECK(s.profile(0.0) == 1.0);
    CHECK(s.drift.value(0.0, 0.0) == 0.0);
    CHECK(s.profile.exponent == doctest::Approx(0.75));
    // b(x) ~ -((1 - 1/p)/k) |x|^{-1/p} sign(x) far out.
    const double x = 1e6;
    CHECK(s.drift.value(0.0, x) * std::pow(x, 0.25) == doctest::Approx(-1.5).epsilon(1e-6));
    CHECK(interior_residual(s, 0.5, 1e-2, 20.0) <= 1e-3);
    CHECK_THROWS_AS(stationary_pair_con1(4.0, 0.75), InvalidArgument);
    CHECK_THROWS_AS(stationary_pair_con1(4.0, 0.0), InvalidArgument);

    const Grid g(200.0, 40000);
    const double n = lorentz_norm(s.drift.sample(g), LorentzIndex(4.0, infinity), Convention::double_star);
    CHECK(std::isfinite(n));
}

TEST_CASE("stationary pair con2") {
    const StationaryPair s = stationary_pair_con2(2.0, 1.0);
    CHECK(s.profile.exponent == doctest::Approx(0.75));
    for (double x : {0.3, 1.0, 5.0})
        CHECK(s.drift.value(0.0, -x) == -s.drift.value(0.0, x));
    CHECK(interior_residual(s, 1.0, 1e-2, 20.0) <= 1e-3);
    const Grid g(200.0, 40000);
    CHECK(std::isfinite(lorentz_norm(s.drift.sample_derivative(g), LorentzIndex(2.0, infinity), Convention::double_star)));
    CHECK_THROWS_AS(stationary_pair_con2(2.0, 1.5), InvalidArgument);
}

TEST_CASE("residual shrinks at second order") {
    const StationaryPair s = stationary_pair_con1(4.0, 0.5);
    const double coarse = interior_residual(s, 0.5, 0.04, 10.0);
    const double fine = interior_residual(s, 0.5, 0.02, 10.0);
    CHECK(std::log2(coarse / fine) > 1.7);
}

TEST_CASE("blow-up drift con1") {
    // ((beta + k - 1)/(alpha + k - 1))^{k/(beta - alpha)} = 10^{1/1.8}
    CHECK(blowup_con1_window(0.2, 2.0, 1.0) == doctest::Approx(std::pow(10.0, 1.0 / 1.8)));
    const DriftSpec b = blowup_drift_con1(0.2, 2.0, 1.2, 0.05, 1.0, 3.0);
    CHECK(b.family() == DriftFamily::blowup_con1);
    CHECK_NOTHROW(blowup_drift_con1(0.2, 2.0, 3.5, 0.05, 1.0, 3.0));
    CHECK_THROWS_AS(blowup_drift_con1(0.2, 2.0, 3.7, 0.05, 1.0, 3.0), InvalidArgument);
    CHECK_THROWS_AS(blowup_drift_con1(0.2, 2.0, 0.9, 0.05, 1.0, 3.0), InvalidArgument);
    CHECK_THROWS_AS(blowup_drift_con1(0.4, 2.0, 1.2, 0.05, 1.0, 3.0), InvalidArgument);
    CHECK_THROWS_AS(blowup_drift_con1(0.2, 0.3, 1.2, 0.05, 1.0, 3.0), InvalidArgument);
    CHECK_THROWS_AS(blowup_drift_con1(0.2, 2.0, 1.2, 0.05, 0.6, 3.0), InvalidArgument);
    CHECK_THROWS_AS(blowup_drift_con1(0.1, 2.0, 1.2, 0.05, 1.5, infinity), InvalidArgument);

    const Grid g(20.0, 8000);
    const EnvelopeReport e = validate_envelope(b, g);
    CHECK(e.holds);
    CHECK(e.inner_band <= 2.0 * 0.05);
    for (double x : {0.01, 0.7, 1.9, 3.0, 12.0}) {
        CHECK(b.value(0.0, -x) == -b.value(0.0, x));
        const double h = 1e-6;
        CHECK(b.derivative(0.0, x) == doctest::Approx((b.value(0.0, x + h) - b.value(0.0, x - h)) / (2 * h)).epsilon(1e-5));
    }

    // Weak norm is stable under refinement.
    const double n1 = lorentz_norm(b.sample(Grid(40.0, 8000)), LorentzIndex(3.0, infinity), Convention::double_star);
    const double n2 = lorentz_norm(b.sample(Grid(40.0, 80000)), LorentzIndex(3.0, infinity), Convention::double_star);
    CHECK(std::abs(n2 / n1 - 1.0) < 0.02);

    // Inner band shrinks with epsilon.
    const double band_a = validate_envelope(blowup_drift_con1(0.2, 2.0, 1.2, 0.1, 1.0, 3.0), g).inner_band;
    const double band_b = validate_envelope(blowup_drift_con1(0.2, 2.0, 1.2, 0.01, 1.0, 3.0), g).inner_band;
    CHECK(band_b <= band_a);
    CHECK(band_b <= 0.02);
}

TEST_CASE("blow-up drift con2") {
    CHECK(blowup_con2_threshold(1.0, 3.0) == doctest::Approx(8.0));
    const DriftSpec b = blowup_drift_con2(1.0, 8.0, 0.05, 3.0, infinity);
    CHECK_THROWS_AS(blowup_drift_con2(1.0, 7.9, 0.05, 3.0, infinity), InvalidArgument);
    CHECK_THROWS_AS(blowup_drift_con2(1.0, 8.0, 0.05, 1.9, infinity), InvalidArgument);
    CHECK_THROWS_AS(blowup_drift_con2(0.5, 100.0, 0.05, 3.0, 4.0), InvalidArgument);
    CHECK_THROWS_AS(blowup_drift_con2(1.5, 100.0, 0.05, 3.0, 4.0), InvalidArgument);
    CHECK_THROWS_AS(blowup_drift_con2(1.0, 8.0, 0.05, 1.9, 2.0), InvalidArgument);

    const Grid g(30.0, 6000);
    CHECK(validate_envelope(b, g).holds);
    CHECK(sup_norm(b.sample(g)) == doctest::Approx(8.0).epsilon(1e-12));
    for (double x : {0.02, 1.0, 7.99, 8.0, 20.0})
        CHECK(b.value(0.0, -x) == -b.value(0.0, x));
    for (double x : {0.02, 1.0, 7.99, 20.0}) {
        const double h = 1e-6;
        CHECK(b.derivative(0.0, x) == doctest::Approx((b.value(0.0, x + h) - b.value(0.0, x - h)) / (2 * h)).epsilon(1e-5));
    }
}

TEST_CASE("derivative weak norm: bounded below the exponent window, growing above") {
    // (1 - alpha) p < 1: finite and refinement-stable.
    const double a1 = weak_norm_of_derivative(0.8, 2.0, 4000);
    const double a2 = weak_norm_of_derivative(0.8, 2.0, 40000);
    CHECK(std::abs(a2 / a1 - 1.0) < 0.02);
    // (1 - alpha) p > 1: grows by 10^{(1 - alpha) - 1/p} per decade of refinement.
    const double alpha = 0.2, p = 4.0;
    const double g1 = weak_norm_of_derivative(alpha, p, 4000);
    const double g2 = weak_norm_of_derivative(alpha, p, 40000);
    const double g3 = weak_norm_of_derivative(alpha, p, 400000);
    const double predicted = (1.0 - alpha) - 1.0 / p;
    CHECK(std::abs(std::log10(g2 / g1) - predicted) < 0.1);
    CHECK(std::abs(std::log10(g3 / g2) - predicted) < 0.1);
}

TEST_CASE("Holder continuity") {
    const Grid g(10.0, 4000);
    CHECK(holder_continuity_check(DriftSpec::constant(3.0), 2.0, g, 200, 1).max_ratio == 0.0);
    // Linear b on the table range: p = inf gives the Lipschitz bound with ratio 1.
    const DriftSpec lin = DriftSpec::table({-20.0, 20.0}, {40.0, -40.0});
    const HolderReport hl = holder_continuity_check(lin, infinity, g, 200, 2);
    CHECK(hl.max_ratio == doctest::Approx(1.0).epsilon(1e-9));
    const HolderReport hb = holder_continuity_check(blowup_drift_con2(1.0, 8.0, 0.05, 3.0, 2.0), 2.0, g, 400, 3);
    CHECK(hb.max_ratio <= 1.0);
    CHECK(hb.pairs > 300);
}

TEST_CASE("table drift") {
    const auto path = std::filesystem::temp_directory_path() / "critlab_drift_table.txt";
    {
        std::ofstream out(path);
        out << "# x b\n-1 2\n0, 0\n1 -2\n\n";
    }
    const DriftSpec t = DriftSpec::load_table(path.string());
    CHECK(t.family() == DriftFamily::custom_table);
    CHECK(t.value(0.0, 0.5) == doctest::Approx(-1.0));
    CHECK(t.value(0.0, 5.0) == doctest::Approx(-2.0));
    CHECK(t.derivative(0.0, 0.5) == doctest::Approx(-2.0));
    std::filesystem::remove(path);
    CHECK_THROWS(DriftSpec::load_table("/nonexistent/table.txt"));
    CHECK_THROWS_AS(DriftSpec::table({1.0, 0.0}, {0.0, 1.0}), InvalidArgument);
}

TEST_CASE("auxiliary families") {
    const DriftSpec pt = DriftSpec::power_tail(2.0, 3.0);
    CHECK(pt.value(0.0, 0.0) == 0.0);
    CHECK(pt.value(0.0, 1e6) * std::pow(1e6, 1.0 / 3.0) == doctest::Approx(-2.0).epsilon(1e-6));
    const DriftSpec sat = DriftSpec::saturating(1.5, 0.5);
    CHECK(sat.value(0.0, 100.0) == doctest::Approx(-1.5));
    CHECK(DriftSpec::constant(0.0).is_zero());
    CHECK_FALSE(sat.is_zero());
}
