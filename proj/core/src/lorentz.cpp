#include "critlab/lorentz.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <utility>

#include <boost/math/quadrature/gauss.hpp>

#include "critlab/errors.hpp"
#include "critlab/heat.hpp"

namespace critlab {

namespace {

constexpr double rel_eps = 1e-12;

bool nearly(double a, double b) {
    return std::abs(a - b) <= rel_eps * std::max({1.0, std::abs(a), std::abs(b)});
}

// Integral of s^{e-1} over [s0, s1], s0 >= 0.
double power_piece(double s0, double s1, double e) {
    if (s0 == 0.0) {
        return std::pow(s1, e) / e;
    }
    double r = std::log(s1 / s0);
    if (e == 0.0)
        return r;
    return std::pow(s0, e) * std::expm1(e * r) / e;
}

double binomial(int n, int j) {
    double c = 1.0;
    for (int i = 1; i <= j; ++i)
        c = c * (n - j + i) / i;
    return c;
}

// Integral of s^{e-1} (v + c/s)^q over [s0, s1] with s0 > 0.
double double_star_piece(double s0, double s1, double v, double c, double q, double e) {
    if (c <= 0.0)
        return std::pow(v, q) * power_piece(s0, s1, e);
    double qi = std::round(q);
    if (qi == q && qi <= 8.0) {
        int n = static_cast<int>(qi);
        double sum = 0.0;
        for (int j = 0; j <= n; ++j)
            sum += binomial(n, j) * std::pow(v, n - j) * std::pow(c, j)
                   * power_piece(s0, s1, e - j);
        return sum;
    }
    // Non-integer q: Gauss-Legendre in z = log s on short chunks; the
    // integrand exp(e z) (v + c exp(-z))^q is analytic there.
    double z0 = std::log(s0);
    double z1 = std::log(s1);
    int chunks = std::max(1, static_cast<int>(std::ceil((z1 - z0) / 0.25)));
    double h = (z1 - z0) / chunks;
    double sum = 0.0;
    auto integrand = [&](double z) { return std::exp(e * z) * std::pow(v + c * std::exp(-z), q); };
    for (int i = 0; i < chunks; ++i) {
        double a = z0 + i * h;
        sum += boost::math::quadrature::gauss<double, 20>::integrate(integrand, a, a + h);
    }
    return sum;
}

double norm_double_star(const Rearrangement& r, const LorentzIndex& idx) {
    const double p = idx.p();
    const double q = idx.q();
    const std::size_t n = r.values.size();
    if (std::isinf(q)) {
        if (std::isinf(p))
            return r.values.front();
        if (p == 1.0)
            return r.total();
        // s^{1/p} f**(s) has no interior maximum on a piece, only endpoints.
        double best = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            best = std::max(best, std::pow(r.ends[i], 1.0 / p) * r.cumulative[i]);
        return best;
    }
    const double e = q / p;
    double sum = 0.0;
    double s_prev = 0.0;
    double a_prev = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double v = r.values[i];
        double s = r.ends[i];
        double c = std::max(0.0, a_prev - v * s_prev);
        sum += (s_prev == 0.0) ? std::pow(v, q) * power_piece(0.0, s, e)
                               : double_star_piece(s_prev, s, v, c, q, e);
        a_prev = r.cumulative[i] * s;
        s_prev = s;
    }
    // Tail beyond the support: f** = A / s.
    double tail_exp = e - q;
    sum += std::pow(a_prev, q) * std::pow(s_prev, tail_exp) / (-tail_exp);
    return std::pow(sum, 1.0 / q);
}

double norm_single_star(const Rearrangement& r, const LorentzIndex& idx) {
    const double p = idx.p();
    const double q = idx.q();
    const std::size_t n = r.values.size();
    if (std::isinf(q)) {
        if (std::isinf(p))
            return r.values.front();
        double best = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            best = std::max(best, r.values[i] * std::pow(r.ends[i], 1.0 / p));
        return best;
    }
    const double e = q / p;
    double sum = 0.0;
    double s_prev = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sum += std::pow(r.values[i], q) * power_piece(s_prev, r.ends[i], e);
        s_prev = r.ends[i];
    }
    return std::pow(sum, 1.0 / q);
}

Field pointwise_product(const Field& f, const Field& g) {
    if (!(f.grid() == g.grid()))
        throw InvalidArgument("pointwise product needs identical grids");
    Field out(f.grid());
    for (std::size_t i = 0; i < f.size(); ++i)
        out[i] = f[i] * g[i];
    return out;
}

RatioReport make_report(double lhs, double rhs) {
    RatioReport r{lhs, rhs, 0.0};
    if (rhs > 0.0)
        r.ratio = lhs / rhs;
    else if (lhs > 0.0)
        r.ratio = infinity;
    return r;
}

}  // namespace

LorentzIndex::LorentzIndex(double p, double q) : p_(p), q_(q) {
    if (std::isnan(p) || std::isnan(q))
        throw InvalidArgument("Lorentz index must not be NaN");
    if (q < 1.0)
        throw InvalidArgument("Lorentz index needs q >= 1");
    if (p < 1.0)
        throw InvalidArgument("Lorentz index needs p > 1");
    if (p == 1.0 && !std::isinf(q))
        throw InvalidArgument("p = 1 is admitted only with q = inf (weak L1)");
    if (std::isinf(p) && !std::isinf(q))
        throw InvalidArgument("p = inf is admitted only with q = inf");
}

double LorentzIndex::conjugate() const noexcept {
    if (std::isinf(p_))
        return 1.0;
    if (p_ == 1.0)
        return infinity;
    return p_ / (p_ - 1.0);
}

double Rearrangement::total() const noexcept {
    return ends.empty() ? 0.0 : cumulative.back() * ends.back();
}

double Rearrangement::fstar(double s) const {
    if (values.empty() || s > support_length)
        return 0.0;
    auto it = std::lower_bound(ends.begin(), ends.end(), s);
    if (it == ends.end())
        return 0.0;
    return values[static_cast<std::size_t>(it - ends.begin())];
}

double Rearrangement::fstarstar(double s) const {
    if (values.empty())
        return 0.0;
    if (s <= 0.0)
        return values.front();
    if (s >= support_length)
        return total() / s;
    auto i = static_cast<std::size_t>(std::lower_bound(ends.begin(), ends.end(), s) - ends.begin());
    double s_prev = i == 0 ? 0.0 : ends[i - 1];
    double a_prev = i == 0 ? 0.0 : cumulative[i - 1] * s_prev;
    return (a_prev + values[i] * (s - s_prev)) / s;
}

Rearrangement rearrange(const Field& f) {
    require_finite(f, "rearrange");
    const double dx = f.grid().dx();
    std::vector<double> mags;
    mags.reserve(f.size());
    for (double v : f.values())
        if (v != 0.0)
            mags.push_back(std::abs(v));
    std::stable_sort(mags.begin(), mags.end(), std::greater<>());

    Rearrangement r;
    double measure = 0.0;
    double acc = 0.0;
    std::size_t i = 0;
    while (i < mags.size()) {
        std::size_t j = i;
        while (j < mags.size() && mags[j] == mags[i])
            ++j;
        double width = dx * static_cast<double>(j - i);
        measure += width;
        acc += mags[i] * width;
        r.ends.push_back(measure);
        r.values.push_back(mags[i]);
        r.cumulative.push_back(acc / measure);
        i = j;
    }
    r.support_length = measure;
    return r;
}

double lorentz_norm(const Rearrangement& r, LorentzIndex idx, Convention c) {
    if (r.values.empty())
        return 0.0;
    // Normalize by the peak so large fields do not overflow pow().
    const double scale = r.values.front();
    Rearrangement unit = r;
    for (double& v : unit.values)
        v /= scale;
    for (double& v : unit.cumulative)
        v /= scale;
    double n = c == Convention::double_star ? norm_double_star(unit, idx) : norm_single_star(unit, idx);
    return scale * n;
}

double lorentz_norm(const Field& f, LorentzIndex idx, Convention c) {
    return lorentz_norm(rearrange(f), idx, c);
}

double moment(const Field& f, double alpha) {
    if (!(alpha >= 0.0))
        throw InvalidArgument("moment order must be nonnegative");
    require_finite(f, "moment");
    const Grid& g = f.grid();
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
        s += std::pow(std::abs(g.center(i)), alpha) * std::abs(f[i]);
    return s * g.dx();
}

MomentSet moments(const Field& f) { return {moment(f, 0.0), moment(f, 2.0)}; }

RatioReport check_holder(const Field& f, const Field& g, LorentzIndex idx_f, LorentzIndex idx_g,
                         LorentzIndex idx_prod) {
    if (!nearly(idx_prod.inv_p(), idx_f.inv_p() + idx_g.inv_p()))
        throw InvalidArgument("Holder: need 1/p = 1/p1 + 1/p2");
    Field fg = pointwise_product(f, g);
    double nf = lorentz_norm(f, idx_f, Convention::double_star);
    double ng = lorentz_norm(g, idx_g, Convention::double_star);
    if (idx_prod.p() == 1.0) {
        // Conjugate pairing: ||fg||_1 <= ||f||_{p1,q1} ||g||_{p1',q2}.
        if (idx_f.inv_q() + idx_g.inv_q() < 1.0 - rel_eps)
            throw InvalidArgument("Holder (p = 1): need 1/q1 + 1/q2 >= 1");
        return make_report(mass(fg), nf * ng);
    }
    if (idx_prod.inv_q() > idx_f.inv_q() + idx_g.inv_q() + rel_eps)
        throw InvalidArgument("Holder: need 1/q <= 1/q1 + 1/q2");
    double lhs = lorentz_norm(fg, idx_prod, Convention::double_star);
    return make_report(lhs, idx_prod.conjugate() * nf * ng);
}

RatioReport check_young(const Field& f, const Field& g, LorentzIndex idx_f, LorentzIndex idx_g,
                        LorentzIndex idx_conv) {
    if (!nearly(idx_conv.inv_p() + 1.0, idx_f.inv_p() + idx_g.inv_p()))
        throw InvalidArgument("Young: need 1/p + 1 = 1/p1 + 1/p2");
    double constant = 0.0;
    if (std::isinf(idx_conv.p())) {
        // Sup-norm endpoint: rearrangement inequality plus Holder in s, which
        // needs the q-exponents to be conjugate or better.
        if (idx_f.inv_q() + idx_g.inv_q() < 1.0 - rel_eps)
            throw InvalidArgument("Young (p = inf): need 1/q1 + 1/q2 >= 1");
        constant = 1.0;
    } else {
        if (idx_f.p() == 1.0 || idx_g.p() == 1.0 || idx_conv.p() == 1.0)
            throw InvalidArgument("Young: need 1 < p, p1, p2 < inf");
        if (idx_conv.inv_q() > idx_f.inv_q() + idx_g.inv_q() + rel_eps)
            throw InvalidArgument("Young: need 1/q <= 1/q1 + 1/q2");
        constant = 3.0 * idx_conv.p();
    }
    Field fg = convolve(f, g);
    double lhs = lorentz_norm(fg, idx_conv, Convention::double_star);
    double rhs = constant * lorentz_norm(f, idx_f, Convention::double_star)
                 * lorentz_norm(g, idx_g, Convention::double_star);
    return make_report(lhs, rhs);
}

InterpolationReport check_interpolation(const Field& f, double p1, double q1, double p2, double q2,
                                        double p, double q) {
    if (!(1.0 < p1 && p1 < p && p < p2 && !std::isinf(p2)))
        throw InvalidArgument("interpolation: need 1 < p1 < p < p2 < inf");
    LorentzIndex i1(p1, q1), i2(p2, q2), i(p, q);
    const double lambda = (1.0 / p - 1.0 / p2) / (1.0 / p1 - 1.0 / p2);
    const double n1 = lorentz_norm(f, i1, Convention::double_star);
    const double n2 = lorentz_norm(f, i2, Convention::double_star);
    const double lhs = lorentz_norm(f, i, Convention::double_star);

    // Pointwise bound s^{1/p_i} f**(s) <= (q_i/p_i)^{1/q_i} ||f||_{p_i,q_i}.
    auto pointwise = [](double pi, double qi) { return std::isinf(qi) ? 1.0 : std::pow(qi / pi, 1.0 / qi); };
    double split = 1.0;
    if (!std::isinf(q))
        split = std::pow(1.0 / (q / p - q / p2) + 1.0 / (q / p1 - q / p), 1.0 / q);
    const double a = pointwise(p1, q1) * n1;
    const double b = pointwise(p2, q2) * n2;
    const double rhs = split * std::pow(a, lambda) * std::pow(b, 1.0 - lambda);

    // Constant exactly as printed in the lemma statement.
    auto printed = [](double base, double expo) { return std::isinf(expo) ? 1.0 : std::pow(base, expo); };
    double literal = split * printed(p / q1, lambda / q2) * printed(p / q2, (1.0 - lambda) / q1)
                     * std::pow(n1, lambda) * std::pow(n2, 1.0 - lambda);

    InterpolationReport out;
    out.bound = make_report(lhs, rhs);
    out.literal_ratio = make_report(lhs, literal).ratio;
    out.lambda = lambda;
    return out;
}

RatioReport check_gagliardo(const Field& f, double p, double q) {
    if (!(1.0 <= q && q < p))
        throw InvalidArgument("Gagliardo-Nirenberg: need 1 <= q < p");
    require_finite(f, "check_gagliardo");
    const double inv_p = std::isinf(p) ? 0.0 : 1.0 / p;
    const double theta = (1.0 / q - inv_p) / (1.0 / q + 0.5);
    const double lhs = lp_norm(f, p);
    const double rhs = std::pow(l2_norm(centered_derivative(f)), theta) * std::pow(lp_norm(f, q), 1.0 - theta);
    return make_report(lhs, rhs);
}

}  // namespace critlab
