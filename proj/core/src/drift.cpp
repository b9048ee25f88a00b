#include "critlab/drift.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "critlab/errors.hpp"

namespace critlab {

namespace {

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

double inv(double p) { return std::isinf(p) ? 0.0 : 1.0 / p; }

void require_exponent(double p) {
    if (!(p > 1.0))
        throw InvalidArgument("drift exponent p must satisfy p > 1");
}

// C1 step on [0, 1].
double smoothstep(double u) { return u <= 0.0 ? 0.0 : (u >= 1.0 ? 1.0 : u * u * (3.0 - 2.0 * u)); }
double smoothstep_d(double u) { return (u <= 0.0 || u >= 1.0) ? 0.0 : 6.0 * u * (1.0 - u); }

// |b| for the con1 blow-up drift at r = |x|.
double con1_mag(const DriftParams& q, double r, double* deriv) {
    const double a = q.alpha, be = q.beta, xb = q.x_bar, eps = q.epsilon;
    if (r < eps) {
        // Odd cubic matching value and slope of r^{-a} at r = eps.
        const double xi = r / eps;
        const double c1 = 0.5 * (3.0 + a), c3 = 0.5 * (1.0 + a);
        const double scale = std::pow(eps, -a);
        if (deriv)
            *deriv = scale / eps * (c1 - 3.0 * c3 * xi * xi);
        return scale * (c1 * xi - c3 * xi * xi * xi);
    }
    const double inner = std::pow(r, -a);
    const double tail = std::pow(r, -be);
    if (r <= xb) {
        if (deriv)
            *deriv = -a * inner / r;
        return inner;
    }
    if (r >= 2.0 * xb) {
        if (deriv)
            *deriv = -be * tail / r;
        return tail;
    }
    const double u = (r - xb) / xb;
    const double chi = smoothstep(u);
    if (deriv)
        *deriv = (1.0 - chi) * (-a * inner / r) + chi * (-be * tail / r) + smoothstep_d(u) / xb * (tail - inner);
    return (1.0 - chi) * inner + chi * tail;
}

// Smoothed r^alpha: odd cubic below eps matching value and slope.
double con2_power(double a, double eps, double r, double* deriv) {
    if (r < eps) {
        const double xi = r / eps;
        const double c1 = 0.5 * (3.0 - a), c3 = 0.5 * (a - 1.0);
        const double scale = std::pow(eps, a);
        if (deriv)
            *deriv = scale / eps * (c1 + 3.0 * c3 * xi * xi);
        return scale * (c1 * xi + c3 * xi * xi * xi);
    }
    const double v = std::pow(r, a);
    if (deriv)
        *deriv = a * v / r;
    return v;
}

// |b| for the con2 blow-up drift: quadratic smooth-min of r^alpha and x_bar^alpha.
double con2_mag(double a, double xb, double eps, double r, double* deriv) {
    double gd = 0.0;
    const double g = con2_power(a, eps, r, &gd);
    const double cap = std::pow(xb, a);
    const double width = eps * a * std::pow(xb, a - 1.0);
    const double d = g - cap;
    if (std::abs(d) >= width) {
        if (deriv)
            *deriv = d < 0.0 ? gd : 0.0;
        return std::min(g, cap);
    }
    const double h = (width - std::abs(d)) / width;
    if (deriv)
        *deriv = (d < 0.0 ? gd : 0.0) + 0.5 * h * sign(d) * gd;
    return std::min(g, cap) - 0.25 * h * h * width;
}

}  // namespace

std::string to_string(DriftFamily f) {
    switch (f) {
    case DriftFamily::stationary_con1: return "stationary_con1";
    case DriftFamily::stationary_con2: return "stationary_con2";
    case DriftFamily::blowup_con1: return "blowup_con1";
    case DriftFamily::blowup_con2: return "blowup_con2";
    case DriftFamily::constant: return "constant";
    case DriftFamily::custom_table: return "custom_table";
    case DriftFamily::power_tail: return "power_tail";
    case DriftFamily::saturating: return "saturating";
    }
    return "unknown";
}

std::string to_string(Case c) { return c == Case::con1 ? "con1" : "con2"; }

DriftSpec::DriftSpec(DriftFamily family, DriftParams params) : family_(family), params_(params) {}

DriftSpec DriftSpec::constant(double value) {
    if (!std::isfinite(value))
        throw InvalidArgument("constant drift must be finite");
    DriftParams q;
    q.amplitude = value;
    return DriftSpec(DriftFamily::constant, q);
}

DriftSpec DriftSpec::power_tail(double amplitude, double p) {
    require_exponent(p);
    DriftParams q;
    q.amplitude = amplitude;
    q.p = p;
    return DriftSpec(DriftFamily::power_tail, q);
}

DriftSpec DriftSpec::saturating(double amplitude, double width) {
    if (!(width > 0.0))
        throw InvalidArgument("saturating drift needs a positive width");
    DriftParams q;
    q.amplitude = amplitude;
    q.width = width;
    return DriftSpec(DriftFamily::saturating, q);
}

DriftSpec DriftSpec::table(std::vector<double> x, std::vector<double> b) {
    if (x.size() < 2 || x.size() != b.size())
        throw InvalidArgument("drift table needs at least two (x, b) rows");
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(b[i]))
            throw InvalidArgument("drift table has a non-finite entry");
        if (i > 0 && !(x[i] > x[i - 1]))
            throw InvalidArgument("drift table abscissae must increase strictly");
    }
    DriftSpec s(DriftFamily::custom_table, DriftParams{});
    s.table_x_ = std::move(x);
    s.table_b_ = std::move(b);
    return s;
}

DriftSpec DriftSpec::load_table(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw InvalidArgument("cannot open drift table " + path);
    std::vector<double> xs, bs;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        double x, b;
        if (!(ls >> x))
            continue;
        if (!(ls >> b))
            throw InvalidArgument("drift table row needs two columns: " + line);
        xs.push_back(x);
        bs.push_back(b);
    }
    return table(std::move(xs), std::move(bs));
}

double DriftSpec::value(double, double x) const {
    const DriftParams& q = params_;
    switch (family_) {
    case DriftFamily::stationary_con1: {
        const double c = 1.0 - inv(q.p);
        return -(c / q.k) * x * std::pow(1.0 + x * x, -0.5 * (1.0 + inv(q.p)));
    }
    case DriftFamily::stationary_con2: {
        const double c = 2.0 - inv(q.p);
        return -(c / q.k) * x * std::pow(1.0 + x * x, -0.5 * inv(q.p));
    }
    case DriftFamily::blowup_con1: return -sign(x) * con1_mag(q, std::abs(x), nullptr);
    case DriftFamily::blowup_con2: return -sign(x) * con2_mag(q.alpha, q.x_bar, q.epsilon, std::abs(x), nullptr);
    case DriftFamily::constant: return q.amplitude;
    case DriftFamily::power_tail: return -q.amplitude * x * std::pow(1.0 + x * x, -0.5 * (1.0 + inv(q.p)));
    case DriftFamily::saturating: return -q.amplitude * std::tanh(x / q.width);
    case DriftFamily::custom_table: {
        if (x <= table_x_.front())
            return table_b_.front();
        if (x >= table_x_.back())
            return table_b_.back();
        auto i = static_cast<std::size_t>(std::upper_bound(table_x_.begin(), table_x_.end(), x) - table_x_.begin());
        const double w = (x - table_x_[i - 1]) / (table_x_[i] - table_x_[i - 1]);
        return (1.0 - w) * table_b_[i - 1] + w * table_b_[i];
    }
    }
    return 0.0;
}

double DriftSpec::derivative(double, double x) const {
    const DriftParams& q = params_;
    switch (family_) {
    case DriftFamily::stationary_con1:
    case DriftFamily::stationary_con2:
    case DriftFamily::power_tail: {
        double c = 0.0, g = 0.0;
        if (family_ == DriftFamily::stationary_con1) {
            c = (1.0 - inv(q.p)) / q.k;
            g = 0.5 * (1.0 + inv(q.p));
        } else if (family_ == DriftFamily::stationary_con2) {
            c = (2.0 - inv(q.p)) / q.k;
            g = 0.5 * inv(q.p);
        } else {
            c = q.amplitude;
            g = 0.5 * (1.0 + inv(q.p));
        }
        const double s = 1.0 + x * x;
        return -c * (std::pow(s, -g) - 2.0 * g * x * x * std::pow(s, -g - 1.0));
    }
    case DriftFamily::blowup_con1: {
        double d = 0.0;
        con1_mag(q, std::abs(x), &d);
        return -d;
    }
    case DriftFamily::blowup_con2: {
        double d = 0.0;
        con2_mag(q.alpha, q.x_bar, q.epsilon, std::abs(x), &d);
        return -d;
    }
    case DriftFamily::constant: return 0.0;
    case DriftFamily::saturating: {
        const double c = std::cosh(x / q.width);
        return -q.amplitude / (q.width * c * c);
    }
    case DriftFamily::custom_table: {
        if (x <= table_x_.front() || x >= table_x_.back())
            return 0.0;
        auto i = static_cast<std::size_t>(std::upper_bound(table_x_.begin(), table_x_.end(), x) - table_x_.begin());
        return (table_b_[i] - table_b_[i - 1]) / (table_x_[i] - table_x_[i - 1]);
    }
    }
    return 0.0;
}

bool DriftSpec::is_zero() const noexcept {
    switch (family_) {
    case DriftFamily::constant:
    case DriftFamily::power_tail:
    case DriftFamily::saturating: return params_.amplitude == 0.0;
    case DriftFamily::custom_table:
        return std::all_of(table_b_.begin(), table_b_.end(), [](double b) { return b == 0.0; });
    default: return false;
    }
}

Field DriftSpec::sample(const Grid& grid, double t) const {
    return Field::sample(grid, [&](double x) { return value(t, x); });
}

Field DriftSpec::sample_derivative(const Grid& grid, double t) const {
    return Field::sample(grid, [&](double x) { return derivative(t, x); });
}

double StationaryProfile::operator()(double x) const { return std::pow(1.0 + x * x, -exponent); }

Field StationaryProfile::sample(const Grid& grid) const {
    return Field::sample(grid, [this](double x) { return (*this)(x); });
}

double critic(double p, Case c) {
    if (!(p >= 1.0))
        throw InvalidArgument("critic needs p >= 1");
    return (c == Case::con1 ? 1.0 : 2.0) - inv(p);
}

StationaryPair stationary_pair_con1(double p, double k) {
    require_exponent(p);
    if (!(k > 0.0) || !(k < critic(p, Case::con1)))
        throw InvalidArgument("stationary_pair_con1 needs 0 < k < 1 - 1/p (subcritical hypothesis)");
    DriftParams q;
    q.p = p;
    q.k = k;
    return {StationaryProfile{(1.0 - inv(p)) / (2.0 * k)}, DriftSpec(DriftFamily::stationary_con1, q)};
}

StationaryPair stationary_pair_con2(double p, double k) {
    require_exponent(p);
    if (!(k > 0.0) || !(k < critic(p, Case::con2)))
        throw InvalidArgument("stationary_pair_con2 needs 0 < k < 2 - 1/p (subcritical hypothesis)");
    DriftParams q;
    q.p = p;
    q.k = k;
    return {StationaryProfile{(2.0 - inv(p)) / (2.0 * k)}, DriftSpec(DriftFamily::stationary_con2, q)};
}

double blowup_con1_window(double alpha, double beta, double k) {
    return std::pow((beta + k - 1.0) / (alpha + k - 1.0), k / (beta - alpha));
}

double blowup_con2_threshold(double alpha, double k) {
    return std::pow((k - 1.0) / (k - (alpha + 1.0)), k / alpha);
}

DriftSpec blowup_drift_con1(double alpha, double beta, double x_bar, double epsilon, double k, double p) {
    require_exponent(p);
    if (!(alpha >= 0.0) || (std::isinf(p) ? alpha != 0.0 : !(alpha * p < 1.0)))
        throw InvalidArgument("blowup_drift_con1: need alpha * p < 1 (alpha = 0 when p = inf)");
    if (!(beta > alpha) || !(std::isinf(p) ? beta > 0.0 : beta * p > 1.0))
        throw InvalidArgument("blowup_drift_con1: need beta * p > 1 and beta > alpha");
    if (!(k > critic(p, Case::con1)))
        throw InvalidArgument("blowup_drift_con1: need k > 1 - 1/p (supercritical)");
    if (!(alpha + k - 1.0 > 0.0))
        throw InvalidArgument("blowup_drift_con1: need k > 1 - alpha for the x_bar window");
    const double hi = blowup_con1_window(alpha, beta, k);
    if (!(x_bar >= 1.0 && x_bar <= hi))
        throw InvalidArgument("blowup_drift_con1: need 1 <= x_bar <= ((beta+k-1)/(alpha+k-1))^{k/(beta-alpha)} = "
                              + std::to_string(hi));
    if (!(epsilon > 0.0) || !(epsilon < x_bar))
        throw InvalidArgument("blowup_drift_con1: need 0 < epsilon < x_bar");
    DriftParams q;
    q.p = p;
    q.k = k;
    q.alpha = alpha;
    q.beta = beta;
    q.x_bar = x_bar;
    q.epsilon = epsilon;
    return DriftSpec(DriftFamily::blowup_con1, q);
}

DriftSpec blowup_drift_con2(double alpha, double x_bar, double epsilon, double k, double p) {
    require_exponent(p);
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw InvalidArgument("blowup_drift_con2: need 0 < alpha <= 1");
    if (!(k > 1.0 + alpha))
        throw InvalidArgument("blowup_drift_con2: need k > 1 + alpha");
    if (!((1.0 - alpha) * p < 1.0) && !(alpha == 1.0))
        throw InvalidArgument("blowup_drift_con2: need (1 - alpha) p < 1");
    if (!(k > critic(p, Case::con2)))
        throw InvalidArgument("blowup_drift_con2: need k > 2 - 1/p (supercritical)");
    const double lo = blowup_con2_threshold(alpha, k);
    if (!(x_bar >= lo * (1.0 - 1e-12)))
        throw InvalidArgument("blowup_drift_con2: need x_bar >= ((k-1)/(k-(alpha+1)))^{k/alpha} = "
                              + std::to_string(lo));
    if (!(epsilon > 0.0) || !(2.0 * epsilon < x_bar))
        throw InvalidArgument("blowup_drift_con2: need 0 < epsilon < x_bar / 2");
    DriftParams q;
    q.p = p;
    q.k = k;
    q.alpha = alpha;
    q.x_bar = x_bar;
    q.epsilon = epsilon;
    return DriftSpec(DriftFamily::blowup_con2, q);
}

EnvelopeReport validate_envelope(const DriftSpec& spec, const Grid& grid) {
    EnvelopeReport rep;
    const DriftParams& q = spec.params();
    const bool con1 = spec.family() == DriftFamily::blowup_con1;
    if (!con1 && spec.family() != DriftFamily::blowup_con2)
        return rep;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x = grid.center(i);
        const double r = std::abs(x);
        const double b = spec.value(0.0, x);
        // Orientation: b points toward the origin.
        double violation = (r > 0.0 && sign(b) == sign(x)) ? std::abs(b) : 0.0;
        const double mag = std::abs(b);
        if (con1) {
            const double upper = std::pow(r, -q.alpha);
            const double lower = r <= q.x_bar ? upper : std::pow(r, -q.beta);
            violation = std::max({violation, mag - upper, lower - mag});
        } else {
            const double upper = std::min(std::pow(r, q.alpha), std::pow(q.x_bar, q.alpha));
            violation = std::max(violation, mag - upper);
        }
        // Allow for rounding in the closed forms.
        if (violation <= 1e-12 * std::max(1.0, mag))
            continue;
        if (r <= 2.0 * q.epsilon) {
            rep.inner_band = std::max(rep.inner_band, r);
        } else {
            rep.holds = false;
            rep.worst_violation = std::max(rep.worst_violation, violation);
        }
    }
    return rep;
}

HolderReport holder_continuity_check(const DriftSpec& spec, double p, const Grid& grid, std::size_t n_pairs,
                                     unsigned long long seed) {
    if (!(p > 1.0))
        throw InvalidArgument("holder_continuity_check needs p > 1");
    HolderReport rep;
    rep.derivative_norm = lorentz_norm(spec.sample_derivative(grid), LorentzIndex(p, infinity), Convention::double_star);
    const double pc = LorentzIndex(p, infinity).conjugate();
    const double L = grid.half_width();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> pos(-L, L);
    std::uniform_real_distribution<double> logsep(-4.0, std::log10(L));
    for (std::size_t n = 0; n < n_pairs; ++n) {
        const double x = pos(rng);
        double y = pos(rng);
        if (n % 2 == 1) {
            // Close pairs probe the small-scale Holder exponent.
            y = std::clamp(x + std::pow(10.0, logsep(rng)) * (y > 0 ? 1.0 : -1.0), -L, L);
        }
        const double d = std::abs(x - y);
        if (d == 0.0)
            continue;
        const double lhs = std::abs(spec.value(0.0, x) - spec.value(0.0, y));
        const double rhs = pc * rep.derivative_norm * std::pow(d, 1.0 / pc);
        ++rep.pairs;
        if (rhs > 0.0)
            rep.max_ratio = std::max(rep.max_ratio, lhs / rhs);
        else if (lhs > 0.0)
            rep.max_ratio = infinity;
    }
    return rep;
}

double blowup_con2_derivative_raw(double alpha, double x_bar, double epsilon, double x) {
    double d = 0.0;
    con2_mag(alpha, x_bar, epsilon, std::abs(x), &d);
    return -d;
}

}  // namespace critlab
