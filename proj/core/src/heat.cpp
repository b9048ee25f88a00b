#include "critlab/heat.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "critlab/errors.hpp"
#include "critlab/lorentz.hpp"

namespace critlab {

namespace {

// FFTW planning is not thread-safe; execution on distinct plans is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};

template <class T>
std::unique_ptr<T[], FftwFree> fftw_buffer(std::size_t n) {
    auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * n));
    if (!p)
        throw std::bad_alloc();
    return std::unique_ptr<T[], FftwFree>(p);
}

std::size_t fft_size(std::size_t n) {
    std::size_t m = 1;
    while (m < n)
        m <<= 1;
    return m;
}

std::vector<double> convolve_fft(std::span<const double> f, std::span<const double> g) {
    const std::size_t out_n = f.size() + g.size() - 1;
    const std::size_t n = fft_size(out_n);
    const std::size_t nc = n / 2 + 1;
    auto a = fftw_buffer<double>(n);
    auto b = fftw_buffer<double>(n);
    auto fa = fftw_buffer<fftw_complex>(nc);
    auto fb = fftw_buffer<fftw_complex>(nc);
    fftw_plan pa, pb, inv;
    {
        std::lock_guard lock(planner_mutex());
        pa = fftw_plan_dft_r2c_1d(static_cast<int>(n), a.get(), fa.get(), FFTW_ESTIMATE);
        pb = fftw_plan_dft_r2c_1d(static_cast<int>(n), b.get(), fb.get(), FFTW_ESTIMATE);
        inv = fftw_plan_dft_c2r_1d(static_cast<int>(n), fa.get(), a.get(), FFTW_ESTIMATE);
    }
    std::fill(a.get(), a.get() + n, 0.0);
    std::fill(b.get(), b.get() + n, 0.0);
    std::copy(f.begin(), f.end(), a.get());
    std::copy(g.begin(), g.end(), b.get());
    fftw_execute(pa);
    fftw_execute(pb);
    for (std::size_t i = 0; i < nc; ++i) {
        double re = fa[i][0] * fb[i][0] - fa[i][1] * fb[i][1];
        double im = fa[i][0] * fb[i][1] + fa[i][1] * fb[i][0];
        fa[i][0] = re;
        fa[i][1] = im;
    }
    fftw_execute(inv);
    std::vector<double> out(a.get(), a.get() + out_n);
    const double scale = 1.0 / static_cast<double>(n);
    for (double& v : out)
        v *= scale;
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(pa);
        fftw_destroy_plan(pb);
        fftw_destroy_plan(inv);
    }
    return out;
}

std::vector<double> convolve_direct(std::span<const double> f, std::span<const double> g) {
    std::vector<double> out(f.size() + g.size() - 1, 0.0);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double fi = f[i];
        if (fi == 0.0)
            continue;
        for (std::size_t j = 0; j < g.size(); ++j)
            out[i + j] += fi * g[j];
    }
    return out;
}

}  // namespace

KernelSample heat_kernel(double t, const Grid& grid) {
    if (!(t > 0.0) || !std::isfinite(t))
        throw InvalidArgument("heat_kernel needs t > 0");
    const double c = 1.0 / std::sqrt(4.0 * std::numbers::pi * t);
    Field g = Field::sample(grid, [&](double x) { return c * std::exp(-x * x / (4.0 * t)); });
    double tail = 1.0 - integral(g);
    return {t, std::move(g), tail};
}

KernelSample heat_kernel_gradient(double t, const Grid& grid) {
    if (!(t > 0.0) || !std::isfinite(t))
        throw InvalidArgument("heat_kernel_gradient needs t > 0");
    const double c = 1.0 / std::sqrt(4.0 * std::numbers::pi * t);
    Field g = Field::sample(grid, [&](double x) { return -x / (2.0 * t) * c * std::exp(-x * x / (4.0 * t)); });
    double tail = 1.0 / std::sqrt(std::numbers::pi * t) - mass(g);
    return {t, std::move(g), tail};
}

Field convolve(const Field& f, const Field& g, ConvolutionMethod method) {
    if (!f.grid().same_spacing(g.grid()))
        throw InvalidArgument("convolve needs a shared grid spacing");
    const double dx = f.grid().dx();
    std::vector<double> raw = method == ConvolutionMethod::fft ? convolve_fft(f.values(), g.values())
                                                               : convolve_direct(f.values(), g.values());
    for (double& v : raw)
        v *= dx;
    Grid out_grid = Grid::with_spacing(dx, raw.size());
    return Field(out_grid, std::move(raw));
}

Field restrict_to(const Field& f, const Grid& target) {
    if (!f.grid().same_spacing(target))
        throw InvalidArgument("restrict_to needs a shared grid spacing");
    const double dx = target.dx();
    const double shift = (f.grid().half_width() - target.half_width()) / dx;
    const double offset = std::round(shift);
    if (std::abs(shift - offset) > 1e-6)
        throw InvalidArgument("restrict_to needs aligned cell centers");
    const auto off = static_cast<long long>(offset);
    Field out(target);
    for (std::size_t i = 0; i < target.size(); ++i) {
        long long j = static_cast<long long>(i) + off;
        if (j >= 0 && j < static_cast<long long>(f.size()))
            out[i] = f[static_cast<std::size_t>(j)];
    }
    return out;
}

ScalingFit kernel_gradient_scaling(double p, std::span<const double> times, const Grid& grid) {
    if (!(p > 1.0) || std::isinf(p))
        throw InvalidArgument("kernel_gradient_scaling needs 1 < p < inf");
    if (times.size() < 3)
        throw InvalidArgument("kernel_gradient_scaling needs at least 3 times");
    auto [lo, hi] = std::minmax_element(times.begin(), times.end());
    if (!(*lo > 0.0) || *hi / *lo < 10.0 * (1.0 - 1e-12))
        throw InvalidArgument("kernel_gradient_scaling needs positive times spanning a decade");

    ScalingFit fit;
    std::vector<double> lx, ly;
    for (double t : times) {
        double n = lorentz_norm(heat_kernel_gradient(t, grid).values, LorentzIndex(p, 1.0), Convention::double_star);
        fit.norms.push_back(n);
        lx.push_back(std::log(t));
        ly.push_back(std::log(n));
    }
    const double m = static_cast<double>(lx.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    fit.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    fit.intercept = (sy - fit.slope * sx) / m;
    return fit;
}

MomentGrowthReport moment_growth_check(const Trajectory& traj, double k, double r) {
    MomentGrowthReport rep;
    if (traj.frames.empty())
        return rep;
    const double m0 = mass(traj.frames.front());
    for (std::size_t j = 0; j < traj.frames.size(); ++j) {
        const Field& u = traj.frames[j];
        rep.times.push_back(traj.times[j]);
        rep.weighted.push_back(mass(u) + moment(u, 2.0));
    }
    const double w0 = rep.weighted.front();
    const double growth = 1.0 + std::pow(r, k);
    for (std::size_t j = 0; j < rep.times.size(); ++j) {
        const double t = rep.times[j] - rep.times.front();
        if (t <= 0.0)
            continue;
        rep.heat_law_excess = std::max(rep.heat_law_excess, rep.weighted[j] - w0 - 2.0 * m0 * t);
        if (w0 > 0.0 && rep.weighted[j] > w0)
            rep.c_min = std::max(rep.c_min, std::log(rep.weighted[j] / w0) / (growth * t));
    }
    return rep;
}

}  // namespace critlab
