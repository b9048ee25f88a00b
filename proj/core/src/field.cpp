#include "critlab/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "critlab/errors.hpp"

namespace critlab {

Grid::Grid(double half_width, std::size_t n_cells)
    : half_width_(half_width), n_(n_cells), dx_(0.0) {
    if (!(half_width > 0.0) || !std::isfinite(half_width))
        throw InvalidArgument("grid half-width must be positive and finite");
    if (n_cells == 0)
        throw InvalidArgument("grid needs at least one cell");
    dx_ = 2.0 * half_width / static_cast<double>(n_cells);
}

Grid Grid::with_spacing(double dx, std::size_t n_cells) {
    return Grid(0.5 * dx * static_cast<double>(n_cells), n_cells);
}

std::vector<double> Grid::centers() const {
    std::vector<double> x(n_);
    for (std::size_t i = 0; i < n_; ++i)
        x[i] = center(i);
    return x;
}

bool Grid::same_spacing(const Grid& other) const noexcept {
    return std::abs(dx_ - other.dx_) <= 1e-12 * std::max(dx_, other.dx_);
}

bool Grid::operator==(const Grid& other) const noexcept {
    return n_ == other.n_ && half_width_ == other.half_width_;
}

Field::Field(Grid grid) : grid_(grid), values_(grid.size(), 0.0) {}

Field::Field(Grid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size())
        throw InvalidArgument("field size does not match grid");
}

Field Field::sample(const Grid& grid, const std::function<double(double)>& f) {
    Field out(grid);
    for (std::size_t i = 0; i < grid.size(); ++i)
        out.values_[i] = f(grid.center(i));
    return out;
}

Field Field::average(const Grid& grid, const std::function<double(double)>& antiderivative) {
    Field out(grid);
    double left = antiderivative(grid.face(0));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double right = antiderivative(grid.face(i + 1));
        out.values_[i] = (right - left) / grid.dx();
        left = right;
    }
    return out;
}

Field& Field::operator*=(double c) {
    for (double& v : values_)
        v *= c;
    return *this;
}

double integral(const Field& f) {
    double s = 0.0;
    for (double v : f.values())
        s += v;
    return s * f.grid().dx();
}

double mass(const Field& f) {
    double s = 0.0;
    for (double v : f.values())
        s += std::abs(v);
    return s * f.grid().dx();
}

double sup_norm(const Field& f) {
    double m = 0.0;
    for (double v : f.values())
        m = std::max(m, std::abs(v));
    return m;
}

double lp_norm(const Field& f, double p) {
    if (!(p >= 1.0))
        throw InvalidArgument("lp_norm needs p >= 1");
    double m = sup_norm(f);
    if (std::isinf(p) || m == 0.0)
        return m;
    double s = 0.0;
    for (double v : f.values())
        s += std::pow(std::abs(v) / m, p);
    return m * std::pow(s * f.grid().dx(), 1.0 / p);
}

double l2_norm(const Field& f) { return lp_norm(f, 2.0); }

Field centered_derivative(const Field& f) {
    const std::size_t n = f.size();
    const double dx = f.grid().dx();
    Field d(f.grid());
    if (n < 2)
        return d;
    d[0] = (f[1] - f[0]) / dx;
    d[n - 1] = (f[n - 1] - f[n - 2]) / dx;
    for (std::size_t i = 1; i + 1 < n; ++i)
        d[i] = (f[i + 1] - f[i - 1]) / (2.0 * dx);
    return d;
}

void require_finite(const Field& f, const char* what) {
    for (double v : f.values())
        if (!std::isfinite(v))
            throw InvalidArgument(std::string(what) + ": non-finite value in field");
}

}  // namespace critlab
