#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace critlab {

// Uniform cell-centred mesh on [-L, L].
class Grid {
  public:
    Grid() : Grid(1.0, 1) {}
    Grid(double half_width, std::size_t n_cells);

    // Grid with prescribed spacing: L = n_cells * dx / 2.
    static Grid with_spacing(double dx, std::size_t n_cells);

    double half_width() const noexcept { return half_width_; }
    std::size_t size() const noexcept { return n_; }
    double dx() const noexcept { return dx_; }

    double center(std::size_t i) const noexcept {
        return -half_width_ + (static_cast<double>(i) + 0.5) * dx_;
    }
    // Face i sits between cells i-1 and i; faces 0 and n are the boundary.
    double face(std::size_t i) const noexcept {
        return -half_width_ + static_cast<double>(i) * dx_;
    }
    std::vector<double> centers() const;

    // True when spacing agrees to relative 1e-12.
    bool same_spacing(const Grid& other) const noexcept;
    bool operator==(const Grid& other) const noexcept;

  private:
    double half_width_;
    std::size_t n_;
    double dx_;
};

// Cell averages of a real function on a Grid.
class Field {
  public:
    Field() : Field(Grid()) {}
    explicit Field(Grid grid);
    Field(Grid grid, std::vector<double> values);

    static Field sample(const Grid& grid, const std::function<double(double)>& f);
    // Exact cell averages from an antiderivative F: (F(x+) - F(x-)) / dx.
    static Field average(const Grid& grid, const std::function<double(double)>& antiderivative);

    const Grid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }
    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }
    double operator[](std::size_t i) const noexcept { return values_[i]; }
    double& operator[](std::size_t i) noexcept { return values_[i]; }

    Field& operator*=(double c);

  private:
    Grid grid_;
    std::vector<double> values_;
};

// Snapshot sequence of one solution on a fixed grid.
struct Trajectory {
    std::vector<double> times;
    std::vector<Field> frames;
};

double integral(const Field& f);
double mass(const Field& f);
double sup_norm(const Field& f);
double lp_norm(const Field& f, double p);
double l2_norm(const Field& f);
// Centered differences; one-sided at the two end cells.
Field centered_derivative(const Field& f);
void require_finite(const Field& f, const char* what);

}  // namespace critlab
