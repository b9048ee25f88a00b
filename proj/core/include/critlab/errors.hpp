#pragma once

#include <stdexcept>
#include <string>

namespace critlab {

// Rejected arguments: bad exponents, mismatched grids, window violations.
class InvalidArgument : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// Malformed or inconsistent configuration files.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Picard iteration failed to contract on the requested window.
class NonContraction : public std::runtime_error {
  public:
    NonContraction(const std::string& what, double ratio, double t_bar)
        : std::runtime_error(what), ratio_(ratio), t_bar_(t_bar) {}

    double ratio() const noexcept { return ratio_; }
    double t_bar() const noexcept { return t_bar_; }
    double suggested_t_bar() const noexcept { return 0.5 * t_bar_; }

  private:
    double ratio_;
    double t_bar_;
};

// Numerical breakdown inside a time integrator (NaN, failed solve).
class SolverFault : public std::runtime_error {
  public:
    SolverFault(const std::string& what, double t, std::size_t step)
        : std::runtime_error(what), t_(t), step_(step) {}

    double time() const noexcept { return t_; }
    std::size_t step() const noexcept { return step_; }

  private:
    double t_;
    std::size_t step_;
};

}  // namespace critlab
