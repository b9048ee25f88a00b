#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "critlab/field.hpp"

namespace critlab {

struct CheckResult {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double limit = 0.0;
    std::string detail;
};

struct SuiteReport {
    std::string suite;
    std::vector<CheckResult> checks;
    bool passed() const;
};

// Seeded mix of steps, Gaussians, bumps and signed noise on the grid.
std::vector<Field> random_corpus(const Grid& grid, std::size_t count, std::uint64_t seed);

const std::vector<std::string>& verify_suites();

// suite is one of verify_suites() or "all".
std::vector<SuiteReport> run_verify(const std::string& suite, std::uint64_t seed);

}  // namespace critlab
