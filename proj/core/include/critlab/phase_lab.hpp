#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "critlab/config.hpp"
#include "critlab/drift.hpp"
#include "critlab/solver.hpp"

namespace critlab {

enum class Regime { subcritical, critical, supercritical };
enum class Observed { global_nondecay, global_decay, blow_up, inconclusive };

std::string to_string(Regime r);
std::string to_string(Observed o);
Regime regime_of(double p, double k, Case c);

// Decay classification windows on the fitted sup-norm exponent.
struct Thresholds {
    double decay_lo = -0.65;
    double decay_hi = -0.35;
    double flat_lo = -0.1;  // open
    double flat_hi = 0.1;   // closed
    // global_nondecay also needs max sup <= bounded_factor * sup(u0).
    double bounded_factor = 10.0;
};

struct PhaseCell {
    std::size_t row = 0;
    std::size_t col = 0;
    double p = 0.0;
    double k = 0.0;
    Regime regime_expected = Regime::critical;
    Observed observed = Observed::inconclusive;
    double decay_exponent = 0.0;  // nan when no fit was possible
    std::string status = "ok";    // ok, skipped, failed
    std::string reason;
    std::string dir;              // relative to the sweep directory
};

struct SweepConfig {
    Case drift_case = Case::con1;
    std::vector<double> p_list;
    std::vector<double> k_list;
    bool k_offsets = true;  // k_list holds offsets from critic(p)
    Config base;
    std::filesystem::path out;
    std::size_t jobs = 1;
    std::uint64_t seed = 0;
    bool resume = true;
    // Linear cell index whose run is made to throw; for isolation tests.
    long long inject_failure = -1;

    static SweepConfig from_config(const Config& cfg);
    // Resolved config for cell (row, col), with the cell.* keys filled in.
    Config cell_config(std::size_t row, std::size_t col) const;
};

// Everything a cell run needs, built from a resolved cell config.
struct CellSetup {
    RunConfig run;
    Case drift_case = Case::con1;
    double p = 0.0;
    double fit_t_lo = 1.0;
    double fit_t_hi = 1.0;
    Thresholds thresholds;
};

CellSetup build_cell(const Config& cell_cfg);

Observed classify(const RunReport& report, double exponent, const Thresholds& th);

// Runs one cell and writes config.ini, series.csv and report.txt into dir.
// Failures are caught and recorded in the returned cell.
PhaseCell run_cell(const Config& cell_cfg, const std::filesystem::path& dir);

struct SweepResult {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<PhaseCell> cells;  // row-major, rows follow p_list
};

// Writes one directory per cell, then index.csv and summary.txt.
SweepResult run_sweep(const SweepConfig& cfg);

PhaseCell read_cell(const std::filesystem::path& cell_dir);
SweepResult read_sweep(const std::filesystem::path& dir);

// Text table for a sweep or single-cell directory; also writes
// phase_table.csv next to it. Throws ConfigError for a missing directory.
std::string render_report(const std::filesystem::path& dir);

}  // namespace critlab
