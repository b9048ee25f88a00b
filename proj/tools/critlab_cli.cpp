#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "critlab/config.hpp"
#include "critlab/errors.hpp"
#include "critlab/io.hpp"
#include "critlab/phase_lab.hpp"
#include "critlab/selfsim.hpp"
#include "critlab/verify.hpp"

namespace fs = std::filesystem;
using namespace critlab;

namespace {

enum Exit { ok = 0, verification_failed = 1, invalid_config = 2, runtime_fault = 3 };

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::size_t> jobs;
    std::optional<std::size_t> grid_n;
    std::optional<double> domain_L;

    void apply(Config& c) const {
        if (seed)
            c.set("sweep.seed", std::to_string(*seed));
        if (out)
            c.set("sweep.out", *out);
        if (jobs)
            c.set("sweep.jobs", std::to_string(*jobs));
        if (grid_n)
            c.set("grid.n", std::to_string(*grid_n));
        if (domain_L)
            c.set("grid.L", format_double(*domain_L));
    }
};

int cmd_run(const std::string& path, const Overrides& ov) {
    Config c = Config::load(path);
    ov.apply(c);
    Config cell;
    if (c.has("cell.p") && c.has("cell.k")) {
        cell = c;
        if (ov.seed)
            cell.set("cell.seed", std::to_string(*ov.seed));
    } else {
        const SweepConfig sc = SweepConfig::from_config(c);
        if (sc.p_list.size() != 1 || sc.k_list.size() != 1)
            throw ConfigError("run needs [cell] p and k, or single-entry sweep lists");
        cell = sc.cell_config(0, 0);
    }
    const fs::path dir = ov.out ? fs::path(*ov.out) : fs::path(c.get_string("sweep.out", "run"));
    const PhaseCell res = run_cell(cell, dir);
    std::cout << render_report(dir);
    if (res.status == "skipped")
        return invalid_config;
    return res.status == "ok" ? ok : runtime_fault;
}

int cmd_sweep(const std::string& path, const Overrides& ov) {
    Config c = Config::load(path);
    ov.apply(c);
    const SweepConfig sc = SweepConfig::from_config(c);
    run_sweep(sc);
    std::cout << render_report(sc.out);
    return ok;
}

int cmd_verify(const std::string& suite, std::uint64_t seed) {
    const auto reports = run_verify(suite, seed);
    nlohmann::json j;
    bool all = true;
    for (const auto& r : reports) {
        nlohmann::json s;
        s["passed"] = r.passed();
        for (const auto& c : r.checks) {
            nlohmann::json cj{{"name", c.name}, {"passed", c.passed}};
            if (std::isfinite(c.value))
                cj["value"] = c.value;
            if (std::isfinite(c.limit))
                cj["limit"] = c.limit;
            if (!c.detail.empty())
                cj["detail"] = c.detail;
            s["checks"].push_back(cj);
        }
        j["suites"][r.suite] = s;
        all = all && r.passed();
    }
    j["seed"] = seed;
    j["passed"] = all;
    std::cout << j.dump(2) << '\n';
    return all ? ok : verification_failed;
}

int cmd_fit_decay(const std::string& path, double t_lo, double t_hi) {
    const auto rows = read_series_csv(path);
    if (rows.empty())
        throw ConfigError(path + ": no rows");
    const double hi = t_hi > 0.0 ? t_hi : rows.back().t;
    std::cout << "exponent=" << format_double(decay_fit_physical(rows, t_lo, hi)) << '\n';
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"critlab: drift-diffusion critical exponent laboratory"};
    app.require_subcommand(1);
    Overrides ov;
    std::uint64_t seed = 0;
    std::string out;
    std::size_t jobs = 0, grid_n = 0;
    double domain_L = 0.0;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--seed", seed, "Seed for randomized inputs");
        sub->add_option("--out", out, "Output directory");
        sub->add_option("--jobs", jobs, "Worker threads for sweeps")->check(CLI::PositiveNumber);
        sub->add_option("--grid-n", grid_n, "Override grid.n")->check(CLI::PositiveNumber);
        sub->add_option("--domain-L", domain_L, "Override grid.L")->check(CLI::PositiveNumber);
    };

    std::string config_path, suite = "all", series_path, dir;
    double t_lo = 1.0, t_hi = 0.0;

    auto* run = app.add_subcommand("run", "Run a single cell");
    run->add_option("config", config_path, "Cell or single-entry sweep config")->required();
    add_common(run);
    auto* sweep = app.add_subcommand("sweep", "Run a (p, k) sweep");
    sweep->add_option("config", config_path, "Sweep config")->required();
    add_common(sweep);
    auto* verify = app.add_subcommand("verify", "Run invariant suites");
    verify->add_option("suite", suite, "lorentz, heat, solver, selfsim, drifts or all");
    verify->add_option("--seed", seed, "Corpus seed");
    auto* fit = app.add_subcommand("fit-decay", "Fit the sup-norm decay exponent of a series CSV");
    fit->add_option("series", series_path, "series.csv")->required();
    fit->add_option("--t-lo", t_lo, "Window start");
    fit->add_option("--t-hi", t_hi, "Window end (default: last row)");
    auto* report = app.add_subcommand("report", "Summarize a run or sweep directory");
    report->add_option("dir", dir, "Run or sweep directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return invalid_config;
    }

    auto given = [](CLI::App* sub, const char* name) { return sub->count(name) > 0; };
    for (CLI::App* sub : {run, sweep}) {
        if (!sub->parsed())
            continue;
        if (given(sub, "--seed"))
            ov.seed = seed;
        if (given(sub, "--out"))
            ov.out = out;
        if (given(sub, "--jobs"))
            ov.jobs = jobs;
        if (given(sub, "--grid-n"))
            ov.grid_n = grid_n;
        if (given(sub, "--domain-L"))
            ov.domain_L = domain_L;
    }

    try {
        if (run->parsed())
            return cmd_run(config_path, ov);
        if (sweep->parsed())
            return cmd_sweep(config_path, ov);
        if (verify->parsed())
            return cmd_verify(suite, seed);
        if (fit->parsed())
            return cmd_fit_decay(series_path, t_lo, t_hi);
        if (report->parsed()) {
            std::cout << render_report(dir);
            return ok;
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return invalid_config;
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return invalid_config;
    } catch (const std::exception& e) {
        std::cerr << "fault: " << e.what() << '\n';
        return runtime_fault;
    }
    return invalid_config;
}
