#include "critlab/phase_lab.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>
#include <thread>

#include "critlab/errors.hpp"
#include "critlab/io.hpp"
#include "critlab/selfsim.hpp"

namespace critlab {

namespace fs = std::filesystem;

namespace {

Case parse_case(const std::string& s) {
    if (s == "con1")
        return Case::con1;
    if (s == "con2")
        return Case::con2;
    throw ConfigError("case must be con1 or con2, got '" + s + "'");
}

Regime parse_regime(const std::string& s) {
    for (Regime r : {Regime::subcritical, Regime::critical, Regime::supercritical})
        if (to_string(r) == s)
            return r;
    throw ConfigError("unknown regime '" + s + "'");
}

Observed parse_observed(const std::string& s) {
    for (Observed o : {Observed::global_nondecay, Observed::global_decay, Observed::blow_up, Observed::inconclusive})
        if (to_string(o) == s)
            return o;
    throw ConfigError("unknown classification '" + s + "'");
}

std::string one_line(std::string s) {
    std::replace(s.begin(), s.end(), '\n', ' ');
    std::replace(s.begin(), s.end(), '\r', ' ');
    return s;
}

Field initial_field(const Config& c, const Grid& g, double p, double k, Case dc) {
    const std::string shape = c.get_string("initial.shape", "gaussian");
    const double center = c.get_double("initial.center", 0.0);
    Field u0;
    if (shape == "gaussian") {
        const double m = c.get_double("initial.mass", 1.0);
        const double sigma = c.get_double("initial.sigma", 1.0);
        if (!(sigma > 0.0))
            throw ConfigError("initial.sigma must be positive");
        u0 = Field::average(g, [&](double x) { return 0.5 * m * std::erf((x - center) / (sigma * std::sqrt(2.0))); });
    } else if (shape == "box") {
        const double m = c.get_double("initial.mass", 1.0);
        const double w = c.get_double("initial.width", 1.0);
        if (!(w > 0.0))
            throw ConfigError("initial.width must be positive");
        u0 = Field::average(g, [&](double x) { return m * std::clamp((x - center) / w + 0.5, 0.0, 1.0); });
    } else if (shape == "stationary") {
        const StationaryPair pair = dc == Case::con1 ? stationary_pair_con1(p, k) : stationary_pair_con2(p, k);
        u0 = Field::sample(g, [&](double x) { return pair.profile(x - center); });
        u0 *= c.get_double("initial.scale", 1.0);
        if (c.has("initial.mass"))
            u0 *= c.get_double("initial.mass") / mass(u0);
    } else {
        throw ConfigError("initial.shape must be gaussian, box or stationary, got '" + shape + "'");
    }
    const double noise = c.get_double("initial.noise", 0.0);
    if (noise != 0.0) {
        const auto seed = static_cast<std::uint64_t>(c.get_int("cell.seed", 0));
        const auto row = static_cast<std::uint64_t>(c.get_int("cell.row", 0));
        const auto col = static_cast<std::uint64_t>(c.get_int("cell.col", 0));
        std::mt19937_64 rng(seed * 1000003ULL + row * 1009ULL + col);
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        for (std::size_t i = 0; i < u0.size(); ++i)
            u0[i] = std::max(0.0, u0[i] * (1.0 + noise * unif(rng)));
    }
    return u0;
}

DriftSpec build_drift(const Config& c, double p, double k, Case dc) {
    const std::string fam = c.get_string("drift.family", "constant");
    if (fam == "constant")
        return DriftSpec::constant(c.get_double("drift.value", 0.0));
    if (fam == "stationary")
        return (dc == Case::con1 ? stationary_pair_con1(p, k) : stationary_pair_con2(p, k)).drift;
    if (fam == "blowup") {
        const double alpha = c.get_double("drift.alpha");
        const double x_bar = c.get_double("drift.x_bar");
        const double eps = c.get_double("drift.epsilon", 0.1);
        if (dc == Case::con1)
            return blowup_drift_con1(alpha, c.get_double("drift.beta"), x_bar, eps, k, p);
        return blowup_drift_con2(alpha, x_bar, eps, k, p);
    }
    if (fam == "power_tail")
        return DriftSpec::power_tail(c.get_double("drift.amplitude", 1.0), c.get_double("drift.p", p));
    if (fam == "saturating")
        return DriftSpec::saturating(c.get_double("drift.amplitude", 1.0), c.get_double("drift.width", 1.0));
    if (fam == "table")
        return DriftSpec::load_table(c.get_string("drift.path"));
    throw ConfigError("unknown drift.family '" + fam + "'");
}

std::vector<DiagnosticRow> fit_rows(const RunReport& rep, double lo, double hi) {
    std::vector<DiagnosticRow> rows;
    for (std::size_t i = 0; i < rep.frames.times.size(); ++i) {
        const double t = rep.frames.times[i];
        if (t < lo || t > hi)
            continue;
        DiagnosticRow r;
        r.t = t;
        r.sup_norm = sup_norm(rep.frames.frames[i]);
        rows.push_back(r);
    }
    return rows;
}

std::string pad(const std::string& s, std::size_t w) { return s.size() >= w ? s : s + std::string(w - s.size(), ' '); }

std::string short_regime(Regime r) {
    switch (r) {
    case Regime::subcritical: return "sub";
    case Regime::critical: return "crit";
    case Regime::supercritical: return "super";
    }
    return "?";
}

std::string render(const SweepResult& res) {
    std::ostringstream out;
    out << "phase matrix (" << res.rows << " x " << res.cols << "), entries: observed [expected]\n\n";
    std::vector<std::vector<std::string>> table(res.rows + 1, std::vector<std::string>(res.cols + 1));
    table[0][0] = "p \\ col";
    for (std::size_t j = 0; j < res.cols; ++j)
        table[0][j + 1] = "col " + std::to_string(j);
    for (const auto& c : res.cells) {
        table[c.row + 1][0] = format_double(c.p);
        table[c.row + 1][c.col + 1] = to_string(c.observed) + " [" + short_regime(c.regime_expected) + "]";
    }
    std::vector<std::size_t> widths(res.cols + 1, 0);
    for (const auto& row : table)
        for (std::size_t j = 0; j < row.size(); ++j)
            widths[j] = std::max(widths[j], row[j].size());
    for (std::size_t i = 0; i < table.size(); ++i) {
        for (std::size_t j = 0; j < table[i].size(); ++j)
            out << (j ? " | " : "") << pad(table[i][j], widths[j]);
        out << '\n';
        if (i == 0) {
            for (std::size_t j = 0; j < widths.size(); ++j)
                out << (j ? "-+-" : "") << std::string(widths[j], '-');
            out << '\n';
        }
    }
    out << "\ncells:\n";
    for (const auto& c : res.cells) {
        out << "  " << pad(c.dir, 12) << " p=" << pad(format_double(c.p), 6) << " k=" << pad(format_double(c.k), 20)
            << ' ' << pad(to_string(c.regime_expected), 14) << pad(to_string(c.observed), 16)
            << " exponent=" << pad(format_double(c.decay_exponent), 22) << " status=" << c.status;
        if (!c.reason.empty())
            out << " (" << c.reason << ')';
        out << '\n';
    }
    return out.str();
}

std::string phase_table_csv(const SweepResult& res) {
    std::string text = "row,col,p,k,regime_expected,classification_observed,decay_exponent,status\n";
    for (const auto& c : res.cells)
        text += std::to_string(c.row) + ',' + std::to_string(c.col) + ',' + format_double(c.p) + ','
                + format_double(c.k) + ',' + to_string(c.regime_expected) + ',' + to_string(c.observed) + ','
                + format_double(c.decay_exponent) + ',' + c.status + '\n';
    return text;
}

std::string index_csv(const SweepResult& res) {
    std::string text = "row,col,p,k,regime_expected,classification_observed,decay_exponent,status,dir\n";
    for (const auto& c : res.cells)
        text += std::to_string(c.row) + ',' + std::to_string(c.col) + ',' + format_double(c.p) + ','
                + format_double(c.k) + ',' + to_string(c.regime_expected) + ',' + to_string(c.observed) + ','
                + format_double(c.decay_exponent) + ',' + c.status + ',' + c.dir + '\n';
    return text;
}

std::string cell_name(std::size_t row, std::size_t col) {
    std::ostringstream s;
    s << "cell_" << std::setw(2) << std::setfill('0') << row << '_' << std::setw(2) << std::setfill('0') << col;
    return s.str();
}

}  // namespace

std::string to_string(Regime r) {
    switch (r) {
    case Regime::subcritical: return "subcritical";
    case Regime::critical: return "critical";
    case Regime::supercritical: return "supercritical";
    }
    return "unknown";
}

std::string to_string(Observed o) {
    switch (o) {
    case Observed::global_nondecay: return "global_nondecay";
    case Observed::global_decay: return "global_decay";
    case Observed::blow_up: return "blow_up";
    case Observed::inconclusive: return "inconclusive";
    }
    return "unknown";
}

Regime regime_of(double p, double k, Case c) {
    const double crit = critic(p, c);
    if (std::abs(k - crit) <= 1e-9 * std::max(1.0, crit))
        return Regime::critical;
    return k < crit ? Regime::subcritical : Regime::supercritical;
}

SweepConfig SweepConfig::from_config(const Config& cfg) {
    SweepConfig s;
    s.drift_case = parse_case(cfg.get_string("sweep.case", "con1"));
    s.p_list = cfg.get_list("sweep.p_list");
    s.k_list = cfg.has("sweep.k_list") ? cfg.get_list("sweep.k_list") : std::vector<double>{};
    const std::string mode = cfg.get_string("sweep.k_mode", "offset");
    if (mode != "offset" && mode != "absolute")
        throw ConfigError("sweep.k_mode must be offset or absolute");
    s.k_offsets = mode == "offset";
    s.out = cfg.get_string("sweep.out", "runs");
    const long long jobs = cfg.get_int("sweep.jobs", 1);
    if (jobs < 1)
        throw ConfigError("sweep.jobs must be at least 1");
    s.jobs = static_cast<std::size_t>(jobs);
    const long long seed = cfg.get_int("sweep.seed", 0);
    if (seed < 0)
        throw ConfigError("sweep.seed must be nonnegative");
    s.seed = static_cast<std::uint64_t>(seed);
    s.resume = cfg.get_bool("sweep.resume", true);
    s.inject_failure = cfg.get_int("sweep.inject_failure", -1);
    for (double p : s.p_list)
        if (!(p >= 1.0))
            throw ConfigError("sweep.p_list entries must be >= 1");
    s.base = cfg;
    return s;
}

Config SweepConfig::cell_config(std::size_t row, std::size_t col) const {
    const double p = p_list.at(row);
    const double k = k_offsets ? critic(p, drift_case) + k_list.at(col) : k_list.at(col);
    const Regime r = regime_of(p, k, drift_case);
    const Config resolved = base.resolved(to_string(r));
    Config c;
    for (const auto& [key, v] : resolved.entries())
        if (key.rfind("sweep.", 0) != 0)
            c.set(key, v);
    c.set("cell.p", format_double(p));
    c.set("cell.k", format_double(k));
    c.set("cell.case", to_string(drift_case));
    c.set("cell.regime", to_string(r));
    c.set("cell.row", std::to_string(row));
    c.set("cell.col", std::to_string(col));
    c.set("cell.seed", std::to_string(seed));
    if (inject_failure >= 0 && static_cast<std::size_t>(inject_failure) == row * k_list.size() + col)
        c.set("fault.inject", "true");
    return c;
}

CellSetup build_cell(const Config& c) {
    CellSetup s;
    s.drift_case = parse_case(c.get_string("cell.case", "con1"));
    s.p = c.get_double("cell.p");
    const double k = c.get_double("cell.k");
    if (!(k > 0.0))
        throw InvalidArgument("cell.k must be positive");
    const long long n = c.get_int("grid.n", 1024);
    if (n < 3)
        throw ConfigError("grid.n must be at least 3");
    const Grid g(c.get_double("grid.L", 20.0), static_cast<std::size_t>(n));

    RunConfig& run = s.run;
    run.k = k;
    run.drift = build_drift(c, s.p, k, s.drift_case);
    run.u0 = initial_field(c, g, s.p, k, s.drift_case);
    run.t_max = c.get_double("solver.t_max", 10.0);
    run.theta = c.get_double("solver.theta", 0.5);
    run.cfl = c.get_double("solver.cfl", 0.9);
    run.dt_max = c.get_double("solver.dt_max", 0.0);
    run.dt_floor = c.get_double("solver.dt_floor", 1e-10);
    run.blowup_threshold = c.get_double("solver.blowup_factor", 1e3) * sup_norm(run.u0);
    run.diagnostics_stride = static_cast<std::size_t>(std::max<long long>(1, c.get_int("solver.stride", 100)));
    const std::string scheme = c.get_string("solver.scheme", "muscl");
    if (scheme == "muscl")
        run.scheme = AdvectionScheme::muscl;
    else if (scheme == "upwind")
        run.scheme = AdvectionScheme::upwind;
    else
        throw ConfigError("solver.scheme must be muscl or upwind");

    s.fit_t_lo = c.get_double("fit.t_lo", std::min(1.0, run.t_max));
    s.fit_t_hi = c.get_double("fit.t_hi", run.t_max);
    if (!(s.fit_t_lo > 0.0) || !(s.fit_t_hi > s.fit_t_lo))
        throw ConfigError("fit window needs 0 < fit.t_lo < fit.t_hi");

    // Log-spaced frames cover the fit window.
    const double per_decade = c.get_double("solver.record_per_decade", 10.0);
    const double t_lo = c.get_double("solver.record_t_min", s.fit_t_lo);
    if (per_decade > 0.0 && t_lo > 0.0 && t_lo < run.t_max) {
        const auto count = static_cast<std::size_t>(std::ceil(per_decade * std::log10(run.t_max / t_lo)));
        for (std::size_t i = 0; i <= count; ++i)
            run.record_times.push_back(t_lo * std::pow(run.t_max / t_lo, static_cast<double>(i) / count));
    }

    Thresholds& th = s.thresholds;
    th.decay_lo = c.get_double("classify.decay_lo", th.decay_lo);
    th.decay_hi = c.get_double("classify.decay_hi", th.decay_hi);
    th.flat_lo = c.get_double("classify.flat_lo", th.flat_lo);
    th.flat_hi = c.get_double("classify.flat_hi", th.flat_hi);
    th.bounded_factor = c.get_double("classify.bounded_factor", th.bounded_factor);
    run.validate();
    return s;
}

Observed classify(const RunReport& rep, double exponent, const Thresholds& th) {
    if (rep.classification != Classification::completed)
        return Observed::blow_up;
    if (std::isnan(exponent))
        return Observed::inconclusive;
    if (exponent >= th.decay_lo && exponent <= th.decay_hi)
        return Observed::global_decay;
    if (exponent > th.flat_lo && exponent <= th.flat_hi) {
        double sup_max = 0.0;
        for (const auto& r : rep.series)
            sup_max = std::max(sup_max, r.sup_norm);
        const double sup0 = rep.series.empty() ? 0.0 : rep.series.front().sup_norm;
        if (sup_max <= th.bounded_factor * sup0)
            return Observed::global_nondecay;
    }
    return Observed::inconclusive;
}

PhaseCell run_cell(const Config& c, const fs::path& dir) {
    PhaseCell cell;
    cell.dir = dir.filename().string();
    cell.decay_exponent = std::nan("");
    KeyValues kv;
    std::vector<DiagnosticRow> series;
    try {
        cell.row = static_cast<std::size_t>(c.get_int("cell.row", 0));
        cell.col = static_cast<std::size_t>(c.get_int("cell.col", 0));
        cell.p = c.get_double("cell.p");
        cell.k = c.get_double("cell.k");
        const Case dc = parse_case(c.get_string("cell.case", "con1"));
        cell.regime_expected = regime_of(cell.p, cell.k, dc);
        kv["case"] = to_string(dc);
    } catch (const std::exception& e) {
        cell.status = "failed";
        cell.reason = one_line(e.what());
    }

    if (cell.status == "ok") {
        try {
            fs::create_directories(dir);
            write_text_atomic(dir / "config.ini", c.to_ini());
        } catch (const std::exception& e) {
            cell.status = "failed";
            cell.reason = one_line(e.what());
        }
    }

    std::optional<CellSetup> setup;
    if (cell.status == "ok") {
        try {
            setup = build_cell(c);
        } catch (const InvalidArgument& e) {
            cell.status = "skipped";
            cell.reason = one_line(e.what());
        } catch (const std::exception& e) {
            cell.status = "failed";
            cell.reason = one_line(e.what());
        }
    }

    if (setup) {
        try {
            if (c.get_bool("fault.inject", false))
                throw SolverFault("injected failure", 0.0, 0);
            const RunReport rep = solve(setup->run);
            series = rep.series;
            const auto rows = fit_rows(rep, setup->fit_t_lo, setup->fit_t_hi);
            if (rep.classification == Classification::completed && rows.size() >= 3)
                cell.decay_exponent = decay_fit_physical(rows, setup->fit_t_lo, setup->fit_t_hi);
            cell.observed = classify(rep, cell.decay_exponent, setup->thresholds);

            double sup_max = 0.0;
            for (const auto& r : rep.series)
                sup_max = std::max(sup_max, r.sup_norm);
            kv["solver_classification"] = to_string(rep.classification);
            kv["last_resolved_time"] = format_double(rep.last_resolved_time);
            kv["domain_too_small"] = rep.domain_too_small ? "true" : "false";
            kv["sup_initial"] = format_double(rep.series.front().sup_norm);
            kv["sup_max"] = format_double(sup_max);
            kv["sup_final"] = format_double(rep.series.back().sup_norm);
            kv["mass_initial"] = format_double(rep.initial_mass);
            kv["mass_final"] = format_double(rep.series.back().mass);
            kv["steps"] = std::to_string(rep.terminal.step_count);
            kv["theta_fallbacks"] = std::to_string(rep.terminal.theta_fallbacks);
            kv["clamp_mass"] = format_double(rep.terminal.clamp_mass);
            kv["fit_t_lo"] = format_double(setup->fit_t_lo);
            kv["fit_t_hi"] = format_double(setup->fit_t_hi);
            kv["fit_points"] = std::to_string(rows.size());
        } catch (const std::exception& e) {
            cell.status = "failed";
            cell.reason = one_line(e.what());
            cell.observed = Observed::inconclusive;
        }
    }

    kv["row"] = std::to_string(cell.row);
    kv["col"] = std::to_string(cell.col);
    kv["p"] = format_double(cell.p);
    kv["k"] = format_double(cell.k);
    kv["regime_expected"] = to_string(cell.regime_expected);
    kv["classification_observed"] = to_string(cell.observed);
    kv["decay_exponent"] = format_double(cell.decay_exponent);
    kv["status"] = cell.status;
    kv["reason"] = cell.reason;
    kv["series"] = "series.csv";
    try {
        fs::create_directories(dir);
        write_series_csv(dir / "series.csv", series);
        write_key_values(dir / "report.txt", kv);
    } catch (const std::exception& e) {
        cell.status = "failed";
        cell.reason = one_line(e.what());
    }
    return cell;
}

PhaseCell read_cell(const fs::path& dir) {
    const KeyValues kv = read_key_values(dir / "report.txt");
    auto get = [&](const std::string& key) {
        const auto it = kv.find(key);
        if (it == kv.end())
            throw ConfigError((dir / "report.txt").string() + ": missing key '" + key + "'");
        return it->second;
    };
    PhaseCell c;
    c.row = static_cast<std::size_t>(parse_double(get("row")));
    c.col = static_cast<std::size_t>(parse_double(get("col")));
    c.p = parse_double(get("p"));
    c.k = parse_double(get("k"));
    c.regime_expected = parse_regime(get("regime_expected"));
    c.observed = parse_observed(get("classification_observed"));
    c.decay_exponent = parse_double(get("decay_exponent"));
    c.status = get("status");
    c.reason = get("reason");
    c.dir = dir.filename().string();
    return c;
}

SweepResult run_sweep(const SweepConfig& cfg) {
    SweepResult res;
    res.rows = cfg.k_list.empty() ? 0 : cfg.p_list.size();
    res.cols = cfg.k_list.size();
    res.cells.resize(res.rows * res.cols);
    fs::create_directories(cfg.out);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t idx = next++; idx < res.cells.size(); idx = next++) {
            const std::size_t row = idx / res.cols, col = idx % res.cols;
            const fs::path dir = cfg.out / cell_name(row, col);
            PhaseCell cell;
            try {
                const Config cc = cfg.cell_config(row, col);
                bool reused = false;
                if (cfg.resume && fs::is_regular_file(dir / "report.txt") && fs::is_regular_file(dir / "config.ini")
                    && read_text(dir / "config.ini") == cc.to_ini()) {
                    cell = read_cell(dir);
                    reused = cell.status == "ok";
                }
                if (!reused)
                    cell = run_cell(cc, dir);
            } catch (const std::exception& e) {
                cell = PhaseCell{};
                cell.p = cfg.p_list[row];
                cell.decay_exponent = std::nan("");
                cell.status = "skipped";
                cell.reason = one_line(e.what());
                cell.dir = dir.filename().string();
            }
            cell.row = row;
            cell.col = col;
            res.cells[idx] = std::move(cell);
        }
    };
    const std::size_t width = std::max<std::size_t>(1, std::min(cfg.jobs, res.cells.size()));
    std::vector<std::thread> pool;
    for (std::size_t i = 1; i < width; ++i)
        pool.emplace_back(worker);
    worker();
    for (auto& t : pool)
        t.join();

    write_text_atomic(cfg.out / "index.csv", index_csv(res));
    write_text_atomic(cfg.out / "summary.txt", render(res));
    return res;
}

SweepResult read_sweep(const fs::path& dir) {
    std::istringstream in(read_text(dir / "index.csv"));
    std::string line;
    std::getline(in, line);
    SweepResult res;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        const std::string name = line.substr(line.rfind(',') + 1);
        PhaseCell c = read_cell(dir / name);
        res.rows = std::max(res.rows, c.row + 1);
        res.cols = std::max(res.cols, c.col + 1);
        res.cells.push_back(std::move(c));
    }
    return res;
}

std::string render_report(const fs::path& dir) {
    if (!fs::is_directory(dir))
        throw ConfigError("run directory not found: " + dir.string());
    SweepResult res;
    if (fs::is_regular_file(dir / "index.csv")) {
        res = read_sweep(dir);
    } else if (fs::is_regular_file(dir / "report.txt")) {
        PhaseCell c = read_cell(dir);
        c.row = 0;
        c.col = 0;
        res.rows = res.cols = 1;
        res.cells.push_back(std::move(c));
    } else {
        throw ConfigError("no index.csv or report.txt in " + dir.string());
    }
    write_text_atomic(dir / "phase_table.csv", phase_table_csv(res));
    return render(res);
}

}  // namespace critlab
