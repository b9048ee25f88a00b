#include "critlab/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "critlab/errors.hpp"

namespace critlab {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, sep))
        out.push_back(trim(cell));
    if (!line.empty() && line.back() == sep)
        out.emplace_back();
    return out;
}

const char* const series_header = "t,sup_norm,l2_norm,mass,energy,boundary_flux";

}  // namespace

std::string format_double(double v) {
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

double parse_double(const std::string& raw) {
    const std::string s = trim(raw);
    if (s == "inf" || s == "+inf" || s == "infinity")
        return HUGE_VAL;
    if (s == "-inf")
        return -HUGE_VAL;
    if (s == "nan")
        return std::nan("");
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size() || s.empty())
        throw ConfigError("not a number: '" + s + "'");
    return v;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot write " + tmp.string());
        out << text;
        if (!out)
            throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_series_csv(const std::filesystem::path& path, std::span<const DiagnosticRow> rows) {
    std::string text = series_header;
    text += '\n';
    for (const auto& r : rows) {
        for (double v : {r.t, r.sup_norm, r.l2_norm, r.mass, r.energy}) {
            text += format_double(v);
            text += ',';
        }
        text += format_double(r.boundary_flux);
        text += '\n';
    }
    write_text_atomic(path, text);
}

std::vector<DiagnosticRow> read_series_csv(const std::filesystem::path& path) {
    std::istringstream in(read_text(path));
    std::string line;
    if (!std::getline(in, line) || trim(line) != series_header)
        throw ConfigError(path.string() + ": expected header '" + series_header + "'");
    std::vector<DiagnosticRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty())
            continue;
        const auto cells = split(line, ',');
        if (cells.size() != 6)
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected 6 columns");
        DiagnosticRow r;
        r.t = parse_double(cells[0]);
        r.sup_norm = parse_double(cells[1]);
        r.l2_norm = parse_double(cells[2]);
        r.mass = parse_double(cells[3]);
        r.energy = parse_double(cells[4]);
        r.boundary_flux = parse_double(cells[5]);
        rows.push_back(r);
    }
    return rows;
}

void write_key_values(const std::filesystem::path& path, const KeyValues& kv) {
    std::string text;
    for (const auto& [k, v] : kv) {
        if (k.find('=') != std::string::npos || k.find('\n') != std::string::npos || v.find('\n') != std::string::npos)
            throw InvalidArgument("key-value entries may not contain '=' in keys or newlines");
        text += k + '=' + v + '\n';
    }
    write_text_atomic(path, text);
}

KeyValues read_key_values(const std::filesystem::path& path) {
    std::istringstream in(read_text(path));
    KeyValues kv;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty() || trim(line)[0] == '#')
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path.string() + ": line without '=': " + line);
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

}  // namespace critlab
