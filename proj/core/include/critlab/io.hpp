#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "critlab/solver.hpp"

namespace critlab {

// Shortest decimal that round-trips; "inf", "-inf", "nan" otherwise.
std::string format_double(double v);
double parse_double(const std::string& s);

using KeyValues = std::map<std::string, std::string>;

// Series CSV: t,sup_norm,l2_norm,mass,energy,boundary_flux
void write_series_csv(const std::filesystem::path& path, std::span<const DiagnosticRow> rows);
std::vector<DiagnosticRow> read_series_csv(const std::filesystem::path& path);

// key=value per line in key order; '#' starts a comment line.
void write_key_values(const std::filesystem::path& path, const KeyValues& kv);
KeyValues read_key_values(const std::filesystem::path& path);

// Writes through a temporary file and renames, so readers never see a
// half-written artifact.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace critlab
