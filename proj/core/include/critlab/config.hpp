#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace critlab {

// Flattened INI: key "section.key". Sections named "<regime>.<section>"
// override "<section>" when resolved for that regime.
class Config {
  public:
    Config() = default;
    static Config parse(const std::string& text);
    static Config load(const std::filesystem::path& path);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    long long get_int(const std::string& key, long long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    // Comma-separated numbers; "inf" accepted.
    std::vector<double> get_list(const std::string& key) const;

    void set(const std::string& key, const std::string& value);
    // Copy with "<prefix>.<section>.<key>" entries folded onto "<section>.<key>".
    Config resolved(const std::string& prefix) const;

    const std::map<std::string, std::string>& entries() const noexcept { return values_; }
    // Back to INI text, sections in key order.
    std::string to_ini() const;

  private:
    std::map<std::string, std::string> values_;
};

}  // namespace critlab
