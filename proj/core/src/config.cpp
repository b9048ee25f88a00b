#include "critlab/config.hpp"

#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "critlab/errors.hpp"
#include "critlab/io.hpp"

namespace critlab {

Config Config::parse(const std::string& text) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    Config c;
    for (const auto& [section, body] : tree) {
        if (body.empty()) {
            c.values_[section] = body.data();
            continue;
        }
        for (const auto& [key, leaf] : body)
            c.values_[section + "." + key] = leaf.data();
    }
    return c;
}

Config Config::load(const std::filesystem::path& path) {
    if (!std::filesystem::is_regular_file(path))
        throw ConfigError("config file not found: " + path.string());
    return parse(read_text(path));
}

bool Config::has(const std::string& key) const { return values_.count(key) != 0; }

std::string Config::get_string(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end())
        throw ConfigError("config: missing key '" + key + "'");
    return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key) const {
    try {
        return parse_double(get_string(key));
    } catch (const ConfigError& e) {
        throw ConfigError("config: key '" + key + "': " + e.what());
    }
}

double Config::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

long long Config::get_int(const std::string& key, long long fallback) const {
    if (!has(key))
        return fallback;
    const double v = get_double(key);
    if (v != static_cast<double>(static_cast<long long>(v)))
        throw ConfigError("config: key '" + key + "' must be an integer");
    return static_cast<long long>(v);
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    if (!has(key))
        return fallback;
    const std::string v = get_string(key);
    if (v == "true" || v == "1" || v == "yes")
        return true;
    if (v == "false" || v == "0" || v == "no")
        return false;
    throw ConfigError("config: key '" + key + "' must be a boolean");
}

std::vector<double> Config::get_list(const std::string& key) const {
    std::vector<double> out;
    std::istringstream in(get_string(key));
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.find_first_not_of(" \t") == std::string::npos)
            continue;
        try {
            out.push_back(parse_double(item));
        } catch (const ConfigError& e) {
            throw ConfigError("config: key '" + key + "': " + e.what());
        }
    }
    return out;
}

void Config::set(const std::string& key, const std::string& value) { values_[key] = value; }

Config Config::resolved(const std::string& prefix) const {
    Config out;
    const std::string head = prefix + ".";
    for (const auto& [k, v] : values_) {
        // Sections of other regimes are dropped from the copy.
        const auto dot = k.find('.');
        const auto second = dot == std::string::npos ? std::string::npos : k.find('.', dot + 1);
        if (second != std::string::npos && k.compare(0, head.size(), head) != 0) {
            const std::string first = k.substr(0, dot);
            if (first == "subcritical" || first == "critical" || first == "supercritical")
                continue;
        }
        if (k.compare(0, head.size(), head) != 0)
            out.values_.emplace(k, v);
    }
    for (const auto& [k, v] : values_)
        if (k.compare(0, head.size(), head) == 0)
            out.values_[k.substr(head.size())] = v;
    return out;
}

std::string Config::to_ini() const {
    std::string text;
    for (const auto& [k, v] : values_)
        if (k.find('.') == std::string::npos)
            text += k + " = " + v + "\n";
    std::string current;
    for (const auto& [k, v] : values_) {
        const auto dot = k.rfind('.');
        if (dot == std::string::npos)
            continue;
        const std::string section = k.substr(0, dot);
        if (section != current) {
            text += (text.empty() ? "[" : "\n[") + section + "]\n";
            current = section;
        }
        text += k.substr(dot + 1) + " = " + v + "\n";
    }
    return text;
}

}  // namespace critlab
