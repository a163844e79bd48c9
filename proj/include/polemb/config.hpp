#pragma once

// Flat INI-style config. Section headers prefix keys ("embed.dim"), values
// are untyped strings until a getter asks for a type. Later files never
// silently shadow earlier keys: a duplicate is an error.

#include <cctype>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "common.hpp"

namespace polemb {

class Config {
public:
    Config() = default;

    // Parses "[section]" headers, "key = value" pairs, '#'/';' comments.
    // Keys outside any section stay unprefixed.
    static Config parse(std::string_view text, const std::string& origin = "<config>") {
        Config cfg;
        std::string section;
        std::size_t lineno = 0;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            std::size_t eol = text.find('\n', pos);
            if (eol == std::string_view::npos) eol = text.size();
            std::string_view line = trim(text.substr(pos, eol - pos));
            pos = eol + 1;
            ++lineno;
            if (line.empty() || line.front() == '#' || line.front() == ';') continue;
            if (line.front() == '[') {
                if (line.back() != ']' || line.size() < 3)
                    throw ConfigError(origin + ":" + std::to_string(lineno) + ": malformed section header");
                section = std::string(trim(line.substr(1, line.size() - 2)));
                if (section.empty())
                    throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty section name");
                cfg.note_section(section);
                continue;
            }
            std::size_t eq = line.find('=');
            if (eq == std::string_view::npos)
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
            std::string key(trim(line.substr(0, eq)));
            std::string value(trim(line.substr(eq + 1)));
            if (key.empty())
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
            std::string full = section.empty() ? key : section + "." + key;
            if (cfg.values_.count(full))
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + full + "'");
            cfg.values_[full] = value;
            cfg.order_.push_back(full);
        }
        return cfg;
    }

    static Config load(const std::string& path) { return parse(read_file(path), path); }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    // Typed getters. The default-taking forms fall back when the key is
    // absent; a present-but-malformed value is always an error.
    std::string get_string(const std::string& key, const std::string& def) const {
        auto it = values_.find(key);
        return it == values_.end() ? def : it->second;
    }

    std::string require_string(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw ConfigError("missing required config key '" + key + "'");
        return it->second;
    }

    std::int64_t get_int(const std::string& key, std::int64_t def) const {
        auto it = values_.find(key);
        return it == values_.end() ? def : to_int(key, it->second);
    }

    std::int64_t require_int(const std::string& key) const { return to_int(key, require_string(key)); }

    std::uint64_t get_uint(const std::string& key, std::uint64_t def) const {
        auto it = values_.find(key);
        return it == values_.end() ? def : to_uint(key, it->second);
    }

    std::uint64_t require_uint(const std::string& key) const { return to_uint(key, require_string(key)); }

    double get_double(const std::string& key, double def) const {
        auto it = values_.find(key);
        return it == values_.end() ? def : to_double(key, it->second);
    }

    double require_double(const std::string& key) const { return to_double(key, require_string(key)); }

    bool get_bool(const std::string& key, bool def) const {
        auto it = values_.find(key);
        return it == values_.end() ? def : to_bool(key, it->second);
    }

    bool require_bool(const std::string& key) const { return to_bool(key, require_string(key)); }

    // Section names in file order (first appearance).
    const std::vector<std::string>& sections() const { return sections_; }

    // Sections whose name starts with prefix, file order. "synth.region."
    // finds the per-region blocks.
    std::vector<std::string> sections_with_prefix(const std::string& prefix) const {
        std::vector<std::string> out;
        for (const auto& s : sections_)
            if (s.size() >= prefix.size() && s.compare(0, prefix.size(), prefix) == 0) out.push_back(s);
        return out;
    }

    // Full key list in file order, for manifest snapshots.
    const std::vector<std::string>& keys() const { return order_; }

    // Keys under "section." with the prefix stripped.
    std::vector<std::string> keys_in(const std::string& section) const {
        std::string prefix = section + ".";
        std::vector<std::string> out;
        for (const auto& k : order_)
            if (k.size() > prefix.size() && k.compare(0, prefix.size(), prefix) == 0)
                out.push_back(k.substr(prefix.size()));
        return out;
    }

    // Overrides an existing value or inserts a new one (CLI flags win).
    void set(const std::string& key, const std::string& value) {
        if (!values_.count(key)) order_.push_back(key);
        values_[key] = value;
    }

    // Round-trips to the parseable format, keys in file order.
    std::string snapshot() const {
        std::string out;
        for (const auto& k : order_) {
            out += k;
            out += " = ";
            out += values_.at(k);
            out += '\n';
        }
        return out;
    }

private:
    void note_section(const std::string& s) {
        for (const auto& seen : sections_)
            if (seen == s) return;
        sections_.push_back(s);
    }

    static std::int64_t to_int(const std::string& key, const std::string& v) {
        std::int64_t out;
        if (!parse_i64(v, out)) throw ConfigError("config key '" + key + "': expected integer, got '" + v + "'");
        return out;
    }

    static std::uint64_t to_uint(const std::string& key, const std::string& v) {
        std::uint64_t out;
        if (!parse_u64(v, out)) throw ConfigError("config key '" + key + "': expected unsigned integer, got '" + v + "'");
        return out;
    }

    static double to_double(const std::string& key, const std::string& v) {
        double out;
        if (!parse_double(v, out)) throw ConfigError("config key '" + key + "': expected number, got '" + v + "'");
        return out;
    }

    static bool to_bool(const std::string& key, const std::string& v) {
        std::string low;
        low.reserve(v.size());
        for (char c : v) low += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (low == "true" || low == "1" || low == "yes" || low == "on") return true;
        if (low == "false" || low == "0" || low == "no" || low == "off") return false;
        throw ConfigError("config key '" + key + "': expected boolean, got '" + v + "'");
    }

    std::map<std::string, std::string> values_;
    std::vector<std::string> order_;    // insertion order of keys
    std::vector<std::string> sections_; // first-appearance order
};

}  // namespace polemb
