#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "brw/lattice.hpp"

namespace brw {

// Configuration / usage errors; the CLI maps these to its config exit code.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// Parses "(x,y)" starting at pos (whitespace-tolerant); advances pos past it.
inline Site2 parse_site_at(const std::string& text, std::size_t& pos, const std::string& ctx) {
    auto fail = [&] { throw ConfigError(ctx + ": malformed site in '" + text + "'"); };
    auto skip_ws = [&] {
        while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
    };
    auto expect = [&](char c) {
        skip_ws();
        if (pos >= text.size() || text[pos] != c) fail();
        ++pos;
    };
    auto parse_int = [&]() -> std::int32_t {
        skip_ws();
        std::size_t start = pos;
        if (pos < text.size() && (text[pos] == '-' || text[pos] == '+')) ++pos;
        while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
        std::int32_t value = 0;
        auto res = std::from_chars(text.data() + start, text.data() + pos, value);
        if (res.ec != std::errc{} || res.ptr != text.data() + pos || pos == start) fail();
        return value;
    };
    expect('(');
    const std::int32_t x = parse_int();
    expect(',');
    const std::int32_t y = parse_int();
    expect(')');
    return {x, y};
}

} // namespace detail

// Flat key=value configuration.  Files use one `key = value` per line, `#`
// starts a comment, blank lines are ignored; duplicate keys in one file are
// an error.  Command-line flags overlay file values via set().
class Config {
  public:
    Config() = default;

    static Config parse_string(const std::string& text, const std::string& origin = "<string>") {
        Config cfg;
        std::istringstream in(text);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const std::size_t hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            line = detail::trim(line);
            if (line.empty()) continue;
            const std::size_t eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
            const std::string key = detail::trim(line.substr(0, eq));
            const std::string value = detail::trim(line.substr(eq + 1));
            if (key.empty())
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
            if (cfg.values_.count(key))
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key +
                                  "'");
            cfg.values_[key] = value;
        }
        return cfg;
    }

    static Config parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file '" + path + "'");
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse_string(buf.str(), path);
    }

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    bool has(const std::string& key) const { return values_.count(key) != 0; }

    // Rejects any key outside the given schema (catches typos early).
    void require_known(const std::set<std::string>& known) const {
        for (const auto& [key, value] : values_) {
            (void)value;
            if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
        }
    }

    std::string get_string(const std::string& key) const { return raw(key); }
    std::string get_string(const std::string& key, const std::string& def) const {
        return has(key) ? raw(key) : def;
    }

    std::int64_t get_int(const std::string& key) const { return parse_int(key, raw(key)); }
    std::int64_t get_int(const std::string& key, std::int64_t def) const {
        return has(key) ? parse_int(key, raw(key)) : def;
    }

    std::uint64_t get_uint(const std::string& key) const { return parse_uint(key, raw(key)); }
    std::uint64_t get_uint(const std::string& key, std::uint64_t def) const {
        return has(key) ? parse_uint(key, raw(key)) : def;
    }

    double get_double(const std::string& key) const { return parse_double(key, raw(key)); }
    double get_double(const std::string& key, double def) const {
        return has(key) ? parse_double(key, raw(key)) : def;
    }

    bool get_bool(const std::string& key) const { return parse_bool(key, raw(key)); }
    bool get_bool(const std::string& key, bool def) const {
        return has(key) ? parse_bool(key, raw(key)) : def;
    }

    // Semicolon-separated site list: "(0,0);(1,2);(-3,4)".
    std::vector<Site2> get_sites(const std::string& key) const {
        const std::string text = raw(key);
        std::vector<Site2> out;
        std::size_t pos = 0;
        while (true) {
            out.push_back(detail::parse_site_at(text, pos, "key '" + key + "'"));
            while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
            if (pos == text.size()) break;
            if (text[pos] != ';') throw ConfigError("key '" + key + "': expected ';' in '" + text + "'");
            ++pos;
        }
        return out;
    }

    // Semicolon-separated ordered pairs: "(0,0)->(0,2);(1,0)->(1,2)".
    std::vector<std::pair<Site2, Site2>> get_site_pairs(const std::string& key) const {
        const std::string text = raw(key);
        std::vector<std::pair<Site2, Site2>> out;
        std::size_t pos = 0;
        const std::string ctx = "key '" + key + "'";
        auto skip_ws = [&] {
            while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
        };
        while (true) {
            const Site2 a = detail::parse_site_at(text, pos, ctx);
            skip_ws();
            if (pos + 1 >= text.size() || text[pos] != '-' || text[pos + 1] != '>')
                throw ConfigError(ctx + ": expected '->' in '" + text + "'");
            pos += 2;
            const Site2 b = detail::parse_site_at(text, pos, ctx);
            out.emplace_back(a, b);
            skip_ws();
            if (pos == text.size()) break;
            if (text[pos] != ';') throw ConfigError(ctx + ": expected ';' in '" + text + "'");
            ++pos;
        }
        return out;
    }

    // Sorted view of all entries, for echoing the resolved configuration.
    const std::map<std::string, std::string>& items() const { return values_; }

  private:
    std::map<std::string, std::string> values_;

    const std::string& raw(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw ConfigError("missing required config key '" + key + "'");
        return it->second;
    }

    static std::int64_t parse_int(const std::string& key, const std::string& v) {
        std::int64_t out = 0;
        auto res = std::from_chars(v.data(), v.data() + v.size(), out);
        if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
            throw ConfigError("key '" + key + "': expected integer, got '" + v + "'");
        return out;
    }

    static std::uint64_t parse_uint(const std::string& key, const std::string& v) {
        std::uint64_t out = 0;
        auto res = std::from_chars(v.data(), v.data() + v.size(), out);
        if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
            throw ConfigError("key '" + key + "': expected non-negative integer, got '" + v + "'");
        return out;
    }

    static double parse_double(const std::string& key, const std::string& v) {
        double out = 0.0;
        auto res = std::from_chars(v.data(), v.data() + v.size(), out);
        if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
            throw ConfigError("key '" + key + "': expected number, got '" + v + "'");
        return out;
    }

    static bool parse_bool(const std::string& key, const std::string& v) {
        if (v == "true" || v == "1") return true;
        if (v == "false" || v == "0") return false;
        throw ConfigError("key '" + key + "': expected true/false, got '" + v + "'");
    }
};

} // namespace brw
