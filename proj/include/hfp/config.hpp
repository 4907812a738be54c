#pragma once

// Flat "key = value" text files. Blank lines and '#' comments are skipped;
// keys may repeat (the caller decides what repetition means).

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hfp/error.hpp"
#include "hfp/pipeline.hpp"

namespace hfp {

struct KeyValue {
    std::string key;
    std::string value;
    std::size_t line = 0;
};

namespace detail {

inline std::string_view trim(std::string_view s) noexcept {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

inline std::string where(const KeyValue& kv) { return "line " + std::to_string(kv.line) + " (" + kv.key + "): "; }

} // namespace detail

inline std::vector<KeyValue> parse_key_values(std::istream& in) {
    std::vector<KeyValue> out;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected key = value");
        KeyValue kv{std::string(detail::trim(line.substr(0, eq))), std::string(detail::trim(line.substr(eq + 1))), line_no};
        if (kv.key.empty()) throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": empty key");
        out.push_back(std::move(kv));
    }
    return out;
}

inline std::vector<KeyValue> parse_key_values(const std::string& text) {
    std::istringstream in(text);
    return parse_key_values(in);
}

inline std::vector<KeyValue> read_key_value_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
    return parse_key_values(in);
}

inline double parse_double(std::string_view text, const std::string& context = {}) {
    text = detail::trim(text);
    // from_chars for double is available in libstdc++ 11
    double v = 0.0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end || !std::isfinite(v)) throw Error(ErrorCode::ParseError, context + "not a finite number: '" + std::string(text) + "'");
    return v;
}

inline std::size_t parse_size(std::string_view text, const std::string& context = {}) {
    text = detail::trim(text);
    std::size_t v = 0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end) throw Error(ErrorCode::ParseError, context + "not a non-negative integer: '" + std::string(text) + "'");
    return v;
}

inline bool parse_bool(std::string_view text, const std::string& context = {}) {
    text = detail::trim(text);
    if (text == "1" || text == "true" || text == "on" || text == "yes") return true;
    if (text == "0" || text == "false" || text == "off" || text == "no") return false;
    throw Error(ErrorCode::ParseError, context + "not a boolean: '" + std::string(text) + "'");
}

inline Resolver parse_resolver(std::string_view text) {
    text = detail::trim(text);
    if (text == "match") return Resolver::Match;
    if (text == "bezout") return Resolver::Bezout;
    throw Error(ErrorCode::ParseError, "resolver must be match or bezout, got '" + std::string(text) + "'");
}

inline const char* to_string(Resolver r) noexcept { return r == Resolver::Bezout ? "bezout" : "match"; }

inline LengthPolicy parse_length_policy(std::string_view text) {
    text = detail::trim(text);
    if (text == "max_feasible") return LengthPolicy::MaxFeasible;
    if (text == "budget") return LengthPolicy::Budget;
    throw Error(ErrorCode::ParseError, "length_policy must be max_feasible or budget, got '" + std::string(text) + "'");
}

inline const char* to_string(LengthPolicy p) noexcept { return p == LengthPolicy::Budget ? "budget" : "max_feasible"; }

/// Sets one HybridConfig field by its name. Returns false for unknown keys.
inline bool apply_config_key(HybridConfig& cfg, const std::string& key, const std::string& value) {
    const std::string ctx = key + ": ";
    if (key == "u") cfg.u = parse_size(value, ctx);
    else if (key == "s") cfg.s = parse_size(value, ctx);
    else if (key == "M") cfg.M = parse_size(value, ctx);
    else if (key == "n") cfg.n = parse_size(value, ctx);
    else if (key == "length_policy") cfg.length_policy = parse_length_policy(value);
    else if (key == "threshold") cfg.threshold = parse_double(value, ctx);
    else if (key == "resolver") cfg.resolver = parse_resolver(value);
    else if (key == "sigma_rel_tol") cfg.prony.sigma_rel_tol = parse_double(value, ctx);
    else if (key == "extra_terms") cfg.prony.extra_terms = parse_size(value, ctx);
    else if (key == "delta") cfg.prony.delta = parse_double(value, ctx);
    else if (key == "M_rows") cfg.prony.M_rows = parse_size(value, ctx);
    else if (key == "noise_gate") cfg.prony.noise_gate = parse_double(value, ctx);
    else if (key == "wrap") cfg.wrap = parse_bool(value, ctx);
    else if (key == "shortcut_shifted") cfg.shortcut_shifted = parse_bool(value, ctx);
    else if (key == "refine_bins") cfg.refine_bins = parse_bool(value, ctx);
    else if (key == "merge_tol_hz") cfg.merge_tol_hz = parse_double(value, ctx);
    else if (key == "match_tol_hz") cfg.match_tol_hz = parse_double(value, ctx);
    else if (key == "ambiguity_factor") cfg.ambiguity_factor = parse_double(value, ctx);
    else if (key == "threads") cfg.threads = parse_size(value, ctx);
    else return false;
    return true;
}

inline HybridConfig parse_hybrid_config(const std::vector<KeyValue>& kvs, HybridConfig cfg = {}) {
    for (const auto& kv : kvs) {
        if (!apply_config_key(cfg, kv.key, kv.value)) throw Error(ErrorCode::ParseError, detail::where(kv) + "unknown config key");
    }
    return cfg;
}

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Inverse of parse_hybrid_config; every field, one per line.
inline std::string to_text(const HybridConfig& cfg) {
    std::ostringstream os;
    os << "u = " << cfg.u << '\n'
       << "s = " << cfg.s << '\n'
       << "M = " << cfg.M << '\n'
       << "n = " << cfg.n << '\n'
       << "length_policy = " << to_string(cfg.length_policy) << '\n'
       << "threshold = " << format_double(cfg.threshold) << '\n'
       << "resolver = " << to_string(cfg.resolver) << '\n'
       << "sigma_rel_tol = " << format_double(cfg.prony.sigma_rel_tol) << '\n'
       << "extra_terms = " << cfg.prony.extra_terms << '\n'
       << "delta = " << format_double(cfg.prony.delta) << '\n'
       << "M_rows = " << cfg.prony.M_rows << '\n'
       << "noise_gate = " << format_double(cfg.prony.noise_gate) << '\n'
       << "wrap = " << (cfg.wrap ? "true" : "false") << '\n'
       << "shortcut_shifted = " << (cfg.shortcut_shifted ? "true" : "false") << '\n'
       << "refine_bins = " << (cfg.refine_bins ? "true" : "false") << '\n'
       << "merge_tol_hz = " << format_double(cfg.merge_tol_hz) << '\n'
       << "match_tol_hz = " << format_double(cfg.match_tol_hz) << '\n'
       << "ambiguity_factor = " << format_double(cfg.ambiguity_factor) << '\n';
    return os.str();
}

} // namespace hfp
