#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mrl/diagnostics.hpp"
#include "mrl/errors.hpp"
#include "mrl/grid.hpp"
#include "mrl/hurst.hpp"
#include "mrl/noise.hpp"
#include "mrl/report.hpp"

namespace mrl {

// Flat key-value config: one `key = value` per line, dotted section names,
// `#` comments. Parsing is strict: unknown or duplicate keys are errors that
// name the offending key, never silently ignored.
class Config {
  public:
    static Config parse_string(const std::string& text) {
        Config cfg;
        std::istringstream in(text);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const std::string stripped = trim(strip_comment(line));
            if (stripped.empty()) continue;
            const auto eq = stripped.find('=');
            if (eq == std::string::npos)
                throw ConfigError("line " + std::to_string(lineno),
                                  "expected 'key = value'");
            const std::string key = trim(stripped.substr(0, eq));
            const std::string value = trim(stripped.substr(eq + 1));
            if (key.empty())
                throw ConfigError("line " + std::to_string(lineno), "empty key");
            if (!key_allowed(key)) throw ConfigError(key, "unknown key");
            if (cfg.kv_.count(key)) throw ConfigError(key, "duplicate key");
            cfg.kv_[key] = value;
        }
        return cfg;
    }

    static Config parse_file(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw ConfigError(path, "cannot open config file");
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse_string(buf.str());
    }

    bool has(const std::string& key) const { return kv_.count(key) != 0; }

    const std::map<std::string, std::string>& entries() const { return kv_; }

    std::string get_string(const std::string& key) const {
        const auto it = kv_.find(key);
        if (it == kv_.end()) throw ConfigError(key, "missing required key");
        return it->second;
    }

    std::string get_string_or(const std::string& key, const std::string& fallback) const {
        const auto it = kv_.find(key);
        return it == kv_.end() ? fallback : it->second;
    }

    double get_real(const std::string& key) const { return parse_real(key, get_string(key)); }

    double get_real_or(const std::string& key, double fallback) const {
        return has(key) ? get_real(key) : fallback;
    }

    std::uint64_t get_uint(const std::string& key) const {
        return parse_uint(key, get_string(key));
    }

    std::uint64_t get_uint_or(const std::string& key, std::uint64_t fallback) const {
        return has(key) ? get_uint(key) : fallback;
    }

    bool get_bool_or(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        const std::string v = get_string(key);
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        throw ConfigError(key, "expected a boolean");
    }

    std::vector<double> get_list(const std::string& key) const {
        const std::string v = get_string(key);
        std::vector<double> out;
        std::istringstream in(v);
        std::string cell;
        while (std::getline(in, cell, ',')) out.push_back(parse_real(key, trim(cell)));
        if (out.empty()) throw ConfigError(key, "expected a comma-separated list");
        return out;
    }

    std::vector<std::size_t> get_uint_list(const std::string& key) const {
        const std::string v = get_string(key);
        std::vector<std::size_t> out;
        std::istringstream in(v);
        std::string cell;
        while (std::getline(in, cell, ','))
            out.push_back(static_cast<std::size_t>(parse_uint(key, trim(cell))));
        if (out.empty()) throw ConfigError(key, "expected a comma-separated list");
        return out;
    }

    /// Digest of the canonical (sorted key=value) form.
    std::uint64_t digest() const {
        std::string canon;
        for (const auto& [k, v] : kv_) {
            canon += k;
            canon += '=';
            canon += v;
            canon += '\n';
        }
        return fnv1a(canon);
    }

  private:
    static std::string strip_comment(const std::string& s) {
        const auto pos = s.find('#');
        return pos == std::string::npos ? s : s.substr(0, pos);
    }

    static std::string trim(const std::string& s) {
        std::size_t b = 0, e = s.size();
        while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
        while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
        return s.substr(b, e - b);
    }

    static bool is_uint_token(const std::string& s) {
        if (s.empty()) return false;
        for (char c : s)
            if (!std::isdigit(static_cast<unsigned char>(c))) return false;
        return true;
    }

    static bool key_allowed(const std::string& key) {
        static const char* kExact[] = {
            "hurst.kind", "hurst.h", "hurst.base", "hurst.slopes", "hurst.mean",
            "hurst.amplitude", "hurst.frequency", "hurst.table.resolution",
            "hurst.table.values", "hurst.alpha", "hurst.beta", "hurst.gamma",
            "hurst.holder_const", "n", "n_list", "dist", "reps", "seed", "output_dir",
            "format", "threads", "grid.resolution", "grid.lo", "grid.hi",
            "check.resolution", "check.slack", "check.negative_control",
            "converge.rel_tol", "fdd.coeffs",
        };
        for (const char* k : kExact)
            if (key == k) return true;
        for (const char* prefix : {"grid.axis.", "fdd.point."}) {
            const std::size_t len = std::string(prefix).size();
            if (key.rfind(prefix, 0) == 0 && is_uint_token(key.substr(len))) return true;
        }
        return false;
    }

    static double parse_real(const std::string& key, const std::string& v) {
        if (v.empty()) throw ConfigError(key, "expected a number");
        char* end = nullptr;
        const double x = std::strtod(v.c_str(), &end);
        if (end != v.c_str() + v.size()) throw ConfigError(key, "expected a number");
        return x;
    }

    static std::uint64_t parse_uint(const std::string& key, const std::string& v) {
        if (v.empty() || v[0] == '-') throw ConfigError(key, "expected a nonnegative integer");
        char* end = nullptr;
        const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
        if (end != v.c_str() + v.size())
            throw ConfigError(key, "expected a nonnegative integer");
        return x;
    }

    std::map<std::string, std::string> kv_;
};

namespace detail {

inline std::vector<std::vector<double>> square_from_flat(const std::string& key,
                                                         const std::vector<double>& flat,
                                                         std::size_t d) {
    if (flat.size() != d * d) throw ConfigError(key, "expected d*d entries");
    std::vector<std::vector<double>> m(d, std::vector<double>(d));
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) m[i][j] = flat[i * d + j];
    return m;
}

}  // namespace detail

inline HurstField hurst_field_from_config(const Config& cfg) {
    const std::string kind = cfg.get_string("hurst.kind");
    auto reg_from = [&cfg](std::size_t d, std::optional<Regularity> fallback) {
        Regularity reg;
        if (cfg.has("hurst.alpha") || cfg.has("hurst.beta") || !fallback) {
            reg.alpha = cfg.get_list("hurst.alpha");
            reg.beta = cfg.get_list("hurst.beta");
        } else {
            reg = *fallback;
        }
        if (reg.alpha.size() != d || reg.beta.size() != d)
            throw ConfigError("hurst.alpha", "expected d entries");
        reg.gamma = cfg.get_real_or("hurst.gamma", fallback ? fallback->gamma : 1.0);
        reg.holder_const = cfg.get_real_or("hurst.holder_const",
                                           fallback ? fallback->holder_const : 1.0);
        return reg;
    };

    if (kind == "constant") {
        const auto h = cfg.get_list("hurst.h");
        Regularity fb;
        fb.alpha = h;
        fb.beta = h;
        return HurstField::constant(h, reg_from(h.size(), fb));
    }
    if (kind == "sinusoidal") {
        const auto mean = cfg.get_list("hurst.mean");
        const auto amp = cfg.get_list("hurst.amplitude");
        const auto freq = cfg.get_list("hurst.frequency");
        const HurstField defaulted = HurstField::sinusoidal(mean, amp, freq);
        return HurstField::sinusoidal(mean, amp, freq,
                                      reg_from(mean.size(), defaulted.regularity()));
    }
    if (kind == "affine") {
        const auto base = cfg.get_list("hurst.base");
        const auto slopes =
            detail::square_from_flat("hurst.slopes", cfg.get_list("hurst.slopes"), base.size());
        Regularity fb;
        fb.alpha = cfg.get_list("hurst.alpha");
        fb.beta = cfg.get_list("hurst.beta");
        fb.gamma = 1.0;
        double fro = 0.0;
        for (const auto& row : slopes)
            for (double v : row) fro += v * v;
        fb.holder_const = fro > 0.0 ? std::sqrt(fro) : 1.0;
        return HurstField::affine(base, slopes, reg_from(base.size(), fb));
    }
    if (kind == "table") {
        const std::size_t res = static_cast<std::size_t>(cfg.get_uint("hurst.table.resolution"));
        const auto values = cfg.get_list("hurst.table.values");
        const auto alpha = cfg.get_list("hurst.alpha");
        const std::size_t d = alpha.size();
        Regularity fb;
        fb.alpha = alpha;
        fb.beta = cfg.get_list("hurst.beta");
        fb.gamma = 1.0;
        // Default Lipschitz bound for multilinear interpolation: per-axis
        // max adjacent node difference times node density, combined in l2
        // and scaled by sqrt(d) for the copied components.
        if (!cfg.has("hurst.holder_const")) {
            std::size_t expect = 1;
            for (std::size_t i = 0; i < d; ++i) expect *= res;
            if (values.size() != expect)
                throw ConfigError("hurst.table.values", "expected resolution^d entries");
            double sum = 0.0;
            for (std::size_t ax = 0; ax < d; ++ax) {
                std::size_t stride = 1;
                for (std::size_t j = ax + 1; j < d; ++j) stride *= res;
                double lip = 0.0;
                for (std::size_t flat = 0; flat < expect; ++flat) {
                    const std::size_t axidx = (flat / stride) % res;
                    if (axidx + 1 >= res) continue;
                    lip = std::max(lip, std::abs(values[flat + stride] - values[flat]) *
                                            static_cast<double>(res - 1));
                }
                sum += lip * lip;
            }
            fb.holder_const = sum > 0.0 ? std::sqrt(static_cast<double>(d) * sum) : 1.0;
        }
        return HurstField::gridded(d, res, values, reg_from(d, fb));
    }
    throw ConfigError("hurst.kind", "expected constant, affine, sinusoidal, or table");
}

inline EvalGrid eval_grid_from_config(const Config& cfg, std::size_t d) {
    if (cfg.has("grid.axis.0")) {
        std::vector<std::vector<double>> axes(d);
        for (std::size_t ax = 0; ax < d; ++ax) {
            const std::string key = "grid.axis." + std::to_string(ax);
            if (!cfg.has(key)) throw ConfigError(key, "missing axis coordinates");
            axes[ax] = cfg.get_list(key);
        }
        return EvalGrid(axes);
    }
    const std::size_t res = static_cast<std::size_t>(cfg.get_uint("grid.resolution"));
    const double lo = cfg.get_real_or("grid.lo", 0.0);
    const double hi = cfg.get_real_or("grid.hi", 1.0);
    return EvalGrid::uniform(d, res, lo, hi);
}

inline FddSpec fdd_spec_from_config(const Config& cfg, std::size_t d) {
    FddSpec spec;
    spec.coeffs = cfg.get_list("fdd.coeffs");
    for (std::size_t j = 0; j < spec.coeffs.size(); ++j) {
        const std::string key = "fdd.point." + std::to_string(j);
        if (!cfg.has(key)) throw ConfigError(key, "missing point for coefficient");
        auto p = cfg.get_list(key);
        if (p.size() != d) throw ConfigError(key, "expected d coordinates");
        spec.points.push_back(std::move(p));
    }
    return spec;
}

inline NoiseDist noise_dist_from_config(const Config& cfg) {
    const std::string name = cfg.get_string_or("dist", "rademacher");
    try {
        return noise_dist_from_name(name);
    } catch (const ArgumentError&) {
        throw ConfigError("dist", "expected rademacher, gaussian, or uniform");
    }
}

}  // namespace mrl
