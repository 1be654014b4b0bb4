#pragma once

#include <cstdint>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mrl/errors.hpp"

namespace mrl {

/// 64-bit FNV-1a, used for config digests.
inline constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

/// Shortest decimal form that round-trips a double (17 significant digits).
inline std::string format_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

struct CheckResult {
    std::string name;
    double observed = 0.0;
    double threshold = 0.0;
    std::optional<double> standard_error;
    bool pass = false;
    std::string notes;

    bool operator==(const CheckResult&) const = default;
};

// Structured pass/fail results of a diagnostics run. Serialization is
// line-oriented (one check per line, tab separated) and lossless: doubles are
// printed with 17 significant digits and notes are escaped.
struct DiagnosticsReport {
    std::uint64_t config_digest = 0;
    std::vector<CheckResult> checks;

    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }

    void append(const CheckResult& c) { checks.push_back(c); }

    void merge(const DiagnosticsReport& other) {
        config_digest = mergeddigest(config_digest, other.config_digest);
        checks.insert(checks.end(), other.checks.begin(), other.checks.end());
    }

    std::string to_text() const {
        std::ostringstream out;
        char digest[20];
        std::snprintf(digest, sizeof(digest), "%016llx",
                      static_cast<unsigned long long>(config_digest));
        out << "mrl-report 1 digest=" << digest << "\n";
        for (const auto& c : checks) {
            out << escape(c.name) << '\t' << format_g17(c.observed) << '\t'
                << format_g17(c.threshold) << '\t'
                << (c.standard_error ? format_g17(*c.standard_error) : std::string("-")) << '\t'
                << (c.pass ? '1' : '0') << '\t' << escape(c.notes) << '\n';
        }
        return out.str();
    }

    static DiagnosticsReport from_text(const std::string& text) {
        DiagnosticsReport rep;
        std::istringstream in(text);
        std::string line;
        if (!std::getline(in, line) || line.rfind("mrl-report 1 digest=", 0) != 0)
            throw ArgumentError("report: bad header line");
        rep.config_digest = std::stoull(line.substr(line.find('=') + 1), nullptr, 16);
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            auto fields = split_tabs(line);
            if (fields.size() != 6) throw ArgumentError("report: malformed check line");
            CheckResult c;
            c.name = unescape(fields[0]);
            c.observed = std::strtod(fields[1].c_str(), nullptr);
            c.threshold = std::strtod(fields[2].c_str(), nullptr);
            if (fields[3] != "-") c.standard_error = std::strtod(fields[3].c_str(), nullptr);
            c.pass = fields[4] == "1";
            c.notes = unescape(fields[5]);
            rep.checks.push_back(std::move(c));
        }
        return rep;
    }

    std::string to_csv() const {
        std::ostringstream out;
        char digest[20];
        std::snprintf(digest, sizeof(digest), "%016llx",
                      static_cast<unsigned long long>(config_digest));
        out << "# config_digest=" << digest << "\n";
        out << "name,observed,threshold,se,pass,notes\n";
        for (const auto& c : checks) {
            out << csv_quote(c.name) << ',' << format_g17(c.observed) << ','
                << format_g17(c.threshold) << ','
                << (c.standard_error ? format_g17(*c.standard_error) : std::string()) << ','
                << (c.pass ? 1 : 0) << ',' << csv_quote(c.notes) << '\n';
        }
        return out.str();
    }

  private:
    static std::uint64_t mergeddigest(std::uint64_t a, std::uint64_t b) {
        if (a == 0) return b;
        if (b == 0) return a;
        return mix_pair(a, b);
    }
    static constexpr std::uint64_t mix_pair(std::uint64_t a, std::uint64_t b) {
        std::uint64_t h = a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2));
        return h;
    }

    static std::string escape(const std::string& s) {
        std::string out;
        out.reserve(s.size());
        for (char ch : s) {
            switch (ch) {
                case '\\': out += "\\\\"; break;
                case '\t': out += "\\t"; break;
                case '\n': out += "\\n"; break;
                default: out += ch;
            }
        }
        return out;
    }

    static std::string unescape(const std::string& s) {
        std::string out;
        out.reserve(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] == '\\' && i + 1 < s.size()) {
                ++i;
                if (s[i] == 't') out += '\t';
                else if (s[i] == 'n') out += '\n';
                else out += s[i];
            } else {
                out += s[i];
            }
        }
        return out;
    }

    static std::vector<std::string> split_tabs(const std::string& line) {
        std::vector<std::string> fields;
        std::string cur;
        for (char ch : line) {
            if (ch == '\t') {
                fields.push_back(cur);
                cur.clear();
            } else {
                cur += ch;
            }
        }
        fields.push_back(cur);
        return fields;
    }

    static std::string csv_quote(const std::string& s) {
        bool needs = s.find_first_of(",\"\n") != std::string::npos;
        if (!needs) return s;
        std::string out = "\"";
        for (char ch : s) {
            if (ch == '"') out += "\"\"";
            else out += ch;
        }
        out += '"';
        return out;
    }
};

}  // namespace mrl
