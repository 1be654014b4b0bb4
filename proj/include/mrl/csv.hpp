#pragma once

#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mrl/donsker.hpp"
#include "mrl/errors.hpp"
#include "mrl/exact.hpp"
#include "mrl/grid.hpp"
#include "mrl/report.hpp"

namespace mrl {

inline Provenance provenance_from_string(const std::string& text) {
    std::istringstream in(text);
    std::string token;
    Provenance p;
    if (!(in >> token)) throw ArgumentError("provenance: empty string");
    if (token == "donsker") p.source = Provenance::Source::Donsker;
    else if (token == "exact-cholesky") p.source = Provenance::Source::ExactCholesky;
    else if (token == "product-oracle") p.source = Provenance::Source::ProductOracle;
    else throw ArgumentError("provenance: unknown source '" + token + "'");
    while (in >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos)
            throw ArgumentError("provenance: malformed token '" + token + "'");
        const std::string key = token.substr(0, eq);
        const std::string value = token.substr(eq + 1);
        if (key == "n") p.n = std::stoull(value);
        else if (key == "seed") p.seed = std::stoull(value);
        else if (key == "dist") p.dist = noise_dist_from_name(value);
        else if (key == "warning") p.warning = value;
        else throw ArgumentError("provenance: unknown key '" + key + "'");
    }
    return p;
}

// One row per grid point: coordinates then value, 17 significant digits.
// Grid axes and provenance ride along as comment lines so a file read back
// reproduces the in-memory sample exactly.
inline std::string sheet_to_csv(const SheetSample& s) {
    std::ostringstream out;
    out << "# provenance: " << s.provenance.to_string() << "\n";
    for (std::size_t ax = 0; ax < s.grid.dim(); ++ax) {
        out << "# axis " << ax << ":";
        for (double x : s.grid.axis(ax)) out << ' ' << format_g17(x);
        out << "\n";
    }
    for (std::size_t ax = 0; ax < s.grid.dim(); ++ax) out << 't' << ax << ',';
    out << "value\n";
    for (std::size_t p = 0; p < s.grid.size(); ++p) {
        const auto t = s.grid.point(p);
        for (double x : t) out << format_g17(x) << ',';
        out << format_g17(s.values[p]) << "\n";
    }
    return out.str();
}

inline SheetSample sheet_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    SheetSample s;
    std::vector<std::vector<double>> axes;
    bool have_prov = false;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line.rfind("# provenance: ", 0) == 0) {
                s.provenance = provenance_from_string(line.substr(14));
                have_prov = true;
            } else if (line.rfind("# axis ", 0) == 0) {
                std::istringstream ax(line.substr(7));
                std::size_t idx = 0;
                char colon = 0;
                ax >> idx >> colon;
                if (colon != ':') throw ArgumentError("sheet csv: malformed axis line");
                if (idx != axes.size())
                    throw ArgumentError("sheet csv: axis lines out of order");
                std::vector<double> coords;
                double x = 0.0;
                while (ax >> x) coords.push_back(x);
                axes.push_back(std::move(coords));
            }
            continue;
        }
        if (!header_seen) {
            header_seen = true;  // column header row
            continue;
        }
        std::istringstream row(line);
        std::string cell;
        std::vector<double> fields;
        while (std::getline(row, cell, ','))
            fields.push_back(std::strtod(cell.c_str(), nullptr));
        if (fields.size() != axes.size() + 1)
            throw ArgumentError("sheet csv: wrong column count");
        s.values.push_back(fields.back());
    }
    if (!have_prov) throw ArgumentError("sheet csv: missing provenance line");
    if (axes.empty()) throw ArgumentError("sheet csv: missing axis lines");
    s.grid = EvalGrid(axes);
    if (s.values.size() != s.grid.size())
        throw ArgumentError("sheet csv: row count does not match the grid");
    return s;
}

/// Long format: replicate index, coordinates, value; one row per (replicate,
/// grid point).
inline std::string sheets_to_long_csv(const std::vector<SheetSample>& samples) {
    std::ostringstream out;
    if (samples.empty()) throw ArgumentError("sheets_to_long_csv: no samples");
    out << "# provenance: " << samples.front().provenance.to_string() << "\n";
    out << "rep,";
    for (std::size_t ax = 0; ax < samples.front().grid.dim(); ++ax) out << 't' << ax << ',';
    out << "value\n";
    for (std::size_t r = 0; r < samples.size(); ++r) {
        const auto& s = samples[r];
        for (std::size_t p = 0; p < s.grid.size(); ++p) {
            out << r << ',';
            for (double x : s.grid.point(p)) out << format_g17(x) << ',';
            out << format_g17(s.values[p]) << "\n";
        }
    }
    return out.str();
}

/// Row-major matrix dump with a header row of flattened grid indices.
inline std::string matrix_to_csv(const Eigen::MatrixXd& m) {
    std::ostringstream out;
    out << "index";
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << ',' << j;
    out << "\n";
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        out << i;
        for (Eigen::Index j = 0; j < m.cols(); ++j) out << ',' << format_g17(m(i, j));
        out << "\n";
    }
    return out.str();
}

inline std::string covariance_to_csv(const CovarianceMatrix& cm) {
    std::ostringstream out;
    out << "# jitter_used: " << format_g17(cm.jitter_used) << "\n";
    out << matrix_to_csv(cm.cov);
    return out.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ArgumentError("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw ArgumentError("write failed for '" + path + "'");
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ArgumentError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace mrl
