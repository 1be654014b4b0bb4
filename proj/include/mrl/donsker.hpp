#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mrl/errors.hpp"
#include "mrl/grid.hpp"
#include "mrl/hurst.hpp"
#include "mrl/kernel.hpp"
#include "mrl/noise.hpp"
#include "mrl/parallel.hpp"
#include "mrl/stats.hpp"

namespace mrl {

// Which sampler produced a SheetSample.
struct Provenance {
    enum class Source { Donsker, ExactCholesky, ProductOracle };
    Source source = Source::Donsker;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    NoiseDist dist = NoiseDist::Rademacher;
    std::string warning;

    std::string to_string() const {
        std::string s;
        switch (source) {
            case Source::Donsker:
                s = "donsker n=" + std::to_string(n) + " dist=" + noise_dist_name(dist);
                break;
            case Source::ExactCholesky: s = "exact-cholesky"; break;
            case Source::ProductOracle: s = "product-oracle"; break;
        }
        s += " seed=" + std::to_string(seed);
        if (!warning.empty()) s += " warning=" + warning;
        return s;
    }
};

struct SheetSample {
    EvalGrid grid;
    std::vector<double> values;
    Provenance provenance;
};

// sum over the support of z[k] * prod_i rows[i][k_i]; rows[i] holds the
// per-cell weights along axis i, already truncated to the support
// K_i = support_cells(t_i, n). Row-major z, axis 0 slowest; the inner loop
// walks contiguous noise entries.
inline double tensor_contract(const std::vector<double>& z, std::size_t n,
                              const std::vector<const std::vector<double>*>& rows) {
    const std::size_t d = rows.size();
    if (d == 0) throw ArgumentError("tensor_contract: empty row set");
    for (const auto* r : rows)
        if (r->empty()) return 0.0;
    if (d == 1) {
        const auto& row = *rows[0];
        CompensatedSum acc;
        for (std::size_t k = 0; k < row.size(); ++k) acc.add(row[k] * z[k]);
        return acc.value();
    }
    // Odometer over the outer d-1 indices; axis d-1 is the flat inner loop.
    CompensatedSum acc;
    std::vector<std::size_t> outer(d - 1, 0);
    bool done = false;
    while (!done) {
        double w = 1.0;
        std::size_t base = 0;
        for (std::size_t i = 0; i + 1 < d; ++i) {
            w *= (*rows[i])[outer[i]];
            base = (base + outer[i]) * n;
        }
        const auto& inner = *rows[d - 1];
        double inner_acc = 0.0;
        const double* zp = z.data() + base;
        for (std::size_t k = 0; k < inner.size(); ++k) inner_acc += inner[k] * zp[k];
        acc.add(w * inner_acc);
        for (std::size_t i = d - 1; i-- > 0;) {
            if (++outer[i] < rows[i]->size()) break;
            outer[i] = 0;
            if (i == 0) done = true;
        }
    }
    return acc.value();
}

/// X_n at a single point from prebuilt per-axis weight rows.
inline double donsker_point(const NoiseField& noise,
                            const std::vector<const std::vector<double>*>& rows) {
    const double scale = std::pow(static_cast<double>(noise.n),
                                  0.5 * static_cast<double>(noise.d));
    return scale * tensor_contract(noise.z, noise.n, rows);
}

// X_n(t) = n^{d/2} sum_k Z_k prod_i F_i(t_i, k_i) over every grid point.
// The noise field theta_n is never materialized; the integral against it is
// exact through the closed-form cell weights.
inline SheetSample sample_donsker_sheet(const HurstField& field, const NoiseField& noise,
                                        const EvalGrid& grid, std::size_t threads = 1) {
    if (noise.d != field.dim())
        throw ArgumentError("sample_donsker_sheet: noise dimension mismatch");
    if (grid.dim() != field.dim())
        throw ArgumentError("sample_donsker_sheet: grid dimension mismatch");
    const CellIntegralTable table = CellIntegralTable::build(field, noise.n, grid);
    SheetSample out;
    out.grid = grid;
    out.values.resize(grid.size());
    out.provenance = {Provenance::Source::Donsker, noise.n, noise.seed, noise.dist, ""};
    const std::size_t d = field.dim();
    parallel_for(grid.size(), threads, [&](std::size_t p) {
        std::vector<const std::vector<double>*> rows(d);
        for (std::size_t ax = 0; ax < d; ++ax) rows[ax] = &table.row(p, ax);
        out.values[p] = donsker_point(noise, rows);
    });
    return out;
}

/// The Donsker partial-sum approximation of the Wiener sheet:
/// n^{d/2} * integral of theta_n over [0, t]. Equals the general sampler
/// with H constant at 1/2.
inline double wiener_donsker(const NoiseField& noise, const std::vector<double>& t) {
    if (t.size() != noise.d) throw ArgumentError("wiener_donsker: dimension mismatch");
    std::vector<std::vector<double>> rows(noise.d);
    std::vector<const std::vector<double>*> ptrs(noise.d);
    for (std::size_t ax = 0; ax < noise.d; ++ax) {
        if (!(t[ax] >= 0.0 && t[ax] <= 1.0))
            throw ArgumentError("wiener_donsker: point outside [0,1]^d");
        rows[ax] = CellIntegralTable::make_row(t[ax], 0.5, noise.n);
        ptrs[ax] = &rows[ax];
    }
    return donsker_point(noise, ptrs);
}

// E[X_n(t) X_n(s)] without sampling. Because the weight product factorizes
// across axes, the n^d-term sum collapses to a product of d inner products:
// n^d sum_k prod_i F_i(t_i,k_i) F_i(s_i,k_i)
//   = prod_i [ n * sum_k F_i(t_i,k) F_i(s_i,k) ].
inline double donsker_covariance(const HurstField& field, std::size_t n,
                                 const std::vector<double>& t,
                                 const std::vector<double>& s) {
    const std::size_t d = field.dim();
    if (t.size() != d || s.size() != d)
        throw ArgumentError("donsker_covariance: dimension mismatch");
    if (n < 1) throw ArgumentError("donsker_covariance: n must be >= 1");
    const auto ht = field.eval(t);
    const auto hs = field.eval(s);
    double prod = 1.0;
    for (std::size_t ax = 0; ax < d; ++ax) {
        const auto rt = CellIntegralTable::make_row(t[ax], ht[ax], n);
        const auto rs = CellIntegralTable::make_row(s[ax], hs[ax], n);
        const std::size_t m = rt.size() < rs.size() ? rt.size() : rs.size();
        CompensatedSum acc;
        for (std::size_t k = 0; k < m; ++k) acc.add(rt[k] * rs[k]);
        prod *= static_cast<double>(n) * acc.value();
    }
    return prod;
}

/// Polarized increment second moment E[X_n(t) - X_n(s)]^2, exact.
inline double donsker_increment_var(const HurstField& field, std::size_t n,
                                    const std::vector<double>& t,
                                    const std::vector<double>& s) {
    return donsker_covariance(field, n, t, t) + donsker_covariance(field, n, s, s) -
           2.0 * donsker_covariance(field, n, t, s);
}

}  // namespace mrl
