#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "mrl/errors.hpp"
#include "mrl/grid.hpp"
#include "mrl/hurst.hpp"

namespace mrl {

/// prod_i (t_i - u_i)_+^{h_i - 1/2}. The truncation applies before
/// exponentiation, so any u_i >= t_i gives 0 even when the exponent is
/// negative. Evaluation exactly at u_i = t_i with h_i < 1/2 is refused;
/// integrate across the singularity instead.
inline double kernel_eval(const std::vector<double>& t, const std::vector<double>& u,
                          const std::vector<double>& h) {
    const std::size_t d = t.size();
    if (u.size() != d || h.size() != d)
        throw ArgumentError("kernel_eval: dimension mismatch");
    for (std::size_t i = 0; i < d; ++i) {
        if (!(h[i] > 0.0 && h[i] < 1.0))
            throw ArgumentError("kernel_eval: h outside (0,1)");
        if (u[i] == t[i] && h[i] < 0.5)
            throw SingularityError("kernel_eval: u_i = t_i with h_i < 1/2");
    }
    for (std::size_t i = 0; i < d; ++i)
        if (u[i] >= t[i]) return 0.0;
    double prod = 1.0;
    for (std::size_t i = 0; i < d; ++i) prod *= std::pow(t[i] - u[i], h[i] - 0.5);
    return prod;
}

// int_a^b (t-u)_+^{h-1/2} du in closed form. With p = h + 1/2 and
// c = min(b, t) the value is [(t-a)^p - (t-c)^p] / p; the difference is
// computed via expm1/log1p so nearby endpoints do not cancel.
inline double cell_integral_1d(double t, double a, double b, double h) {
    if (!(a < b)) throw ArgumentError("cell_integral_1d: need a < b");
    if (a < 0.0) throw ArgumentError("cell_integral_1d: need a >= 0");
    if (!(h > 0.0 && h < 1.0)) throw ArgumentError("cell_integral_1d: h outside (0,1)");
    if (t <= a) return 0.0;
    const double c = b < t ? b : t;
    if (h == 0.5) return c - a;
    const double p = h + 0.5;
    const double ta = t - a;
    if (c >= t) return std::pow(ta, p) / p;
    const double r = (c - a) / ta;
    return std::pow(ta, p) * (-std::expm1(p * std::log1p(-r))) / p;
}

/// Number of leading cells {1..K} of the n-partition that meet [0, t):
/// K = min(n, ceil(t*n)). Cells with lower endpoint >= t contribute nothing.
inline std::size_t support_cells(double t, std::size_t n) {
    if (t <= 0.0) return 0;
    const double scaled = t * static_cast<double>(n);
    std::size_t k = static_cast<std::size_t>(std::ceil(scaled));
    if (k > n) k = n;
    return k;
}

// Tabulated cell integrals F_i(t_i, k) = int over cell k of
// (t_i - u)_+^{H_i(t) - 1/2} for every evaluation point of a grid. H_i(t)
// depends on the whole point t, so the general layout stores one row per
// (grid point, axis); when the Hurst spec is separable the rows collapse to
// one per (axis, axis coordinate) and are shared across the grid.
class CellIntegralTable {
  public:
    enum class Layout { Separable, PerPoint };

    static CellIntegralTable build(const HurstField& field, std::size_t n,
                                   const EvalGrid& grid) {
        if (n < 1) throw ArgumentError("CellIntegralTable: n must be >= 1");
        if (grid.dim() != field.dim())
            throw ArgumentError("CellIntegralTable: grid dimension mismatch");
        CellIntegralTable tab;
        tab.n_ = n;
        tab.d_ = field.dim();
        tab.layout_ = field.separable() ? Layout::Separable : Layout::PerPoint;
        if (tab.layout_ == Layout::Separable) {
            tab.axis_rows_.resize(tab.d_);
            for (std::size_t ax = 0; ax < tab.d_; ++ax) {
                const auto& coords = grid.axis(ax);
                tab.axis_rows_[ax].resize(coords.size());
                for (std::size_t c = 0; c < coords.size(); ++c)
                    tab.axis_rows_[ax][c] =
                        make_row(coords[c], field.eval_axis(ax, coords[c]), n);
            }
        } else {
            tab.point_rows_.resize(grid.size());
            for (std::size_t p = 0; p < grid.size(); ++p) {
                const auto t = grid.point(p);
                const auto h = field.eval(t);
                tab.point_rows_[p].resize(tab.d_);
                for (std::size_t ax = 0; ax < tab.d_; ++ax)
                    tab.point_rows_[p][ax] = make_row(t[ax], h[ax], n);
            }
        }
        tab.grid_ = grid;
        return tab;
    }

    Layout layout() const { return layout_; }
    std::size_t n() const { return n_; }
    std::size_t dim() const { return d_; }
    const EvalGrid& grid() const { return grid_; }

    // Cell values for axis `ax` at grid point `point` (flat index); entry k-1
    // holds the integral over cell k. Truncated to the support: entries for
    // cells entirely right of t_ax are omitted.
    const std::vector<double>& row(std::size_t point, std::size_t ax) const {
        if (ax >= d_) throw ArgumentError("CellIntegralTable: axis out of range");
        if (layout_ == Layout::Separable)
            return axis_rows_[ax][grid_.axis_index(point, ax)];
        if (point >= point_rows_.size())
            throw ArgumentError("CellIntegralTable: point out of range");
        return point_rows_[point][ax];
    }

    // Row for an arbitrary coordinate/exponent, not tied to the grid.
    static std::vector<double> make_row(double t, double h, std::size_t n) {
        const std::size_t support = support_cells(t, n);
        std::vector<double> row(support);
        const double inv_n = 1.0 / static_cast<double>(n);
        for (std::size_t k = 0; k < support; ++k)
            row[k] = cell_integral_1d(t, static_cast<double>(k) * inv_n,
                                      static_cast<double>(k + 1) * inv_n, h);
        return row;
    }

  private:
    std::size_t n_ = 0;
    std::size_t d_ = 0;
    Layout layout_ = Layout::PerPoint;
    EvalGrid grid_;
    // Separable: axis_rows_[ax][coord index] -> cell values.
    std::vector<std::vector<std::vector<double>>> axis_rows_;
    // PerPoint: point_rows_[flat point][ax] -> cell values.
    std::vector<std::vector<std::vector<double>>> point_rows_;
};

}  // namespace mrl
