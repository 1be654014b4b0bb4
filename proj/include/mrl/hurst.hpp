#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mrl/errors.hpp"
#include "mrl/grid.hpp"
#include "mrl/report.hpp"

namespace mrl {

// Declared regularity of a Hurst functional: componentwise bounds
// alpha_i <= H_i(t) <= beta_i and a Holder condition
// ||H(t) - H(s)|| <= holder_const * ||t - s||^gamma.
struct Regularity {
    std::vector<double> alpha;
    std::vector<double> beta;
    double gamma = 1.0;
    double holder_const = 1.0;
};

// Vector-valued Hurst functional H : [0,1]^d -> (0,1)^d. Immutable after
// construction; all evaluation is pure.
//
// Supported parameterizations:
//   Constant      H_i(t) = h_i
//   AffineInT     H_i(t) = base_i + sum_j slopes[i][j] * t_j
//   Sinusoidal    H_i(t) = mean_i + amplitude_i * sin(2 pi frequency_i t_i)
//   GriddedTable  scalar node values on a uniform grid, multilinear
//                 interpolation, same value for every component
class HurstField {
  public:
    enum class Kind { Constant, AffineInT, Sinusoidal, GriddedTable };

    static HurstField constant(std::vector<double> h, Regularity reg) {
        HurstField f(Kind::Constant, h.size(), std::move(reg));
        f.p0_ = std::move(h);
        f.finish_construction();
        return f;
    }

    static HurstField constant(std::vector<double> h) {
        Regularity reg;
        reg.alpha = h;
        reg.beta = h;
        return constant(std::move(h), std::move(reg));
    }

    static HurstField affine(std::vector<double> base,
                             std::vector<std::vector<double>> slopes, Regularity reg) {
        HurstField f(Kind::AffineInT, base.size(), std::move(reg));
        f.p0_ = std::move(base);
        if (slopes.size() != f.d_)
            throw ArgumentError("HurstField: slopes must be a d x d matrix");
        for (const auto& row : slopes)
            if (row.size() != f.d_)
                throw ArgumentError("HurstField: slopes must be a d x d matrix");
        f.slopes_ = std::move(slopes);
        f.finish_construction();
        return f;
    }

    static HurstField sinusoidal(std::vector<double> mean, std::vector<double> amplitude,
                                 std::vector<double> frequency, Regularity reg) {
        HurstField f(Kind::Sinusoidal, mean.size(), std::move(reg));
        f.p0_ = std::move(mean);
        f.p1_ = std::move(amplitude);
        f.p2_ = std::move(frequency);
        if (f.p1_.size() != f.d_ || f.p2_.size() != f.d_)
            throw ArgumentError("HurstField: mean/amplitude/frequency sizes differ");
        f.finish_construction();
        return f;
    }

    // Bounds mean_i +- |amp_i|, gamma = 1, and the sharp Lipschitz constant
    // max_i 2 pi |amp_i| freq_i.
    static HurstField sinusoidal(std::vector<double> mean, std::vector<double> amplitude,
                                 std::vector<double> frequency) {
        Regularity reg;
        reg.alpha.resize(mean.size());
        reg.beta.resize(mean.size());
        reg.holder_const = 0.0;
        for (std::size_t i = 0; i < mean.size(); ++i) {
            reg.alpha[i] = mean[i] - std::abs(amplitude[i]);
            reg.beta[i] = mean[i] + std::abs(amplitude[i]);
            reg.holder_const = std::max(
                reg.holder_const, 2.0 * pi() * std::abs(amplitude[i] * frequency[i]));
        }
        if (reg.holder_const == 0.0) reg.holder_const = 1.0;
        return sinusoidal(std::move(mean), std::move(amplitude), std::move(frequency),
                          std::move(reg));
    }

    // Scalar table on the uniform grid with `resolution` nodes per axis
    // (spacing 1/(resolution-1)); values in row-major order, axis 0 slowest.
    static HurstField gridded(std::size_t d, std::size_t resolution,
                              std::vector<double> values, Regularity reg) {
        HurstField f(Kind::GriddedTable, d, std::move(reg));
        if (resolution < 2) throw ArgumentError("HurstField: table resolution must be >= 2");
        std::size_t expect = 1;
        for (std::size_t i = 0; i < d; ++i) expect *= resolution;
        if (values.size() != expect)
            throw ArgumentError("HurstField: table needs resolution^d values");
        for (double v : values)
            if (!std::isfinite(v) || v <= 0.0 || v >= 1.0)
                throw ArgumentError("HurstField: table values must lie in (0,1)");
        f.table_res_ = resolution;
        f.p0_ = std::move(values);
        f.finish_construction();
        return f;
    }

    Kind kind() const { return kind_; }
    std::size_t dim() const { return d_; }
    const Regularity& regularity() const { return reg_; }

    // True when H_i(t) depends on t through t_i alone, so per-axis evaluation
    // via eval_axis is exact.
    bool separable() const {
        switch (kind_) {
            case Kind::Constant:
            case Kind::Sinusoidal: return true;
            case Kind::AffineInT:
                for (std::size_t i = 0; i < d_; ++i)
                    for (std::size_t j = 0; j < d_; ++j)
                        if (i != j && slopes_[i][j] != 0.0) return false;
                return true;
            case Kind::GriddedTable: return d_ == 1;
        }
        return false;
    }

    std::vector<double> eval(const std::vector<double>& t) const {
        std::vector<double> h = eval_raw(t);
        for (std::size_t i = 0; i < d_; ++i)
            h[i] = std::clamp(h[i], reg_.alpha[i], reg_.beta[i]);
        return h;
    }

    // Unclamped evaluation, used by bound diagnostics.
    std::vector<double> eval_raw(const std::vector<double>& t) const {
        check_point(t);
        std::vector<double> h(d_);
        switch (kind_) {
            case Kind::Constant:
                h = p0_;
                break;
            case Kind::AffineInT:
                for (std::size_t i = 0; i < d_; ++i) {
                    double v = p0_[i];
                    for (std::size_t j = 0; j < d_; ++j) v += slopes_[i][j] * t[j];
                    h[i] = v;
                }
                break;
            case Kind::Sinusoidal:
                for (std::size_t i = 0; i < d_; ++i)
                    h[i] = p0_[i] + p1_[i] * std::sin(2.0 * pi() * p2_[i] * t[i]);
                break;
            case Kind::GriddedTable: {
                double v = interpolate(t);
                for (std::size_t i = 0; i < d_; ++i) h[i] = v;
                break;
            }
        }
        return h;
    }

    // Component i as a function of t_i alone; only valid for separable specs.
    double eval_axis(std::size_t axis, double ti) const {
        if (axis >= d_) throw ArgumentError("HurstField: axis out of range");
        if (!(ti >= 0.0 && ti <= 1.0))
            throw ArgumentError("HurstField: coordinate outside [0,1]");
        if (!separable())
            throw SpecIncompatibilityError(
                "HurstField: per-axis evaluation requires a separable Hurst spec");
        double h = 0.0;
        switch (kind_) {
            case Kind::Constant: h = p0_[axis]; break;
            case Kind::AffineInT: h = p0_[axis] + slopes_[axis][axis] * ti; break;
            case Kind::Sinusoidal:
                h = p0_[axis] + p1_[axis] * std::sin(2.0 * pi() * p2_[axis] * ti);
                break;
            case Kind::GriddedTable: h = interpolate({ti}); break;
        }
        return std::clamp(h, reg_.alpha[axis], reg_.beta[axis]);
    }

    // Sweeps a uniform grid with `grid_resolution` points per axis. Reports
    // the worst componentwise bound violation of the raw (unclamped) values
    // and the max Holder ratio ||H(t)-H(s)|| / ||t-s||^gamma over pairs of
    // grid neighbors that differ along a single axis.
    DiagnosticsReport validate(std::size_t grid_resolution, double slack) const {
        if (grid_resolution < 2)
            throw ArgumentError("HurstField: validation grid resolution must be >= 2");
        if (slack < 0.0) throw ArgumentError("HurstField: slack must be >= 0");
        const EvalGrid grid = EvalGrid::uniform(d_, grid_resolution);
        const std::size_t total = grid.size();

        std::vector<std::vector<double>> raw(total);
        for (std::size_t p = 0; p < total; ++p) raw[p] = eval_raw(grid.point(p));

        double worst_violation = -1e300;
        std::size_t worst_point = 0;
        for (std::size_t p = 0; p < total; ++p) {
            for (std::size_t i = 0; i < d_; ++i) {
                const double v =
                    std::max(reg_.alpha[i] - raw[p][i], raw[p][i] - reg_.beta[i]);
                if (v > worst_violation) {
                    worst_violation = v;
                    worst_point = p;
                }
            }
        }

        double max_ratio = 0.0;
        std::vector<std::size_t> stride(d_, 1);
        for (std::size_t i = d_; i-- > 1;)
            stride[i - 1] = stride[i] * grid.axis(i).size();
        for (std::size_t p = 0; p < total; ++p) {
            const auto t = grid.point(p);
            for (std::size_t ax = 0; ax < d_; ++ax) {
                if (grid.axis_index(p, ax) + 1 >= grid.axis(ax).size()) continue;
                const std::size_t q = p + stride[ax];
                double dh2 = 0.0;
                for (std::size_t i = 0; i < d_; ++i) {
                    const double dh = raw[q][i] - raw[p][i];
                    dh2 += dh * dh;
                }
                const double dt =
                    grid.axis(ax)[grid.axis_index(p, ax) + 1] - grid.axis(ax)[grid.axis_index(p, ax)];
                const double ratio = std::sqrt(dh2) / std::pow(dt, reg_.gamma);
                max_ratio = std::max(max_ratio, ratio);
            }
        }

        DiagnosticsReport rep;
        {
            std::ostringstream key;
            key << describe() << " validate res=" << grid_resolution
                << " slack=" << format_g17(slack);
            rep.config_digest = fnv1a(key.str());
        }

        CheckResult bounds;
        bounds.name = "hurst.bounds";
        bounds.observed = worst_violation;
        bounds.threshold = kBoundTol;
        bounds.pass = worst_violation <= kBoundTol;
        {
            std::ostringstream note;
            note << "max componentwise bound violation (negative = margin); worst at point "
                 << worst_point << " of " << total;
            bounds.notes = note.str();
        }
        rep.append(bounds);

        CheckResult holder;
        holder.name = "hurst.holder_ratio";
        holder.observed = max_ratio;
        holder.threshold = reg_.holder_const * (1.0 + slack);
        holder.pass = max_ratio <= holder.threshold;
        {
            std::ostringstream note;
            note << "max ||H(t)-H(s)||/||t-s||^gamma over axis neighbors, resolution "
                 << grid_resolution;
            holder.notes = note.str();
        }
        rep.append(holder);
        return rep;
    }

    // Canonical parameter string; stable across runs, feeds config digests.
    std::string describe() const {
        std::ostringstream out;
        out << "hurst kind=";
        switch (kind_) {
            case Kind::Constant: out << "constant"; break;
            case Kind::AffineInT: out << "affine"; break;
            case Kind::Sinusoidal: out << "sinusoidal"; break;
            case Kind::GriddedTable: out << "table"; break;
        }
        out << " d=" << d_;
        auto vec = [&out](const char* name, const std::vector<double>& v) {
            out << ' ' << name << '=';
            for (std::size_t i = 0; i < v.size(); ++i)
                out << (i ? "," : "") << format_g17(v[i]);
        };
        switch (kind_) {
            case Kind::Constant: vec("h", p0_); break;
            case Kind::AffineInT:
                vec("base", p0_);
                out << " slopes=";
                for (std::size_t i = 0; i < d_; ++i)
                    for (std::size_t j = 0; j < d_; ++j)
                        out << ((i + j) ? "," : "") << format_g17(slopes_[i][j]);
                break;
            case Kind::Sinusoidal:
                vec("mean", p0_);
                vec("amp", p1_);
                vec("freq", p2_);
                break;
            case Kind::GriddedTable:
                out << " res=" << table_res_;
                vec("values", p0_);
                break;
        }
        vec("alpha", reg_.alpha);
        vec("beta", reg_.beta);
        out << " gamma=" << format_g17(reg_.gamma)
            << " K=" << format_g17(reg_.holder_const);
        return out.str();
    }

  private:
    static constexpr double kBoundTol = 1e-12;

    HurstField(Kind kind, std::size_t d, Regularity reg)
        : kind_(kind), d_(d), reg_(std::move(reg)) {}

    static double pi() { return 3.14159265358979323846; }

    void finish_construction() {
        if (d_ == 0) throw ArgumentError("HurstField: dimension must be >= 1");
        if (reg_.alpha.size() != d_ || reg_.beta.size() != d_)
            throw ArgumentError("HurstField: alpha/beta must have d entries");
        for (std::size_t i = 0; i < d_; ++i) {
            if (!(reg_.alpha[i] > 0.0 && reg_.alpha[i] <= reg_.beta[i] && reg_.beta[i] < 1.0))
                throw ArgumentError("HurstField: need 0 < alpha_i <= beta_i < 1");
        }
        if (!(reg_.gamma > 0.0 && reg_.gamma <= 1.0))
            throw ArgumentError("HurstField: gamma must lie in (0,1]");
        if (!(reg_.holder_const > 0.0))
            throw ArgumentError("HurstField: holder_const must be positive");
        if (kind_ != Kind::GriddedTable && p0_.size() != d_)
            throw ArgumentError("HurstField: parameter vector must have d entries");
        for (double v : p0_)
            if (!std::isfinite(v)) throw ArgumentError("HurstField: non-finite parameter");
    }

    void check_point(const std::vector<double>& t) const {
        if (t.size() != d_)
            throw ArgumentError("HurstField: point dimension mismatch");
        for (double x : t)
            if (!(x >= 0.0 && x <= 1.0))
                throw ArgumentError("HurstField: point outside [0,1]^d");
    }

    double interpolate(const std::vector<double>& t) const {
        const std::size_t m = table_res_;
        std::vector<std::size_t> lo(d_);
        std::vector<double> w(d_);
        for (std::size_t i = 0; i < d_; ++i) {
            const double x = t[i] * static_cast<double>(m - 1);
            std::size_t j = static_cast<std::size_t>(x);
            if (j >= m - 1) j = m - 2;
            lo[i] = j;
            w[i] = x - static_cast<double>(j);
        }
        double acc = 0.0;
        for (std::size_t corner = 0; corner < (std::size_t{1} << d_); ++corner) {
            double weight = 1.0;
            std::size_t flat = 0;
            for (std::size_t i = 0; i < d_; ++i) {
                const bool hi = (corner >> i) & 1u;
                weight *= hi ? w[i] : 1.0 - w[i];
                flat = flat * m + lo[i] + (hi ? 1 : 0);
            }
            acc += weight * p0_[flat];
        }
        return acc;
    }

    Kind kind_;
    std::size_t d_;
    Regularity reg_;
    std::vector<double> p0_;
    std::vector<double> p1_;
    std::vector<double> p2_;
    std::vector<std::vector<double>> slopes_;
    std::size_t table_res_ = 0;
};

}  // namespace mrl
