#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mrl/donsker.hpp"
#include "mrl/errors.hpp"
#include "mrl/grid.hpp"
#include "mrl/hurst.hpp"
#include "mrl/parallel.hpp"
#include "mrl/quadrature.hpp"
#include "mrl/rng.hpp"

namespace mrl {

inline constexpr std::size_t kCovGridCap = 4096;

namespace detail {

// J(sigma, a, g) = int_0^1 y^sigma (g + y)^a dy with g > 0 and
// sigma, a in (-1/2, 1/2). The full integral reduces to this shape via
// x = m*y, which also makes the scaling law exact: the quadrature sees only
// (sigma, a, g), never the absolute scale.
inline double cov1d_shape(double sigma, double a, double g) {
    if (sigma == 0.0) {
        const double p = a + 1.0;
        return std::pow(g + 1.0, p) * (-std::expm1(p * std::log1p(-1.0 / (g + 1.0)))) / p;
    }
    if (a == 0.0) return 1.0 / (sigma + 1.0);
    // y = v^q flattens the endpoint behavior: the transformed integrand is
    // v^{q(1+sigma)-1} (g + v^q)^a * q with polynomial-degree smoothness.
    const int q = std::clamp(static_cast<int>(std::ceil(8.0 / (1.0 + sigma))), 1, 16);
    const double e1 = static_cast<double>(q) * (1.0 + sigma) - 1.0;
    auto f = [&](double v) {
        if (v <= 0.0) return 0.0;
        const double vq = std::pow(v, static_cast<double>(q));
        return static_cast<double>(q) * std::exp(e1 * std::log(v) + a * std::log(g + vq));
    };
    bool ok = false;
    const double val = gauss_adaptive(f, 0.0, 1.0, 1e-11, 16384, &ok);
    if (ok) return val;
    // Graded mesh toward the singular end (y = 0, i.e. w = 1 below).
    auto fw = [&](double w) {
        const double y = 1.0 - w;
        if (y <= 0.0) return 0.0;
        return std::pow(y, sigma) * std::pow(g + y, a);
    };
    return gauss_graded_toward(fw, 0.0, 1.0, 0.5, 512);
}

}  // namespace detail

// int_0^{min(s,t)} (t-u)^{h_t-1/2} (s-u)^{h_s-1/2} du. Closed forms cover
// every case where an endpoint singularity would coincide with a second
// nonsmooth factor; the remaining single-singularity integral is computed by
// a flattening substitution plus adaptive Gauss-Legendre.
inline double covariance_1d(double t, double s, double h_t, double h_s) {
    if (!(h_t > 0.0 && h_t < 1.0 && h_s > 0.0 && h_s < 1.0))
        throw ArgumentError("covariance_1d: h outside (0,1)");
    if (!(t >= 0.0 && t <= 1.0 && s >= 0.0 && s <= 1.0))
        throw ArgumentError("covariance_1d: t, s must lie in [0,1]");
    const double m = t < s ? t : s;
    if (m <= 0.0) return 0.0;
    if (h_t == 0.5 && h_s == 0.5) return m;
    const double psum = h_t + h_s;
    if (t == s) return std::pow(t, psum) / psum;
    const double sigma = (t < s ? h_t : h_s) - 0.5;
    const double a = (t < s ? h_s : h_t) - 0.5;
    const double g = std::abs(t - s) / m;
    return std::pow(m, 1.0 + sigma + a) * detail::cov1d_shape(sigma, a, g);
}

/// E[X(t) X(s)] = prod_i covariance_1d(t_i, s_i, H_i(t), H_i(s)).
inline double covariance_sheet(const HurstField& field, const std::vector<double>& t,
                               const std::vector<double>& s) {
    const std::size_t d = field.dim();
    if (t.size() != d || s.size() != d)
        throw ArgumentError("covariance_sheet: dimension mismatch");
    const auto ht = field.eval(t);
    const auto hs = field.eval(s);
    double prod = 1.0;
    for (std::size_t i = 0; i < d; ++i) {
        prod *= covariance_1d(t[i], s[i], ht[i], hs[i]);
        if (prod == 0.0) return 0.0;
    }
    return prod;
}

struct CovarianceMatrix {
    EvalGrid grid;
    Eigen::MatrixXd cov;   // P x P, symmetric
    Eigen::MatrixXd chol;  // P x P lower factor; boundary rows/cols are zero
    std::vector<std::size_t> active;  // flat indices with every coordinate > 0
    double jitter_used = 0.0;
    bool factorized = false;
};

namespace detail {

// Escalating diagonal jitter: 0, then max(diag) * 1e-12 .. 1e-6 by decades.
inline std::pair<Eigen::MatrixXd, double> factor_with_jitter(const Eigen::MatrixXd& a) {
    if (a.rows() == 0) return {a, 0.0};
    const double maxdiag = a.diagonal().maxCoeff();
    std::vector<double> jitters{0.0};
    for (int e = -12; e <= -6; ++e) jitters.push_back(maxdiag * std::pow(10.0, e));
    for (double j : jitters) {
        Eigen::MatrixXd m = a;
        m.diagonal().array() += j;
        Eigen::LLT<Eigen::MatrixXd> llt(m);
        if (llt.info() == Eigen::Success) return {Eigen::MatrixXd(llt.matrixL()), j};
    }
    throw FactorizationError("covariance factorization failed at the jitter cap");
}

}  // namespace detail

// Covariance over all grid-point pairs, factorized. Points with a zero
// coordinate are exact zeros of the field; they stay in the matrix as zero
// rows/columns but are excluded from the Cholesky block.
inline CovarianceMatrix covariance_matrix(const HurstField& field, const EvalGrid& grid,
                                          std::size_t cap = kCovGridCap,
                                          bool factorize = true) {
    if (grid.dim() != field.dim())
        throw ArgumentError("covariance_matrix: grid dimension mismatch");
    const std::size_t P = grid.size();
    if (P > cap) throw BudgetError("covariance_matrix: grid exceeds the point cap");
    const std::size_t d = field.dim();

    CovarianceMatrix cm;
    cm.grid = grid;
    cm.cov = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(P), static_cast<Eigen::Index>(P));

    if (field.separable()) {
        // Per-axis factor tables: O(d * g^2) singular integrals instead of
        // O(P^2 * d).
        std::vector<Eigen::MatrixXd> fac(d);
        for (std::size_t ax = 0; ax < d; ++ax) {
            const auto& xs = grid.axis(ax);
            const std::size_t g = xs.size();
            fac[ax].resize(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(g));
            std::vector<double> h(g);
            for (std::size_t i = 0; i < g; ++i) h[i] = field.eval_axis(ax, xs[i]);
            for (std::size_t i = 0; i < g; ++i)
                for (std::size_t j = i; j < g; ++j) {
                    const double v = covariance_1d(xs[i], xs[j], h[i], h[j]);
                    fac[ax](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
                    fac[ax](static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
                }
        }
        for (std::size_t p = 0; p < P; ++p)
            for (std::size_t q = p; q < P; ++q) {
                double v = 1.0;
                for (std::size_t ax = 0; ax < d; ++ax)
                    v *= fac[ax](static_cast<Eigen::Index>(grid.axis_index(p, ax)),
                                 static_cast<Eigen::Index>(grid.axis_index(q, ax)));
                cm.cov(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) = v;
                cm.cov(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(p)) = v;
            }
    } else {
        for (std::size_t p = 0; p < P; ++p) {
            const auto tp = grid.point(p);
            for (std::size_t q = p; q < P; ++q) {
                const double v = covariance_sheet(field, tp, grid.point(q));
                cm.cov(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) = v;
                cm.cov(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(p)) = v;
            }
        }
    }

    for (std::size_t p = 0; p < P; ++p) {
        const auto tp = grid.point(p);
        bool interior = true;
        for (double x : tp)
            if (x <= 0.0) interior = false;
        if (interior) cm.active.push_back(p);
    }
    if (!factorize) return cm;

    const std::size_t na = cm.active.size();
    Eigen::MatrixXd block(static_cast<Eigen::Index>(na), static_cast<Eigen::Index>(na));
    for (std::size_t i = 0; i < na; ++i)
        for (std::size_t j = 0; j < na; ++j)
            block(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                cm.cov(static_cast<Eigen::Index>(cm.active[i]),
                       static_cast<Eigen::Index>(cm.active[j]));
    auto [lower, jitter] = detail::factor_with_jitter(block);
    cm.chol = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(P), static_cast<Eigen::Index>(P));
    for (std::size_t i = 0; i < na; ++i)
        for (std::size_t j = 0; j <= i; ++j)
            cm.chol(static_cast<Eigen::Index>(cm.active[i]),
                    static_cast<Eigen::Index>(cm.active[j])) =
                lower(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    cm.jitter_used = jitter;
    cm.factorized = true;
    return cm;
}

// Exact-in-law Gaussian samples (up to jitter) of the limit field on the
// grid: chol * iid standard normals, boundary points pinned to 0. Replicate
// r uses its own derived seed, so results do not depend on thread count.
inline std::vector<SheetSample> sample_exact(const CovarianceMatrix& cm, std::uint64_t seed,
                                             std::size_t reps, std::size_t threads = 1) {
    if (!cm.factorized) throw ArgumentError("sample_exact: matrix not factorized");
    const std::size_t P = cm.grid.size();
    std::vector<SheetSample> out(reps);
    parallel_for(reps, threads, [&](std::size_t r) {
        const std::uint64_t rep_seed = derive_seed(seed, SeedTag::exact_gauss, r);
        CounterRng rng(rep_seed);
        Eigen::VectorXd g(static_cast<Eigen::Index>(P));
        for (std::size_t p = 0; p < P; ++p)
            g(static_cast<Eigen::Index>(p)) = rng.normal(p);
        Eigen::VectorXd y = cm.chol * g;
        SheetSample s;
        s.grid = cm.grid;
        s.values.assign(P, 0.0);
        for (std::size_t p : cm.active)
            s.values[p] = y(static_cast<Eigen::Index>(p));
        s.provenance.source = Provenance::Source::ExactCholesky;
        s.provenance.seed = rep_seed;
        out[r] = std::move(s);
    });
    return out;
}

// Product of d independent 1D fractional paths, one per axis, with per-axis
// parameter H_i restricted to its own coordinate. Matches the limit field in
// covariance only: a product of Gaussians is not Gaussian for d >= 2, and
// the provenance warning says so.
class ProductOracleSampler {
  public:
    ProductOracleSampler(const HurstField& field, const EvalGrid& grid)
        : grid_(grid), d_(field.dim()) {
        if (grid.dim() != field.dim())
            throw ArgumentError("ProductOracleSampler: grid dimension mismatch");
        if (!field.separable())
            throw SpecIncompatibilityError(
                "product oracle requires per-axis Hurst dependence H_i(t) = H_i(t_i)");
        axis_lower_.resize(d_);
        axis_active_.resize(d_);
        for (std::size_t ax = 0; ax < d_; ++ax) {
            const auto& xs = grid.axis(ax);
            std::vector<std::size_t>& act = axis_active_[ax];
            for (std::size_t i = 0; i < xs.size(); ++i)
                if (xs[i] > 0.0) act.push_back(i);
            const std::size_t na = act.size();
            Eigen::MatrixXd a(static_cast<Eigen::Index>(na), static_cast<Eigen::Index>(na));
            for (std::size_t i = 0; i < na; ++i)
                for (std::size_t j = i; j < na; ++j) {
                    const double xi = xs[act[i]];
                    const double xj = xs[act[j]];
                    const double v = covariance_1d(xi, xj, field.eval_axis(ax, xi),
                                                   field.eval_axis(ax, xj));
                    a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
                    a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
                }
            auto [lower, jitter] = detail::factor_with_jitter(a);
            axis_lower_[ax] = std::move(lower);
            jitter_used_ = std::max(jitter_used_, jitter);
        }
    }

    double jitter_used() const { return jitter_used_; }
    const EvalGrid& grid() const { return grid_; }

    SheetSample sample(std::uint64_t seed) const {
        std::vector<std::vector<double>> path(d_);
        for (std::size_t ax = 0; ax < d_; ++ax) {
            const auto& act = axis_active_[ax];
            CounterRng rng(derive_seed(seed, SeedTag::product_axis, ax));
            Eigen::VectorXd g(static_cast<Eigen::Index>(act.size()));
            for (std::size_t j = 0; j < act.size(); ++j)
                g(static_cast<Eigen::Index>(j)) = rng.normal(j);
            Eigen::VectorXd y = axis_lower_[ax] * g;
            path[ax].assign(grid_.axis(ax).size(), 0.0);
            for (std::size_t j = 0; j < act.size(); ++j)
                path[ax][act[j]] = y(static_cast<Eigen::Index>(j));
        }
        SheetSample s;
        s.grid = grid_;
        s.values.resize(grid_.size());
        for (std::size_t p = 0; p < grid_.size(); ++p) {
            double v = 1.0;
            for (std::size_t ax = 0; ax < d_; ++ax) v *= path[ax][grid_.axis_index(p, ax)];
            s.values[p] = v;
        }
        s.provenance.source = Provenance::Source::ProductOracle;
        s.provenance.seed = seed;
        if (d_ >= 2)
            s.provenance.warning = "matches-covariance-only-not-law";
        return s;
    }

  private:
    EvalGrid grid_;
    std::size_t d_;
    std::vector<Eigen::MatrixXd> axis_lower_;
    std::vector<std::vector<std::size_t>> axis_active_;
    double jitter_used_ = 0.0;
};

inline SheetSample sample_product_oracle(const HurstField& field, const EvalGrid& grid,
                                         std::uint64_t seed) {
    return ProductOracleSampler(field, grid).sample(seed);
}

}  // namespace mrl
