#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "mrl/errors.hpp"

namespace mrl {

// Neumaier compensated accumulator. Summation order still matters for bitwise
// reproducibility, so reductions feed values in a fixed sequence.
class CompensatedSum {
  public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double norm_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

inline MeanSe mean_se(const std::vector<double>& xs) {
    if (xs.empty()) throw ArgumentError("mean_se: empty sample");
    CompensatedSum s;
    for (double x : xs) s.add(x);
    const double m = s.value() / static_cast<double>(xs.size());
    CompensatedSum sq;
    for (double x : xs) sq.add((x - m) * (x - m));
    const double n = static_cast<double>(xs.size());
    const double var = xs.size() > 1 ? sq.value() / (n - 1.0) : 0.0;
    return {m, std::sqrt(var / n)};
}

/// Two-sided asymptotic Kolmogorov p-value with the Stephens small-sample
/// correction: lambda = (sqrt(N) + 0.12 + 0.11/sqrt(N)) * D.
inline double kolmogorov_pvalue(double d_stat, std::size_t n) {
    if (n == 0) throw ArgumentError("kolmogorov_pvalue: empty sample");
    const double sn = std::sqrt(static_cast<double>(n));
    const double lambda = (sn + 0.12 + 0.11 / sn) * d_stat;
    if (lambda < 1e-8) return 1.0;
    double p = 0.0;
    double sign = 1.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = std::exp(-2.0 * lambda * lambda * j * j);
        p += sign * term;
        sign = -sign;
        if (term < 1e-12) break;
    }
    p *= 2.0;
    return std::clamp(p, 0.0, 1.0);
}

struct KsResult {
    double d_stat = 0.0;
    double p_value = 0.0;
};

/// One-sample KS test of `sample` against the standard normal CDF.
inline KsResult ks_test_normal(std::vector<double> sample) {
    if (sample.empty()) throw ArgumentError("ks_test_normal: empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = norm_cdf(sample[i]);
        const double lo = static_cast<double>(i) / n;
        const double hi = static_cast<double>(i + 1) / n;
        d = std::max({d, f - lo, hi - f});
    }
    return {d, kolmogorov_pvalue(d, sample.size())};
}

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
};

/// Ordinary least squares y = slope*x + intercept.
inline SlopeFit fit_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw ArgumentError("fit_slope: need at least two (x, y) pairs");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(xs.size());
    my /= static_cast<double>(xs.size());
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx == 0.0) throw ArgumentError("fit_slope: degenerate abscissae");
    const double slope = sxy / sxx;
    return {slope, my - slope * mx};
}

}  // namespace mrl
