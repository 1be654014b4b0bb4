#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

#include "mrl/errors.hpp"

namespace mrl {

struct GaussNode {
    double x;
    double w;
};

// 16-point Gauss-Legendre rule on [-1, 1].
inline constexpr std::array<GaussNode, 16> kGauss16 = {{
    {-0.98940093499164994, 0.027152459411754037},
    {-0.9445750230732326, 0.062253523938647706},
    {-0.86563120238783176, 0.095158511682492591},
    {-0.755404408355003, 0.12462897125553403},
    {-0.61787624440264377, 0.14959598881657676},
    {-0.45801677765722737, 0.16915651939500262},
    {-0.28160355077925892, 0.18260341504492361},
    {-0.095012509837637454, 0.18945061045506859},
    {0.095012509837637454, 0.18945061045506859},
    {0.28160355077925892, 0.18260341504492361},
    {0.45801677765722737, 0.16915651939500262},
    {0.61787624440264377, 0.14959598881657676},
    {0.755404408355003, 0.12462897125553403},
    {0.86563120238783176, 0.095158511682492591},
    {0.9445750230732326, 0.062253523938647706},
    {0.98940093499164994, 0.027152459411754037},
}};

/// Composite 16-point Gauss-Legendre over [a, b] with `panels` equal panels.
template <typename F>
double gauss_composite(F&& f, double a, double b, std::size_t panels) {
    if (!(b > a)) return 0.0;
    const double h = (b - a) / static_cast<double>(panels);
    double total = 0.0;
    for (std::size_t p = 0; p < panels; ++p) {
        const double lo = a + h * static_cast<double>(p);
        const double mid = lo + 0.5 * h;
        double acc = 0.0;
        for (const auto& node : kGauss16) acc += node.w * f(mid + 0.5 * h * node.x);
        total += 0.5 * h * acc;
    }
    return total;
}

// Panel-doubling refinement: accept when two successive levels agree to
// rel_tol. Returns the finer estimate; sets *converged if requested.
template <typename F>
double gauss_adaptive(F&& f, double a, double b, double rel_tol,
                      std::size_t max_panels = 4096, bool* converged = nullptr) {
    if (converged) *converged = true;
    if (!(b > a)) return 0.0;
    double prev = gauss_composite(f, a, b, 1);
    for (std::size_t panels = 2; panels <= max_panels; panels *= 2) {
        const double cur = gauss_composite(f, a, b, panels);
        const double scale = std::max({std::abs(cur), std::abs(prev), 1e-300});
        if (std::abs(cur - prev) <= rel_tol * scale) return cur;
        prev = cur;
    }
    if (converged)
        *converged = false;
    return prev;
}

// Geometrically graded panels accumulating toward the right endpoint b, for
// integrands with an integrable singularity at b. Boundaries x_j = b -
// (b-a)*ratio^j; the sliver [x_levels, b] is dropped, which for exponents
// > -1/2 contributes O(ratio^{levels/2}) and vanishes at large `levels`.
template <typename F>
double gauss_graded_toward(F&& f, double a, double b, double ratio, std::size_t levels) {
    if (!(b > a)) return 0.0;
    if (!(ratio > 0.0 && ratio < 1.0))
        throw ArgumentError("gauss_graded_toward: ratio must lie in (0,1)");
    double total = 0.0;
    double lo = a;
    double width = (b - a) * ratio;
    for (std::size_t j = 0; j < levels; ++j) {
        const double hi = b - width;
        if (!(hi > lo)) break;
        const double mid = 0.5 * (lo + hi);
        const double half = 0.5 * (hi - lo);
        double acc = 0.0;
        for (const auto& node : kGauss16) acc += node.w * f(mid + half * node.x);
        total += half * acc;
        lo = hi;
        width *= ratio;
    }
    return total;
}

}  // namespace mrl
