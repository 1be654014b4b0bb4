#include <catch_amalgamated.hpp>

#include <cmath>

#include "mrl/hurst.hpp"
#include "mrl/kernel.hpp"
#include "oracles.hpp"

using Catch::Approx;

TEST_CASE("kernel evaluates the truncated power product", "[kernel]") {
    CHECK(mrl::kernel_eval({0.5, 0.5}, {0.25, 0.25}, {0.5, 0.5}) == 1.0);
    CHECK(mrl::kernel_eval({1.0, 1.0}, {0.5, 0.75}, {0.75, 0.25}) ==
          Approx(std::pow(2.0, 0.25)).epsilon(1e-14));
    // Any coordinate at or past t kills the indicator.
    CHECK(mrl::kernel_eval({0.5}, {0.5}, {0.7}) == 0.0);
    CHECK(mrl::kernel_eval({0.5, 0.9}, {0.2, 0.95}, {0.4, 0.6}) == 0.0);
}

TEST_CASE("kernel singularity and argument errors", "[kernel]") {
    CHECK_THROWS_AS(mrl::kernel_eval({0.5}, {0.5}, {0.3}), mrl::SingularityError);
    // The singularity scan covers every axis before the indicator zeroes out.
    CHECK_THROWS_AS(mrl::kernel_eval({1.0, 0.5}, {1.0, 0.5}, {0.3, 0.7}),
                    mrl::SingularityError);
    CHECK(mrl::kernel_eval({1.0, 0.5}, {0.5, 0.5}, {0.3, 0.7}) == 0.0);
    CHECK_THROWS_AS(mrl::kernel_eval({0.5}, {0.25}, {0.0}), mrl::ArgumentError);
    CHECK_THROWS_AS(mrl::kernel_eval({0.5}, {0.25}, {1.0}), mrl::ArgumentError);
    CHECK_THROWS_AS(mrl::kernel_eval({0.5, 0.5}, {0.25}, {0.4, 0.4}),
                    mrl::ArgumentError);
}

TEST_CASE("cell integral closed form matches hand values", "[kernel]") {
    CHECK(mrl::cell_integral_1d(1.0, 0.0, 0.5, 0.5) == 0.5);
    CHECK(mrl::cell_integral_1d(0.2, 0.5, 0.6, 0.4) == 0.0);
    CHECK(mrl::cell_integral_1d(1.0, 0.0, 1.0, 0.75) == Approx(0.8).epsilon(1e-14));
    // Frozen against the graded-mesh midpoint oracle.
    CHECK(mrl::cell_integral_1d(0.9, 0.5, 0.6, 0.3) ==
          Approx(0.12346485328844355).epsilon(1e-12));
    CHECK(mrl::cell_integral_1d(1.0, 0.75, 1.0, 0.05) ==
          Approx(0.84821181048800665).epsilon(1e-12));
}

TEST_CASE("cell integral argument validation", "[kernel]") {
    CHECK_THROWS_AS(mrl::cell_integral_1d(0.5, 0.6, 0.6, 0.5), mrl::ArgumentError);
    CHECK_THROWS_AS(mrl::cell_integral_1d(0.5, 0.7, 0.6, 0.5), mrl::ArgumentError);
    CHECK_THROWS_AS(mrl::cell_integral_1d(0.5, -0.1, 0.6, 0.5), mrl::ArgumentError);
    CHECK_THROWS_AS(mrl::cell_integral_1d(0.5, 0.1, 0.6, 0.0), mrl::ArgumentError);
    CHECK_THROWS_AS(mrl::cell_integral_1d(0.5, 0.1, 0.6, 1.0), mrl::ArgumentError);
}

TEST_CASE("cell integral agrees with the brute-force oracle", "[kernel]") {
    const double ts[] = {0.05, 0.31, 0.5, 0.77, 1.0};
    const double hs[] = {0.05, 0.3, 0.5, 0.62, 0.95};
    for (double t : ts)
        for (double h : hs) {
            for (double frac : {0.0, 0.35, 0.8}) {
                // Cell straddling or below t, including the singular last cell.
                const double a = frac * t;
                const double b = a + 0.25 * (t - a) + 0.05;
                const double lib = mrl::cell_integral_1d(t, a, b, h);
                const double ora = oracle::cell_integral(t, a, b, h);
                CHECK(lib == Approx(ora).margin(2e-7).epsilon(1e-7));
            }
        }
}

TEST_CASE("cell integral is additive across a split", "[kernel]") {
    const struct {
        double t, a, b, c, h;
    } cases[] = {
        {0.9, 0.1, 0.7, 0.4, 0.3},
        {1.0, 0.0, 1.0, 0.5, 0.05},
        {0.63, 0.2, 0.9, 0.63, 0.85},
        {0.5, 0.25, 0.5, 0.375, 0.5},
    };
    for (const auto& c : cases) {
        const double whole = mrl::cell_integral_1d(c.t, c.a, c.b, c.h);
        const double split = mrl::cell_integral_1d(c.t, c.a, c.c, c.h) +
                             mrl::cell_integral_1d(c.t, c.c, c.b, c.h);
        CHECK(whole == Approx(split).epsilon(1e-12));
    }
}

TEST_CASE("support cell count", "[kernel]") {
    CHECK(mrl::support_cells(0.0, 8) == 0);
    CHECK(mrl::support_cells(-0.5, 8) == 0);
    CHECK(mrl::support_cells(1.0, 8) == 8);
    CHECK(mrl::support_cells(0.125, 8) == 1);
    CHECK(mrl::support_cells(0.126, 8) == 2);
    CHECK(mrl::support_cells(0.9, 1) == 1);
}

TEST_CASE("weight rows sum to the full integral", "[kernel]") {
    for (double t : {0.37, 0.5, 1.0})
        for (double h : {0.05, 0.3, 0.5, 0.8})
            for (std::size_t n : {1u, 7u, 64u}) {
                auto row = mrl::CellIntegralTable::make_row(t, h, n);
                CHECK(row.size() == mrl::support_cells(t, n));
                double sum = 0.0;
                for (double w : row) sum += w;
                const double p = h + 0.5;
                CHECK(sum == Approx(std::pow(t, p) / p).epsilon(1e-10));
            }
}

TEST_CASE("weight table layouts agree for equivalent fields", "[kernel]") {
    // A gridded table with identical nodes is constant in effect but forces
    // the per-point layout; rows must match the separable constant field.
    auto grid = mrl::EvalGrid({{0.25, 0.75, 1.0}, {0.5, 1.0}});
    auto sep = mrl::HurstField::constant({0.35, 0.35});
    auto tab = mrl::HurstField::gridded(2, 2, {0.35, 0.35, 0.35, 0.35},
                                        {{0.3, 0.3}, {0.4, 0.4}, 1.0, 1.0});
    auto ta = mrl::CellIntegralTable::build(sep, 16, grid);
    auto tb = mrl::CellIntegralTable::build(tab, 16, grid);
    CHECK(ta.layout() == mrl::CellIntegralTable::Layout::Separable);
    CHECK(tb.layout() == mrl::CellIntegralTable::Layout::PerPoint);
    for (std::size_t p = 0; p < grid.size(); ++p)
        for (std::size_t ax = 0; ax < 2; ++ax) {
            const auto& ra = ta.row(p, ax);
            const auto& rb = tb.row(p, ax);
            REQUIRE(ra.size() == rb.size());
            for (std::size_t k = 0; k < ra.size(); ++k) CHECK(ra[k] == rb[k]);
        }
}
