#include <catch_amalgamated.hpp>

#include <cmath>

#include "mrl/mrl.hpp"

using Catch::Approx;
using mrl::HurstField;
using mrl::NoiseDist;
using mrl::TestFunction;

TEST_CASE("test functions integrate in closed form", "[diagnostics]") {
    auto one = TestFunction::constant(1.0);
    CHECK(one.integral(0.0, 1.0) == 1.0);
    CHECK(one.integral(0.2, 0.7) == Approx(0.5));
    CHECK(one.l2_norm_sq() == 1.0);

    auto lin = TestFunction::power(1.0);
    CHECK(lin.integral(0.0, 1.0) == Approx(0.5));
    CHECK(lin.integral(0.25, 0.5) == Approx((0.25 - 0.0625) / 2.0));
    CHECK(lin.l2_norm_sq() == Approx(1.0 / 3.0));

    auto st = TestFunction::step({0.5}, {1.0, 2.0});
    CHECK(st.integral(0.0, 1.0) == Approx(1.5));
    CHECK(st.integral(0.25, 0.75) == Approx(0.25 + 0.5));
    CHECK(st.l2_norm_sq() == Approx(0.5 + 4.0 * 0.5));
    // Integration windows clamp to [0,1].
    CHECK(st.integral(-1.0, 2.0) == Approx(1.5));

    CHECK_THROWS_AS(TestFunction::constant(-1.0), mrl::ArgumentError);
    CHECK_THROWS_AS(TestFunction::power(-0.5), mrl::ArgumentError);
    CHECK_THROWS_AS(TestFunction::step({0.5}, {1.0}), mrl::ArgumentError);
    CHECK_THROWS_AS(TestFunction::step({0.7, 0.5}, {1.0, 1.0, 1.0}),
                    mrl::ArgumentError);
    CHECK_THROWS_AS(TestFunction::step({1.0}, {1.0, 1.0}), mrl::ArgumentError);
    CHECK_THROWS_AS(TestFunction::step({0.5}, {1.0, -2.0}), mrl::ArgumentError);
}

TEST_CASE("second moment bound is exact and tight for constants", "[diagnostics]") {
    std::vector<TestFunction> ones = {TestFunction::constant(1.0),
                                      TestFunction::constant(1.0)};
    auto rep = mrl::check_moment_bound(ones, 8, 2, 0, 1);
    REQUIRE(rep.checks.size() == 1);
    const auto& c = rep.checks[0];
    CHECK(c.name == "moment.m2_exact");
    CHECK(c.pass);
    CHECK(c.observed == Approx(c.threshold).margin(1e-14));

    // f(u) = u at n = 4: the deterministic value is 336/1024.
    std::vector<TestFunction> lin = {TestFunction::power(1.0)};
    auto rep2 = mrl::check_moment_bound(lin, 4, 2, 0, 1);
    CHECK(rep2.checks[0].observed == Approx(0.328125).margin(1e-15));
    CHECK(rep2.checks[0].threshold == Approx(1.0 / 3.0).margin(1e-15));
    CHECK(rep2.checks[0].pass);

    // Mixed-function product in d = 2 multiplies the per-axis values.
    std::vector<TestFunction> mix = {TestFunction::constant(1.0),
                                     TestFunction::power(1.0)};
    auto rep3 = mrl::check_moment_bound(mix, 4, 2, 0, 1);
    CHECK(rep3.checks[0].observed == Approx(0.328125).margin(1e-14));
    CHECK(rep3.checks[0].pass);

    std::vector<TestFunction> st = {
        TestFunction::step({0.25, 0.5}, {2.0, 0.0, 1.0})};
    auto rep4 = mrl::check_moment_bound(st, 8, 2, 0, 1);
    CHECK(rep4.checks[0].pass);
}

TEST_CASE("second moment bound with Monte Carlo stays within its band",
          "[diagnostics]") {
    std::vector<TestFunction> lin = {TestFunction::power(1.0)};
    auto rep = mrl::check_moment_bound(lin, 4, 2, 5000, 99);
    REQUIRE(rep.checks.size() == 2);
    CHECK(rep.checks[1].name == "moment.ratio");
    CHECK(rep.checks[1].pass);
    CHECK(rep.checks[1].observed == Approx(0.963).margin(0.002));
    CHECK(rep.checks[1].standard_error.has_value());
}

TEST_CASE("fourth moment matches the Rademacher closed form", "[diagnostics]") {
    // E[(n^{1/2} sum z_k / n)^4] / 1 = 3 - 2/n for f = 1 in d = 1.
    std::vector<TestFunction> ones = {TestFunction::constant(1.0)};
    auto rep = mrl::check_moment_bound(ones, 8, 4, 50000, 17);
    REQUIRE(rep.checks.size() == 1);
    const auto& c = rep.checks[0];
    REQUIRE(c.standard_error.has_value());
    CHECK(std::fabs(c.observed - 2.75) <= 4.0 * *c.standard_error);
    CHECK_THROWS_AS(mrl::check_moment_bound(ones, 8, 4, 0, 17), mrl::ArgumentError);
    CHECK_THROWS_AS(mrl::check_moment_bound(ones, 8, 3, 100, 17), mrl::ArgumentError);
    CHECK_THROWS_AS(mrl::check_moment_bound(ones, 8, 10, 100, 17), mrl::ArgumentError);
}

TEST_CASE("fourth moment trend shows no growth in two dimensions",
          "[diagnostics]") {
    std::vector<TestFunction> fs = {TestFunction::constant(1.0),
                                    TestFunction::constant(1.0)};
    auto rep = mrl::check_moment_trend(fs, {8, 16, 32}, 4, 20000, 20250824);
    REQUIRE(rep.checks.size() == 4);
    CHECK(rep.checks[0].name == "moment.ratio.n8");
    CHECK(rep.checks[3].name == "moment.trend");
    CHECK(rep.checks[3].threshold == 3.0);
    CHECK(rep.checks[3].pass);
    // The underlying ratios hover near 3 - 2/n^2.
    for (int i = 0; i < 3; ++i) CHECK(rep.checks[i].observed == Approx(3.0).margin(0.25));
    CHECK_THROWS_AS(mrl::check_moment_trend(fs, {8}, 4, 100, 1), mrl::ArgumentError);
    CHECK_THROWS_AS(mrl::check_moment_trend(fs, {8, 16}, 4, 1, 1), mrl::ArgumentError);
}

TEST_CASE("lattice increments of the Brownian sheet are exact", "[diagnostics]") {
    auto field = HurstField::constant({0.5});
    std::vector<std::pair<std::vector<double>, std::vector<double>>> pairs;
    for (int j = 2; j <= 6; ++j)
        pairs.push_back({{0.75}, {0.75 - std::pow(2.0, -j)}});
    auto rep = mrl::increment_moment(field, 64, pairs, 2, 0, 1);
    REQUIRE(rep.checks.size() == pairs.size() + 1);
    // E[X(t) - X(s)]^2 = |t-s| on lattice points, so each ratio is exactly 1.
    for (std::size_t j = 0; j < pairs.size(); ++j)
        CHECK(rep.checks[j].observed == Approx(1.0).epsilon(1e-10));
    const auto& blow = rep.checks.back();
    CHECK(blow.name == "increment.no_blowup");
    CHECK(blow.pass);

    // Degenerate pair t == s contributes a zero ratio.
    auto same = mrl::increment_moment(field, 64, {{{0.5}, {0.5}}}, 2, 0, 1);
    CHECK(same.checks[0].observed == 0.0);
}

TEST_CASE("exact-covariance increments scale the same way", "[diagnostics]") {
    auto field = HurstField::constant({0.5});
    std::vector<std::pair<std::vector<double>, std::vector<double>>> pairs;
    for (int j = 2; j <= 6; ++j)
        pairs.push_back({{0.75}, {0.75 - std::pow(2.0, -j)}});
    auto rep = mrl::increment_moment(field, 64, pairs, 2, 0, 1,
                                     NoiseDist::Rademacher, 1,
                                     mrl::CovSource::Kind::ExactCov);
    CHECK(rep.checks.back().pass);
    for (std::size_t j = 0; j < pairs.size(); ++j) {
        CHECK(rep.checks[j].observed > 0.0);
        CHECK(rep.checks[j].observed < 2.0);
    }
}

TEST_CASE("fourth-moment increments match the walk closed form", "[diagnostics]") {
    // d=1, H=0.5, h=1/4 at n=16: 4 cells of width 1/16 contribute, so the
    // standardized fourth moment is 3 - 2/4 = 2.5.
    auto field = HurstField::constant({0.5});
    auto rep = mrl::increment_moment(field, 16, {{{0.75}, {0.5}}}, 4, 20000, 23);
    CHECK(rep.checks[0].observed == Approx(2.5).margin(0.15));
}

TEST_CASE("increment argument validation", "[diagnostics]") {
    auto field = HurstField::constant({0.5});
    CHECK_THROWS_AS(mrl::increment_moment(field, 16, {}, 2, 0, 1),
                    mrl::ArgumentError);
    CHECK_THROWS_AS(
        mrl::increment_moment(field, 16, {{{0.5}, {0.25}}}, 4, 0, 1),
        mrl::ArgumentError);
    CHECK_THROWS_AS(
        mrl::increment_moment(field, 16, {{{0.5, 0.5}, {0.25}}}, 2, 0, 1),
        mrl::ArgumentError);
}

TEST_CASE("holder slope recovers constant Hurst exponents", "[diagnostics]") {
    std::vector<double> ladder;
    for (int j = 0; j < 8; ++j) ladder.push_back(0.1 * std::pow(2.0, -j));
    for (double H : {0.3, 0.5, 0.75}) {
        auto field = HurstField::constant({H});
        auto res = mrl::holder_slope(field, mrl::CovSource::exact(), {0.9}, ladder, 0);
        INFO("H = " << H);
        CHECK(std::fabs(res.slope / 2.0 - H) < 0.01);
        CHECK(res.report.all_pass());
    }
    // Donsker covariance source on a lattice-aligned configuration.
    std::vector<double> dyadic;
    for (int j = 0; j < 9; ++j) dyadic.push_back(0.25 * std::pow(2.0, -j));
    auto field = HurstField::constant({0.5});
    auto res = mrl::holder_slope(field, mrl::CovSource::donsker(4096), {0.5}, dyadic, 0);
    CHECK(res.slope / 2.0 == Approx(0.5).margin(1e-9));
}

TEST_CASE("holder slope validates its configuration", "[diagnostics]") {
    auto field = HurstField::constant({0.5});
    CHECK_THROWS_AS(
        mrl::holder_slope(field, mrl::CovSource::exact(), {0.9}, {0.1, 0.05}, 0),
        mrl::ArgumentError);
    CHECK_THROWS_AS(mrl::holder_slope(field, mrl::CovSource::exact(), {0.9},
                                      {0.1, 0.09, 0.08}, 0),
                    mrl::ArgumentError);
    CHECK_THROWS_AS(mrl::holder_slope(field, mrl::CovSource::exact(), {0.3},
                                      {0.25, 0.025, 0.0025}, 0),
                    mrl::ArgumentError);
    CHECK_THROWS_AS(mrl::holder_slope(field, mrl::CovSource::exact(), {0.9},
                                      {0.1, 0.01, 0.01}, 0),
                    mrl::ArgumentError);
}

TEST_CASE("normality holds at interior points and fails for one cell",
          "[diagnostics]") {
    auto field = HurstField::constant({0.5});
    auto rep = mrl::ks_normality(field, 4, {0.9}, 2000, 2024,
                                 NoiseDist::StandardGaussian);
    CHECK(rep.checks[0].name == "ks.normality");
    CHECK(rep.checks[0].pass);
    CHECK(rep.checks[0].observed > 0.01);

    // n = 1 Rademacher puts all mass on two points; KS must reject.
    auto neg = mrl::ks_normality(field, 1, {1.0}, 2000, 2024);
    CHECK_FALSE(neg.checks[0].pass);

    CHECK_THROWS_AS(mrl::ks_normality(field, 4, {0.9}, 100, 1), mrl::ArgumentError);
    CHECK_THROWS_AS(mrl::ks_normality(field, 4, {0.0}, 2000, 1), mrl::ArgumentError);
}

TEST_CASE("ks pass rate across many pinned seeds", "[diagnostics]") {
    auto field = HurstField::constant({0.5});
    int passed = 0;
    for (std::uint64_t trial = 0; trial < 100; ++trial) {
        auto rep = mrl::ks_normality(field, 4, {0.9}, 1000,
                                     mrl::derive_seed(606, mrl::SeedTag::trial, trial),
                                     NoiseDist::StandardGaussian);
        if (rep.all_pass()) ++passed;
    }
    CHECK(passed >= 98);
}

TEST_CASE("fdd variances are exact on lattice configurations", "[diagnostics]") {
    auto field = HurstField::constant({0.5});
    mrl::FddSpec spec;
    spec.points = {{0.25}, {0.5}, {1.0}};
    spec.coeffs = {1.0, -1.0, 0.5};
    auto rep = mrl::fdd_convergence(field, spec, {8, 16, 32}, 1000, 4141, 0.02,
                                    NoiseDist::StandardGaussian);
    bool saw_final = false, saw_ks = false;
    for (const auto& c : rep.checks) {
        if (c.name == "fdd.final_gap") {
            saw_final = true;
            CHECK(c.observed == 0.0);
            CHECK(c.pass);
        }
        if (c.name == "fdd.ks") {
            saw_ks = true;
            CHECK(c.pass);
        }
        if (c.name == "fdd.trend") CHECK(c.observed == 0.0);
    }
    CHECK(saw_final);
    CHECK(saw_ks);
    CHECK(rep.all_pass());
}

TEST_CASE("fdd convergence for the varying field", "[diagnostics]") {
    auto field = HurstField::sinusoidal({0.5}, {0.2}, {1.0});
    mrl::FddSpec spec;
    spec.points = {{0.25}, {0.5}, {0.75}};
    spec.coeffs = {1.0, -1.0, 0.5};
    auto rep = mrl::fdd_convergence(field, spec, {16, 32, 64}, 0, 1, 0.02);
    CHECK(rep.all_pass());
    // Without replicates there is no KS line.
    for (const auto& c : rep.checks) CHECK(c.name != "fdd.ks");
}

TEST_CASE("fdd argument validation", "[diagnostics]") {
    auto field = HurstField::constant({0.5});
    mrl::FddSpec spec;
    spec.points = {{0.25}, {0.5}};
    spec.coeffs = {1.0, -1.0};
    CHECK_THROWS_AS(mrl::fdd_convergence(field, spec, {8, 16}, 0, 1),
                    mrl::ArgumentError);
    CHECK_THROWS_AS(mrl::fdd_convergence(field, spec, {8, 16, 16}, 0, 1),
                    mrl::ArgumentError);
    mrl::FddSpec zero;
    zero.points = {{0.25}};
    zero.coeffs = {0.0};
    CHECK_THROWS_AS(mrl::fdd_convergence(field, zero, {8, 16, 32}, 0, 1),
                    mrl::ArgumentError);
    mrl::FddSpec bad;
    bad.points = {{0.25, 0.5}};
    bad.coeffs = {1.0};
    CHECK_THROWS_AS(mrl::fdd_convergence(field, bad, {8, 16, 32}, 0, 1),
                    mrl::ArgumentError);
    mrl::FddSpec mismatch;
    mismatch.points = {{0.25}, {0.5}};
    mismatch.coeffs = {1.0};
    CHECK_THROWS_AS(mrl::fdd_convergence(field, mismatch, {8, 16, 32}, 0, 1),
                    mrl::ArgumentError);
}

TEST_CASE("empirical covariance handles crafted samples", "[diagnostics]") {
    auto grid = mrl::EvalGrid::single({1.0});
    auto make = [&](double v) {
        mrl::SheetSample s;
        s.grid = grid;
        s.values = {v};
        return s;
    };
    std::vector<mrl::SheetSample> anti = {make(2.0), make(-2.0), make(2.0),
                                          make(-2.0)};
    auto est = mrl::empirical_covariance(anti, 0, 0);
    CHECK(est.estimate == Approx(4.0));
    CHECK(est.se == Approx(0.0).margin(1e-12));

    CHECK_THROWS_AS(mrl::empirical_covariance({make(1.0)}, 0, 0),
                    mrl::ArgumentError);
    CHECK_THROWS_AS(mrl::empirical_covariance(anti, 0, 3), mrl::ArgumentError);
    std::vector<mrl::SheetSample> mixed = {make(1.0), make(1.0)};
    mixed[1].grid = mrl::EvalGrid::single({0.5});
    CHECK_THROWS_AS(mrl::empirical_covariance(mixed, 0, 0), mrl::ArgumentError);
}

TEST_CASE("moment checks are thread-count invariant", "[diagnostics]") {
    std::vector<TestFunction> fs = {TestFunction::power(1.0)};
    auto one = mrl::check_moment_bound(fs, 8, 4, 4000, 5, NoiseDist::Rademacher, 1);
    auto four = mrl::check_moment_bound(fs, 8, 4, 4000, 5, NoiseDist::Rademacher, 4);
    REQUIRE(one.checks.size() == four.checks.size());
    for (std::size_t i = 0; i < one.checks.size(); ++i)
        CHECK(one.checks[i] == four.checks[i]);
}
