// Hypothesis-test families: closed-form anchors (F = t^2 at k = 2, the exact
// bivariate orthant probability at zero statistics, the balanced
// order-restricted top-contrast value), permutation-test exactness, and the
// compatibility laws between p-values, rejections, and confidence intervals.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <vector>

#include "doctest.h"
#include "trendmct/errors.hpp"
#include "trendmct/rng.hpp"
#include "trendmct/tests.hpp"

using namespace trendmct;

namespace {

OneWayLayout make_layout(std::vector<std::vector<double>> groups) {
    OneWayLayout layout;
    layout.responses = std::move(groups);
    for (std::size_t i = 0; i < layout.responses.size(); ++i)
        layout.levels.push_back("g" + std::to_string(i + 1));
    return layout;
}

OneWayLayout random_layout(CounterRng& rng, std::size_t k, int n_lo, int n_hi,
                           double trend = 0.0) {
    std::vector<std::vector<double>> groups(k);
    for (std::size_t g = 0; g < k; ++g) {
        const int n = n_lo + static_cast<int>(rng.next_below(
                                 static_cast<std::uint64_t>(n_hi - n_lo + 1)));
        for (int i = 0; i < n; ++i)
            groups[g].push_back(rng.next_normal() + trend * static_cast<double>(g));
    }
    return make_layout(std::move(groups));
}

}  // namespace

TEST_CASE("anova: equal group means give F = 0 and p = 1") {
    const OneWayLayout layout =
        make_layout({{1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}});
    const TestReport report = anova_f(layout);
    CHECK(report.statistics[0] == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
    CHECK(report.global_p == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(report.df == 6);
}

TEST_CASE("anova: all observations identical is degenerate") {
    CHECK_THROWS_AS(anova_f(make_layout({{2.0, 2.0}, {2.0, 2.0}})), DataError);
}

TEST_CASE("anova at k = 2 equals the squared two-sample t test") {
    CounterRng rng({2026u, 30u});
    for (int trial = 0; trial < 20; ++trial) {
        const OneWayLayout layout = random_layout(rng, 2, 4, 12, 0.4);
        const TestReport report = anova_f(layout);

        const GroupEstimates est = summarize(layout, VarianceMode::Pooled);
        const double n0 = est.group_sizes[0], n1 = est.group_sizes[1];
        const double t = (est.means[1] - est.means[0]) /
                         std::sqrt(est.pooled_s2 * (1.0 / n0 + 1.0 / n1));
        CHECK(report.statistics[0] == doctest::Approx(t * t).epsilon(1e-10));
        const double p_t = 2.0 * (1.0 - t_cdf(std::fabs(t), est.df));
        CHECK(report.global_p == doctest::Approx(p_t).epsilon(1e-10));
    }
}

TEST_CASE("zero statistics: the one-sided global p is the complementary orthant mass") {
    // Two contrasts with correlation -1/2 and all group means exactly equal:
    // P(T1 <= 0, T2 <= 0) = 1/4 + arcsin(-1/2)/(2 pi) = 1/6, so the adjusted
    // (and global) p-value is 5/6.
    const OneWayLayout layout = make_layout({{-1.0, 1.0}, {-1.0, 1.0}, {-1.0, 1.0}});
    const ContrastMatrix cm =
        custom_contrasts({{1.0, -1.0, 0.0}, {0.0, 1.0, -1.0}}, {2, 2, 2});
    TestSpec spec;
    spec.family = TestFamily::GrandMeanMCT;
    spec.sides = Sides::OneSided;
    const TestReport report = mct_with_contrasts(layout, spec, cm);
    CHECK(report.statistics[0] == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(report.statistics[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(report.global_p == doctest::Approx(5.0 / 6.0).epsilon(2e-3));

    // Two-sided at exactly zero statistics: the rectangle is empty, p = 1.
    spec.sides = Sides::TwoSided;
    const TestReport two = mct_with_contrasts(layout, spec, cm);
    CHECK(two.global_p == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("the global p-value is exactly the smallest adjusted p-value") {
    CounterRng rng({2026u, 31u});
    for (int trial = 0; trial < 10; ++trial) {
        const OneWayLayout layout = random_layout(rng, 4, 5, 9, 0.3);
        for (TestFamily family :
             {TestFamily::GrandMeanMCT, TestFamily::GrandMeanMCTPava, TestFamily::WilliamsMCT}) {
            TestSpec spec;
            spec.family = family;
            const TestReport report = mct(layout, spec);
            CHECK(report.global_p ==
                  *std::min_element(report.adjusted_p.begin(), report.adjusted_p.end()));
        }
    }
}

TEST_CASE("one-sided p never exceeds two-sided p on positive contrasts") {
    CounterRng rng({2026u, 32u});
    for (int trial = 0; trial < 8; ++trial) {
        const OneWayLayout layout = random_layout(rng, 4, 5, 9, 0.5);
        for (TestFamily family :
             {TestFamily::GrandMeanMCT, TestFamily::GrandMeanMCTPava, TestFamily::WilliamsMCT}) {
            TestSpec spec;
            spec.family = family;
            spec.sides = Sides::OneSided;
            const TestReport one = mct(layout, spec);
            spec.sides = Sides::TwoSided;
            const TestReport two = mct(layout, spec);
            const double slack = 2.0 * (one.mvt_error_bound + two.mvt_error_bound);
            for (std::size_t h = 0; h < one.statistics.size(); ++h) {
                if (one.statistics[h] > 0.0)
                    CHECK(one.adjusted_p[h] <= two.adjusted_p[h] + slack);
            }
        }
    }
}

TEST_CASE("monotone sample means: the isotonic family reports the same statistics") {
    const OneWayLayout layout =
        make_layout({{0.8, 1.2, 1.0}, {1.9, 2.1, 2.0}, {2.7, 3.3, 3.0}, {3.6, 4.4, 4.0}});
    TestSpec spec;
    spec.family = TestFamily::GrandMeanMCT;
    const TestReport arith = mct(layout, spec);
    spec.family = TestFamily::GrandMeanMCTPava;
    const TestReport iso = mct(layout, spec);
    REQUIRE(arith.statistics.size() == iso.statistics.size());
    for (std::size_t h = 0; h < arith.statistics.size(); ++h)
        CHECK(iso.statistics[h] == doctest::Approx(arith.statistics[h]).epsilon(1e-12));
}

TEST_CASE("decreasing direction mirrors the increasing analysis") {
    CounterRng rng({2026u, 33u});
    const OneWayLayout up = random_layout(rng, 4, 6, 6, 0.7);
    OneWayLayout down = up;
    for (auto& group : down.responses)
        for (double& v : group) v = -v;

    for (TestFamily family :
         {TestFamily::GrandMeanMCT, TestFamily::GrandMeanMCTPava, TestFamily::WilliamsMCT}) {
        TestSpec spec;
        spec.family = family;
        spec.direction = Direction::Increasing;
        const TestReport a = mct(up, spec);
        spec.direction = Direction::Decreasing;
        const TestReport b = mct(down, spec);
        CHECK(a.global_p == doctest::Approx(b.global_p).epsilon(1e-12));
        for (std::size_t h = 0; h < a.statistics.size(); ++h)
            CHECK(a.statistics[h] == doctest::Approx(-b.statistics[h]).epsilon(1e-12));
        if (a.confidence_intervals) {
            REQUIRE(b.confidence_intervals);
            for (std::size_t h = 0; h < a.confidence_intervals->size(); ++h) {
                const auto& ca = (*a.confidence_intervals)[h];
                const auto& cb = (*b.confidence_intervals)[h];
                CHECK(ca[0] == doctest::Approx(-cb[1]).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("rejections and simultaneous confidence intervals agree") {
    CounterRng rng({2026u, 34u});
    int checked = 0;
    for (int trial = 0; trial < 200; ++trial) {
        // Four recurring designs so the critical values amortize.
        const std::size_t k = 3;
        const int n = 5 + static_cast<int>(rng.next_below(2)) * 3;  // 5 or 8
        std::vector<std::vector<double>> groups(k);
        const double trend = 0.45 * rng.next_double();
        for (std::size_t g = 0; g < k; ++g)
            for (int i = 0; i < n; ++i)
                groups[g].push_back(rng.next_normal() + trend * static_cast<double>(g));
        const OneWayLayout layout = make_layout(std::move(groups));

        TestSpec spec;
        spec.family = trial % 2 == 0 ? TestFamily::GrandMeanMCT : TestFamily::WilliamsMCT;
        spec.sides = trial % 4 < 2 ? Sides::OneSided : Sides::TwoSided;
        spec.alpha = trial % 8 < 4 ? 0.05 : 0.2;
        spec.mvt.abs_tolerance = 3e-4;
        const TestReport report = mct(layout, spec);
        if (std::fabs(report.global_p - spec.alpha) <= 5e-3) continue;  // quadrature boundary
        ++checked;

        REQUIRE(report.confidence_intervals);
        bool any_excludes_zero = false;
        for (const auto& ci : *report.confidence_intervals) {
            if (spec.sides == Sides::OneSided) {
                if (ci[0] > 0.0) any_excludes_zero = true;
            } else {
                if (ci[0] > 0.0 || ci[1] < 0.0) any_excludes_zero = true;
            }
        }
        CHECK(report.rejects() == any_excludes_zero);
    }
    CHECK(checked >= 150);  // the boundary band must stay rare
}

TEST_CASE("classic balanced order-restricted statistic") {
    // Means (0, 1, 2, 3), within-group variance exactly 1, n = 10:
    // (3 - 0) / sqrt(2/10).
    const double a = std::sqrt(0.9);
    std::vector<std::vector<double>> groups(4);
    for (std::size_t g = 0; g < 4; ++g)
        for (int i = 0; i < 10; ++i)
            groups[g].push_back(static_cast<double>(g) + (i < 5 ? a : -a));
    const OneWayLayout layout = make_layout(std::move(groups));
    const double t = williams_statistic_classic(layout, Direction::Increasing);
    CHECK(t == doctest::Approx(6.7082039325).epsilon(1e-9));

    // Mirrored data under the decreasing direction gives the same value.
    OneWayLayout down = layout;
    for (auto& group : down.responses)
        for (double& v : group) v = -v;
    CHECK(williams_statistic_classic(down, Direction::Decreasing) ==
          doctest::Approx(t).epsilon(1e-12));

    // At k = 2 it is the pooled two-sample t statistic.
    const OneWayLayout pair = make_layout({{0.0, 2.0, 1.0}, {2.0, 4.0, 3.0}});
    const GroupEstimates est = summarize(pair, VarianceMode::Pooled);
    const double manual = (est.means[1] - est.means[0]) / std::sqrt(2.0 * est.pooled_s2 / 3.0);
    CHECK(williams_statistic_classic(pair, Direction::Increasing) ==
          doctest::Approx(manual).epsilon(1e-12));

    CHECK_THROWS_AS(
        williams_statistic_classic(make_layout({{1.0, 2.0}, {1.0, 2.0, 3.0}}),
                                   Direction::Increasing),
        DataError);
}

TEST_CASE("permutation test: group-symmetric data cannot be significant") {
    // Identical group contents: the observed restricted fit is flat, its
    // between-group numerator zero, and every relabeling ties or beats it.
    const OneWayLayout layout = make_layout({{-1.0, 1.0}, {-1.0, 1.0}, {-1.0, 1.0}});
    const TestReport report =
        bartholomew_permutation(layout, Direction::Increasing, 499, 7u);
    CHECK(report.global_p == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(report.statistics[0] == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
}

TEST_CASE("permutation test: perfectly separated trend attains the minimum p") {
    std::vector<std::vector<double>> groups(4);
    for (std::size_t g = 0; g < 4; ++g) {
        const double center = 10.0 * static_cast<double>(g);
        groups[g] = {center - 0.01, center, center + 0.01};
    }
    const OneWayLayout layout = make_layout(std::move(groups));
    const TestReport report =
        bartholomew_permutation(layout, Direction::Increasing, 999, 7u);
    CHECK(report.global_p == doctest::Approx(1.0 / 1000.0).epsilon(1e-12));
    // The restricted fit explains almost all of the total sum of squares.
    CHECK(report.statistics[0] > 0.99);
    CHECK(report.statistics[0] <= 1.0 + 1e-12);

    // Tested against the wrong direction the same data is hopeless: the
    // observed numerator collapses to zero and every replicate ties it.
    const TestReport wrong =
        bartholomew_permutation(layout, Direction::Decreasing, 999, 7u);
    CHECK(wrong.global_p == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("permutation p-values are super-uniform under the null") {
    // Exchangeable data: P(p <= alpha) must not exceed alpha (up to noise).
    const int runs = 2500;
    const int permutations = 199;
    std::vector<double> pvals;
    pvals.reserve(runs);
    for (int r = 1; r <= runs; ++r) {
        std::vector<std::vector<double>> groups(4);
        for (std::size_t g = 0; g < 4; ++g) {
            CounterRng rng({909u, static_cast<std::uint64_t>(r), g + 1});
            for (int i = 0; i < 5; ++i) groups[g].push_back(rng.next_normal());
        }
        const TestReport report = bartholomew_permutation(
            make_layout(std::move(groups)), Direction::Increasing, permutations,
            derive_key(0xBA5EBA11ull, static_cast<std::uint64_t>(r)));
        pvals.push_back(report.global_p);
    }
    for (double alpha : {0.01, 0.05, 0.10}) {
        const double hit = static_cast<double>(std::count_if(
                               pvals.begin(), pvals.end(),
                               [alpha](double p) { return p <= alpha; })) /
                           runs;
        CHECK(hit <= alpha + 0.01);
    }
}

TEST_CASE("permutation test configuration and degeneracy errors") {
    const OneWayLayout layout = make_layout({{1.0, 2.0}, {2.0, 3.0}});
    CHECK_THROWS_AS(bartholomew_permutation(layout, Direction::Increasing, 0, 1u),
                    ConfigError);
    CHECK_THROWS_AS(bartholomew_permutation(make_layout({{5.0, 5.0}, {5.0, 5.0}}),
                                            Direction::Increasing, 99, 1u),
                    DataError);
}

TEST_CASE("identical inputs give bit-identical reports") {
    CounterRng rng({2026u, 35u});
    const OneWayLayout layout = random_layout(rng, 4, 6, 10, 0.4);
    for (TestFamily family :
         {TestFamily::AnovaF, TestFamily::GrandMeanMCT, TestFamily::GrandMeanMCTPava,
          TestFamily::WilliamsMCT, TestFamily::BartholomewPermutation}) {
        TestSpec spec;
        spec.family = family;
        spec.permutations = 200;
        const TestReport a = run_test(layout, spec);
        const TestReport b = run_test(layout, spec);
        CHECK(a.global_p == b.global_p);
        REQUIRE(a.statistics.size() == b.statistics.size());
        for (std::size_t h = 0; h < a.statistics.size(); ++h) {
            CHECK(a.statistics[h] == b.statistics[h]);
            CHECK(a.adjusted_p[h] == b.adjusted_p[h]);
        }
    }
}

TEST_CASE("dispatcher rejects family/function mismatches") {
    const OneWayLayout layout = make_layout({{1.0, 2.0}, {2.0, 3.0}});
    TestSpec spec;
    spec.family = TestFamily::AnovaF;
    CHECK_THROWS_AS(mct(layout, spec), ConfigError);
    spec.family = TestFamily::BartholomewPermutation;
    CHECK_THROWS_AS(mct(layout, spec), ConfigError);
}
