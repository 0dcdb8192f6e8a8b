#pragma once

// The hypothesis-test families: ANOVA F, min-p multiple contrast tests
// against the grand mean (arithmetic or order-restricted PAVA means, pooled
// or sandwich covariance), Williams-type multiple contrast tests, and the
// permutation version of the order-restricted sum-of-squares ratio test.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "trendmct/contrasts.hpp"
#include "trendmct/dist.hpp"
#include "trendmct/estimators.hpp"

namespace trendmct {

enum class TestFamily {
    AnovaF,
    GrandMeanMCT,
    GrandMeanMCTPava,
    WilliamsMCT,
    BartholomewPermutation,
};

std::string family_name(TestFamily family);

struct TestSpec {
    TestFamily family = TestFamily::GrandMeanMCT;
    Sides sides = Sides::OneSided;            // ignored by AnovaF
    VarianceMode variance_mode = VarianceMode::Pooled;
    Direction direction = Direction::Increasing;  // ignored by AnovaF
    double alpha = 0.05;
    int permutations = 10000;                 // BartholomewPermutation only
    HcFlavor hc = HcFlavor::HC3;
    StudentizeMode studentize = StudentizeMode::FullStandardError;
    std::uint64_t perm_seed = 0xBA5EBA11ull;  // BartholomewPermutation only
    MvtOptions mvt;
};

struct TestReport {
    std::vector<double> statistics;  // per contrast; single entry for F / E-bar^2
    std::vector<double> adjusted_p;
    double global_p = 1.0;           // min of adjusted_p for MCT families
    // Simultaneous confidence intervals (arithmetic-means MCT families only).
    std::optional<std::vector<std::array<double, 2>>> confidence_intervals;
    int df = 0;
    TestSpec method;
    double mvt_error_bound = 0.0;

    bool rejects() const { return global_p <= method.alpha; }
};

// One-way ANOVA F test. Throws DataError when total variance is degenerate.
TestReport anova_f(const OneWayLayout& layout);

// Min-p multiple contrast test. The contrast family follows spec.family:
// GrandMeanMCT / GrandMeanMCTPava use grand-mean rows, WilliamsMCT uses
// Williams rows with arithmetic means. Arithmetic families are referenced
// against the xi-variate t with df = N - k; the PAVA family computes adjusted
// p-values from absolute statistics against the normal-limit reference (its
// null distribution is only approximated - see README "Methods").
TestReport mct(const OneWayLayout& layout, const TestSpec& spec);

// Same machinery on a caller-supplied contrast matrix (arithmetic means).
TestReport mct_with_contrasts(const OneWayLayout& layout, const TestSpec& spec,
                              const ContrastMatrix& cm);

// Original order-restricted trend statistic for balanced designs: isotonic
// estimate of the top dose group (amalgamated over the non-control groups)
// minus the control mean, scaled by sqrt(2 S^2 / n). Reported for reference;
// no p-value (its historical tables are out of scope). For Decreasing the
// mirrored statistic is returned, so a trend in the stated direction is
// positive.
double williams_statistic_classic(const OneWayLayout& layout, Direction direction);

// Permutation test of the order-restricted between-group sum-of-squares
// ratio: observed statistic uses the a-priori direction; each permuted
// reference statistic takes the better of the two directions, giving a
// deliberately conservative reference (see README "Methods"). p-value is
// (1 + #{reference >= observed}) / (permutations + 1).
TestReport bartholomew_permutation(const OneWayLayout& layout, Direction direction,
                                   int permutations, std::uint64_t seed);

// Convenience dispatcher used by the CLI and simulation harness.
TestReport run_test(const OneWayLayout& layout, const TestSpec& spec);

}  // namespace trendmct
