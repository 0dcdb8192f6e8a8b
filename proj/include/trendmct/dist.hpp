#pragma once

// Multivariate t / normal rectangle probabilities and equicoordinate
// quantiles, via separation-of-variables over a randomized rank-1 lattice
// (Richtmyer generators, tent transform, shifted randomizations).
//
// df == 0 encodes the normal limit (df -> infinity); df >= 1 is central
// multivariate t with that common df. Results are a pure function of the
// problem plus the integrator seed, so every caller is reproducible.

#include <cstdint>
#include <vector>

#include "trendmct/contrasts.hpp"

namespace trendmct {

enum class Sides { OneSided, TwoSided };

struct MvtOptions {
    double abs_tolerance = 1e-4;
    // Total evaluation budget: lattice points summed over all randomizations.
    std::size_t max_samples = (std::size_t{1} << 17) * 12;
    std::uint64_t seed = 0x71D0C0FFEEull;  // fixed default; part of the API
};

struct MvtProblem {
    std::vector<double> lower;  // -inf allowed
    std::vector<double> upper;  // +inf allowed
    CorrelationMatrix correlation;
    int df = 0;  // 0 => normal limit
    MvtOptions options;
};

struct ProbabilityEstimate {
    double value = 0.0;
    double error_bound = 0.0;      // estimated 3.5-sigma Monte Carlo error
    bool accuracy_warning = false; // budget exhausted with error > 10x tolerance
};

// P(lower <= T <= upper) for T ~ central multivariate t(df, R) (or normal
// when df == 0). Degenerate (singular) correlation matrices are handled by
// clamping nonpositive Cholesky pivots; matrices indefinite beyond tolerance
// raise NumericError.
ProbabilityEstimate mvt_rectangle(const MvtProblem& problem);

// q such that P(max T_i <= q) = prob (OneSided) or P(max |T_i| <= q) = prob
// (TwoSided), by bisection over q in [0, 50] with a fixed integrator seed per
// evaluation (monotone in q). Tolerance is in q units.
double mvt_equicoordinate_quantile(double prob, const CorrelationMatrix& R, int df,
                                   Sides sides, double q_tolerance = 1e-3,
                                   const MvtOptions& options = MvtOptions{});

}  // namespace trendmct
