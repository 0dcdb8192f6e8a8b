#pragma once

// Weighted isotonic regression by pool-adjacent-violators (PAVA), the
// order-restricted estimator that replaces arithmetic group means inside the
// trend tests. Stack-of-blocks implementation, O(k) amortized.

#include <cstddef>
#include <span>
#include <vector>

namespace trendmct {

enum class Direction { Increasing, Decreasing };

struct IsotonicInput {
    std::vector<double> values;   // typically group means
    std::vector<double> weights;  // strictly positive, typically group sizes
    Direction direction = Direction::Increasing;
};

struct IsotonicBlock {
    std::size_t first = 0;  // inclusive index range of the level set
    std::size_t last = 0;
    double value = 0.0;     // pooled (weighted mean) value of the block
    double weight = 0.0;    // total weight of the block
};

struct IsotonicFit {
    std::vector<double> fitted;
    std::vector<IsotonicBlock> blocks;
};

// Minimizes sum_i w_i (fit_i - values_i)^2 over vectors monotone in
// `direction`. Decreasing is realized by negating, fitting Increasing, and
// negating back. Adjacent blocks with exactly equal pooled values are kept as
// separate blocks (fitted values are identical either way).
IsotonicFit pava(std::span<const double> values, std::span<const double> weights,
                 Direction direction);

IsotonicFit pava(const IsotonicInput& input);

}  // namespace trendmct
