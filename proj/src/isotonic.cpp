#include "trendmct/isotonic.hpp"

#include <cmath>

#include "trendmct/errors.hpp"

namespace trendmct {

namespace {

void validate(std::span<const double> values, std::span<const double> weights) {
    if (values.empty()) throw DataError("pava: empty input");
    if (values.size() != weights.size())
        throw DataError("pava: values and weights differ in length");
    for (double v : values) {
        if (!std::isfinite(v)) throw DataError("pava: non-finite value");
    }
    for (double w : weights) {
        if (!(w > 0.0) || !std::isfinite(w)) throw DataError("pava: weights must be positive and finite");
    }
}

IsotonicFit fit_increasing(std::span<const double> values, std::span<const double> weights) {
    const std::size_t k = values.size();
    std::vector<IsotonicBlock> stack;
    stack.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        stack.push_back({i, i, values[i], weights[i]});
        // Merge while the previous block strictly violates the order; blocks
        // with equal pooled values stay separate.
        while (stack.size() > 1 && stack[stack.size() - 2].value > stack.back().value) {
            IsotonicBlock top = stack.back();
            stack.pop_back();
            IsotonicBlock& prev = stack.back();
            const double total = prev.weight + top.weight;
            prev.value = (prev.weight * prev.value + top.weight * top.value) / total;
            prev.weight = total;
            prev.last = top.last;
        }
    }
    IsotonicFit fit;
    fit.fitted.resize(k);
    fit.blocks = std::move(stack);
    for (const IsotonicBlock& b : fit.blocks) {
        for (std::size_t i = b.first; i <= b.last; ++i) fit.fitted[i] = b.value;
    }
    return fit;
}

}  // namespace

IsotonicFit pava(std::span<const double> values, std::span<const double> weights,
                 Direction direction) {
    validate(values, weights);
    if (direction == Direction::Increasing) return fit_increasing(values, weights);
    std::vector<double> negated(values.begin(), values.end());
    for (double& v : negated) v = -v;
    IsotonicFit fit = fit_increasing(negated, weights);
    for (double& v : fit.fitted) v = -v;
    for (IsotonicBlock& b : fit.blocks) b.value = -b.value;
    return fit;
}

IsotonicFit pava(const IsotonicInput& input) {
    return pava(input.values, input.weights, input.direction);
}

}  // namespace trendmct
