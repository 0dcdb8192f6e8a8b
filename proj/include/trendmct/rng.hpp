#pragma once

// Counter-based pseudo-random generator with an explicit substream scheme.
//
// Every stream is identified by a chain of 64-bit keys (e.g. scenario seed,
// run index, group index). Draws are a pure function of (keys, counter), so
// any single simulation run is reconstructible in isolation and parallel
// schedules cannot change the numbers. Output quality comes from the
// splitmix64 finalizer, which is a bijective avalanche mix.

#include <cstdint>
#include <initializer_list>

#include "trendmct/special_functions.hpp"

namespace trendmct {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Derive a child key from a parent key and a stream index.
inline std::uint64_t derive_key(std::uint64_t parent, std::uint64_t index) {
    return mix64(parent ^ mix64(index + kGolden));
}

class CounterRng {
public:
    explicit CounterRng(std::uint64_t key) : key_(mix64(key + kGolden)) {}

    CounterRng(std::initializer_list<std::uint64_t> keys) : key_(kGolden) {
        for (std::uint64_t k : keys) key_ = derive_key(key_, k);
    }

    std::uint64_t next_u64() {
        counter_ += kGolden;
        return mix64(key_ ^ counter_);
    }

    // Uniform in the open interval (0, 1); never returns 0 or 1 exactly.
    double next_double() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal by inverse-cdf transform: bit-reproducible everywhere.
    double next_normal() { return norm_quantile(next_double()); }

    // Uniform integer in [0, bound); masked rejection, deterministic across
    // platforms (no 128-bit arithmetic, no division-based pathways).
    std::uint64_t next_below(std::uint64_t bound) {
        if (bound <= 1) return 0;
        std::uint64_t mask = bound - 1;
        mask |= mask >> 1;  mask |= mask >> 2;  mask |= mask >> 4;
        mask |= mask >> 8;  mask |= mask >> 16; mask |= mask >> 32;
        for (;;) {
            const std::uint64_t candidate = next_u64() & mask;
            if (candidate < bound) return candidate;
        }
    }

    // Fisher-Yates shuffle of data[0..n).
    template <typename T>
    void shuffle(T* data, std::size_t n) {
        for (std::size_t i = n - 1; i > 0; --i) {
            const std::size_t j = static_cast<std::size_t>(next_below(i + 1));
            T tmp = data[i];
            data[i] = data[j];
            data[j] = tmp;
        }
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace trendmct
