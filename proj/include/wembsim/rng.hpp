#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

namespace wembsim {

// xorshift64* generator. The exact update sequence is part of the report
// reproducibility contract: given the same seed, every implementation of
// this algorithm draws the same reference samples.
//
//   x ^= x >> 12;  x ^= x << 25;  x ^= x >> 27;  return x * 2685821657736338717
//
// A zero seed is remapped to a fixed nonzero constant (the all-zero state
// is a fixed point of xorshift).
class Xorshift64Star {
public:
    explicit Xorshift64Star(std::uint64_t seed = 42)
        : state_(seed != 0 ? seed : 0x9e3779b97f4a7c15ULL) {}

    std::uint64_t next() {
        std::uint64_t x = state_;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        state_ = x;
        return x * 2685821657736338717ULL;
    }

    // Uniform draw in [0, n) by modulo reduction (n is tiny against 2^64;
    // the reduction is part of the documented sampling algorithm).
    std::uint64_t bounded(std::uint64_t n) { return next() % n; }

private:
    std::uint64_t state_;
};

// Draws k distinct indices from [0, population) by partial Fisher-Yates:
// for i in 0..k-1 swap position i with position i + bounded(population - i).
// The first k slots, in draw order, are the sample.
inline std::vector<std::size_t> sample_without_replacement(std::size_t population,
                                                           std::size_t k,
                                                           Xorshift64Star& rng) {
    std::vector<std::size_t> indices(population);
    std::iota(indices.begin(), indices.end(), std::size_t{0});
    if (k > population) k = population;
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.bounded(population - i));
        std::swap(indices[i], indices[j]);
    }
    indices.resize(k);
    return indices;
}

} // namespace wembsim
