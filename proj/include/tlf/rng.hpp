#pragma once

#include <cstdint>

#include "tlf/tensor.hpp"

namespace tlf {

// 64-bit linear congruential generator (Knuth MMIX constants) with Box-Muller
// normals. The sequence is fully specified so other implementations can
// reproduce synthetic noise bit-for-bit:
//   state <- a * state + c (mod 2^64), uniform = (state >> 11) * 2^-53,
//   normals come in pairs from u1 = 1 - uniform, u2 = uniform:
//   r = sqrt(-2 ln u1), (r cos 2 pi u2, r sin 2 pi u2).
class Lcg64 {
public:
    static constexpr std::uint64_t kMultiplier = 6364136223846793005ULL;
    static constexpr std::uint64_t kIncrement = 1442695040888963407ULL;

    explicit Lcg64(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next_u64() noexcept {
        state_ = kMultiplier * state_ + kIncrement;
        return state_;
    }

    // Uniform in [0, 1).
    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double normal() noexcept;

private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

ImageTensor random_uniform(Shape shape, Lcg64& rng, double lo = 0.0, double hi = 1.0);
ImageTensor random_normal(Shape shape, Lcg64& rng);

// Adds N(0, (percent/100)^2) noise, i.e. standard deviation given as a
// percentage of the unit peak.
ImageTensor add_gaussian_noise(const ImageTensor& x, double percent, std::uint64_t seed);

}  // namespace tlf
