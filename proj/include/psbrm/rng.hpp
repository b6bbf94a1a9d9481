#pragma once

#include <array>
#include <cstdint>

namespace psbrm {

/// xoshiro256** (Blackman & Vigna), state seeded by four splitmix64 draws.
///
/// Every random quantity in the toolkit comes from this generator so that a
/// seed means the same thing in any implementation that follows the same
/// recipe: uniform doubles are (next() >> 11) * 2^-53 and normals use the
/// cosine branch of Box-Muller on two consecutive uniforms.
class Xoshiro256 {
public:
    explicit Xoshiro256(std::uint64_t seed) noexcept;

    std::uint64_t next() noexcept;

    /// Uniform in [0, 1).
    double uniform() noexcept;
    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) noexcept;
    /// Standard normal.
    double normal() noexcept;
    /// Uniform integer in [0, bound). bound must be > 0.
    std::uint64_t below(std::uint64_t bound) noexcept;

private:
    std::array<std::uint64_t, 4> s_{};
};

std::uint64_t splitmix64(std::uint64_t& state) noexcept;

} // namespace psbrm
