#pragma once

// Random number generation with fixed, platform-independent semantics.
//
// Every random quantity in the library comes from SplitMix64 (Steele, Lea and
// Flood, "Fast splittable pseudorandom number generators", OOPSLA 2014). The
// generator is a counter: output k of a stream seeded with s is
// mix64(s + (k + 1) * 0x9E3779B97F4A7C15). Derived seeds are produced with
// derive_seed(), which folds extra integers into a seed through the same
// finalizer. Conversion to doubles uses the top 53 bits, so results do not
// depend on the standard library's distribution implementations.

#include <cstdint>
#include <initializer_list>

namespace esplab {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

/// SplitMix64 output finalizer (variant 13 of Stafford's mixers).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Fold each value of `path` into `seed`: s <- mix64(s + (v + 1) * gamma).
/// derive_seed(s, {a, b}) == derive_seed(derive_seed(s, {a}), {b}).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) noexcept
{
    for (std::uint64_t v : path)
        seed = mix64(seed + (v + 1) * kGoldenGamma);
    return seed;
}

class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_{seed} {}

    constexpr result_type operator()() noexcept
    {
        state_ += kGoldenGamma;
        return mix64(state_);
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~result_type{0}; }

    /// Uniform on [0, 1), multiples of 2^-53.
    constexpr double uniform01() noexcept
    {
        return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
    }

    /// Uniform on the open interval (0, 1): midpoints of the 2^-53 lattice.
    constexpr double uniform_open01() noexcept
    {
        return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Uniform on [-1, 1).
    constexpr double uniform_pm1() noexcept { return 2.0 * uniform01() - 1.0; }

    /// Uniform on the open interval (-1, 1).
    constexpr double uniform_open_pm1() noexcept { return 2.0 * uniform_open01() - 1.0; }

private:
    std::uint64_t state_;
};

} // namespace esplab
