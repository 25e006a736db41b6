#pragma once

// Portable random helpers. std::mt19937_64 is fully specified by the standard,
// the distributions in <random> are not, so uniform and normal draws are built
// here to keep seeded results identical across standard libraries.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>

namespace simmark::rng {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline constexpr std::uint64_t fnv1a64(std::string_view bytes,
                                       std::uint64_t basis = 0xCBF29CE484222325ull) noexcept {
    std::uint64_t h = basis;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

/// Small-state engine for hot loops (seeding std::mt19937_64 is comparatively costly).
class SplitMix64 {
public:
    using result_type = std::uint64_t;
    explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}
    constexpr result_type operator()() noexcept {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~std::uint64_t{0}; }

private:
    std::uint64_t state_;
};

/// Derives an independent stream seed for item `index` under `root`.
inline constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) noexcept {
    return splitmix64(splitmix64(root) ^ splitmix64(index + 0x632BE59BD9B4E019ull));
}

/// Uniform on [0, 1) with 53 random bits.
template <class Engine>
double uniform01(Engine& engine) {
    return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

/// Standard normal draw by Box-Muller (one value per call).
template <class Engine>
double standard_normal(Engine& engine) {
    double u1 = uniform01(engine);
    while (u1 <= 0.0) u1 = uniform01(engine);
    const double u2 = uniform01(engine);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

template <class Engine>
bool bernoulli(Engine& engine, double p) {
    return uniform01(engine) < p;
}

/// Uniform integer in [0, n).
template <class Engine>
std::uint64_t below(Engine& engine, std::uint64_t n) {
    return static_cast<std::uint64_t>(uniform01(engine) * static_cast<double>(n)) % n;
}

} // namespace simmark::rng
