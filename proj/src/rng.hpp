#pragma once

#include <cstdint>
#include <cmath>
#include <numbers>
#include <random>
#include <string_view>
#include <vector>

namespace microagg::rng {

/// Generator identifier recorded in manifests/reports. The mt19937_64 stream
/// is pinned by the C++ standard and the transforms below are hand-rolled,
/// so sequences are identical across standard libraries.
inline constexpr std::string_view kGeneratorName = "mt19937_64+boxmuller/1";

inline std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Child-seed derivation: splitmix64(root XOR FNV-1a64(tag)). Tags are
/// human-readable, e.g. "repeat=1/level=k=50/model=mlp".
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view tag) {
    return splitmix64(root ^ fnv1a64(tag));
}

class Prng {
public:
    explicit Prng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next() { return gen_(); }

    /// Uniform in [0, 1) with 53-bit resolution.
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Unbiased uniform integer in [0, n) via rejection sampling.
    std::uint64_t uniform_below(std::uint64_t n) {
        if (n == 0) return 0;
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return x % n;
    }

    /// Standard normal via Box-Muller (no cached spare, one value per call).
    double normal() {
        double u1 = uniform01();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Draws n distinct indices from [0, pool) via partial Fisher-Yates;
    /// result order is the draw order, not sorted.
    std::vector<std::size_t> sample_indices(std::size_t pool, std::size_t n) {
        std::vector<std::size_t> idx(pool);
        for (std::size_t i = 0; i < pool; ++i) idx[i] = i;
        for (std::size_t i = 0; i < n && i < pool; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(uniform_below(pool - i));
            std::swap(idx[i], idx[j]);
        }
        idx.resize(n < pool ? n : pool);
        return idx;
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace microagg::rng
