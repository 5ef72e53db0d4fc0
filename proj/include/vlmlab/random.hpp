// Deterministic seeded randomness. Every stochastic operation in the library
// takes a RandomSource explicitly; there is no ambient global state.
//
// The core generator is splitmix64, so identical seeds produce identical
// draw sequences on every platform. Independent sub-sources are derived
// from (seed, index) for parallel or per-trial use.

#ifndef VLMLAB_RANDOM_HPP
#define VLMLAB_RANDOM_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace vlmlab {

class RandomSource {
public:
    explicit RandomSource(std::uint64_t seed) : seed_(seed), state_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        return scramble(state_);
    }

    /// Uniform double in [0, 1), 53 bits of randomness.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + uniform01() * (hi - lo); }

    /// Uniform index in [0, n).
    std::size_t uniform_index(std::size_t n) {
        if (n == 0) throw std::invalid_argument("uniform_index: empty range");
        return static_cast<std::size_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    /// Standard normal via Box-Muller (pairwise, second value cached).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        double u2 = uniform01();
        if (u1 < 1e-300) u1 = 1e-300;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    /// Independent generator derived deterministically from (seed, index).
    /// Derivation uses the original seed, not the current draw position.
    RandomSource substream(std::uint64_t index) const {
        return RandomSource(scramble(seed_ ^ scramble(0x9E3779B97F4A7C15ull * (index + 1))));
    }

    /// k distinct indices from [0, n), order as drawn (partial Fisher-Yates).
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k) {
        if (k > n) throw std::invalid_argument("sample_without_replacement: k > n");
        std::vector<std::size_t> pool(n);
        for (std::size_t i = 0; i < n; ++i) pool[i] = i;
        std::vector<std::size_t> out;
        out.reserve(k);
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + uniform_index(n - i);
            std::swap(pool[i], pool[j]);
            out.push_back(pool[i]);
        }
        return out;
    }

private:
    static std::uint64_t scramble(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace vlmlab

#endif // VLMLAB_RANDOM_HPP
