#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>

#include "mk/errors.hpp"

namespace mk {

// Deterministic random number generation.
//
// Every stochastic component of the pipeline (k-means seeding, synthetic
// corpus generation) draws from this wrapper, never from platform-default
// engines, so a (seed, stream) pair reproduces the same byte stream on any
// conforming implementation:
//
//   * bit source:  std::mt19937_64 — the Mersenne Twister variant whose
//     output sequence is fixed by the C++ standard;
//   * substreams:  derived with SplitMix64 over (seed, stream index), so
//     per-object / per-restart streams are independent of scheduling order;
//   * doubles:     top 53 bits of the next word, uniform on [0, 1);
//   * gaussians:   Box-Muller on two uniforms (spare value cached).
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Child stream `stream` of master seed `seed`. Distinct streams are
    // statistically independent; the mapping is pure arithmetic, so callers
    // may create streams in any order (or in parallel) with identical results.
    static Rng substream(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t s = seed;
        std::uint64_t a = splitmix64_next(s);
        s ^= stream * 0x9e3779b97f4a7c15ULL;
        std::uint64_t b = splitmix64_next(s);
        return Rng(a ^ (b + 0x632be59bd9b4e019ULL));
    }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1) with 53-bit resolution.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Unbiased integer in [0, n) by rejection.
    std::size_t index(std::size_t n) {
        if (n == 0) throw_numeric("Rng::index: empty range");
        const std::uint64_t bound = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return static_cast<std::size_t>(x % bound);
    }

    // Standard normal deviate.
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1]: keeps log() finite
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    double gaussian(double sigma) { return sigma * gaussian(); }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace mk
