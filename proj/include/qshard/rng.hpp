#pragma once

#include <cstdint>
#include <limits>
#include <random>

#include "qshard/errors.hpp"

namespace qshard {

/// SplitMix64 finalizer, used to turn (seed, stream) pairs into
/// well-separated engine seeds.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seeded, splittable random stream. Stream g of a given seed is
/// statistically independent of stream g' != g and fully reproducible.
///
/// The engine is std::mt19937_64 (bit-exact across platforms); the
/// double/bounded-int mappings below are hand-rolled because the standard
/// distributions are not pinned by the standard and we need replayable runs.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
        : eng_(mix64(mix64(seed) ^ (0xd1342543de82ef95ULL * (stream + 1)))) {}

    /// Uniform double in [0, 1), 53 random bits.
    double unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    /// Uniform double in [a, b).
    double uniform(double a, double b) { return a + (b - a) * unit(); }

    /// Uniform integer in [0, n), rejection-sampled (no modulo bias).
    std::uint64_t bounded(std::uint64_t n) {
        if (n == 0) throw InputError("Rng::bounded: empty range");
        const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
        const std::uint64_t limit = max - max % n;
        std::uint64_t x;
        do {
            x = eng_();
        } while (x >= limit);
        return x % n;
    }

    std::uint64_t next() { return eng_(); }

private:
    std::mt19937_64 eng_;
};

} // namespace qshard
