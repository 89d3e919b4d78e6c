#pragma once

#include <cstdint>

namespace marlab {

/// SplitMix64. State advances by the 64-bit golden-gamma constant and the
/// output is a finalizer-mixed copy of the state:
///
///   state += 0x9E3779B97F4A7C15
///   z  = state
///   z  = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z  = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   out = z ^ (z >> 31)
///
/// The exact transition is part of the file-format/CLI contract: identical
/// seeds must give identical generated models and samples across builds.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Unbiased integer in [0, n), n >= 1, by rejection.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
        for (;;) {
            const std::uint64_t v = next();
            if (v >= threshold) return v % n;
        }
    }

    /// Counter-keyed substream seed: row i of a sample draws from
    /// SplitMix64(derive(seed, i)), so rows are independent of evaluation
    /// order and may be produced in parallel.
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t counter) {
        SplitMix64 g(seed + (counter + 1) * 0x9E3779B97F4A7C15ULL);
        return g.next();
    }

private:
    std::uint64_t state_;
};

}  // namespace marlab
