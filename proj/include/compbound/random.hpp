// Counter-based stream derivation: every (seed, index) pair owns an
// independent generator, so serial and parallel runs draw identical numbers.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace compbound {

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

class StreamRng {
public:
    StreamRng(std::uint64_t seed, std::uint64_t index)
        : engine_(splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL))) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [lo, hi].
    std::uint64_t integer(std::uint64_t lo, std::uint64_t hi) {
        const std::uint64_t span = hi - lo + 1;
        return lo + static_cast<std::uint64_t>(uniform() * static_cast<double>(span)) % span;
    }

    /// Standard exponential; used for uniform draws on the simplex.
    double exponential() { return -std::log1p(-uniform()); }

    bool coin(double p_true) { return uniform() < p_true; }

private:
    std::mt19937_64 engine_;
};

}  // namespace compbound
