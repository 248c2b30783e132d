#pragma once

#include <cstdint>
#include <numbers>
#include <cmath>
#include <utility>

namespace specmap {

/// Stateless counter-based random stream. Each (key, stream) pair owns an
/// independent sequence indexed by a 64-bit counter, so parallel trials
/// reproduce bit-for-bit regardless of scheduling. The word function is the
/// splitmix64 output mix over an affinely advanced state.
class CounterRng {
public:
    CounterRng(std::uint64_t key, std::uint64_t stream)
        : origin_(mix(key ^ mix(stream + 0x632BE59BD9B4E019ULL))) {}

    std::uint64_t word(std::uint64_t counter) const {
        return mix(origin_ + (counter + 1) * 0x9E3779B97F4A7C15ULL);
    }

    /// Uniform double in (0, 1].
    double uniform(std::uint64_t counter) const {
        return (static_cast<double>(word(counter) >> 11) + 1.0) * 0x1.0p-53;
    }

    /// Two independent standard normals from one counter (Box-Muller).
    std::pair<double, double> gaussian_pair(std::uint64_t counter) const {
        const double u1 = uniform(2 * counter);
        const double u2 = uniform(2 * counter + 1);
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        return {r * std::cos(angle), r * std::sin(angle)};
    }

private:
    static std::uint64_t mix(std::uint64_t x) {
        x ^= x >> 30;
        x *= 0xBF58476D1CE4E5B9ULL;
        x ^= x >> 27;
        x *= 0x94D049BB133111EBULL;
        x ^= x >> 31;
        return x;
    }

    std::uint64_t origin_;
};

}  // namespace specmap
