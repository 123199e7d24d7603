#pragma once

#include <cstdint>

namespace patternlab {

/// Counter-based generator (SplitMix64 over a keyed counter). Streams are
/// fully determined by (seed, key, counter), independent of call order and
/// platform, which keeps disorder sampling reproducible bit-for-bit.
class CounterRng {
  public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t key = 0)
        : state_(mix(seed ^ mix(key + 0x9e3779b97f4a7c15ull))) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        return mix(state_);
    }

    /// Uniform in [0, 1).
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

/// Stable key for lattice coordinates, used to decouple disorder draws from
/// enumeration order.
inline std::uint64_t lattice_key(long m, long n, long sector) {
    auto u = [](long x) { return static_cast<std::uint64_t>(x) * 2654435761ull; };
    return u(m) ^ (u(n) << 21) ^ (u(sector) << 42);
}

} // namespace patternlab
