#pragma once

#include <cstdint>
#include <cstddef>
#include <string_view>

namespace t2s {

/// splitmix64 generator. The algorithm is fixed here (not delegated to
/// <random>) so that seeded runs reproduce bit-for-bit across platforms and
/// standard libraries, and so independent reimplementations can agree with it
/// exactly.
///
/// Contract, in generation order:
///   next()        -> raw 64-bit output of splitmix64
///   next_double() -> (next() >> 11) * 2^-53, uniform in [0, 1)
///   next_index(n) -> next() % n  (modulo bias negligible for n << 2^64)
class SplitMix64 {
public:
    explicit SplitMix64(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    double next_double() {
        return static_cast<double>(next() >> 11) * (1.0 / 9007199254740992.0);
    }

    size_t next_index(size_t n) { return static_cast<size_t>(next() % n); }

private:
    uint64_t state_;
};

inline constexpr uint64_t kFnvOffsetBasis = 1469598103934665603ull;
inline constexpr uint64_t kFnvPrime = 1099511628211ull;

inline uint64_t fnv1a64(std::string_view data, uint64_t h = kFnvOffsetBasis) {
    for (unsigned char c : data) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

}  // namespace t2s
