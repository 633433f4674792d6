#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string_view>

namespace qlock {

// All randomness in the library flows from one user-visible 64-bit seed.
// Independent streams are derived as
//     stream_seed = splitmix64(splitmix64(seed ^ fnv1a64(label)) ^ index)
// so that (seed, label, index) identifies a stream regardless of execution
// order or thread count.

constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : s) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_stream_seed(std::uint64_t seed, std::string_view label,
                                           std::uint64_t index = 0) {
    return splitmix64(splitmix64(seed ^ fnv1a64(label)) ^ index);
}

// Seeded engine with portable conversions (no libstdc++ distribution
// internals, so sequences are stable across standard libraries).
class StreamRng {
public:
    explicit StreamRng(std::uint64_t stream_seed) : engine_(stream_seed) {}

    StreamRng(std::uint64_t seed, std::string_view label, std::uint64_t index = 0)
        : engine_(derive_stream_seed(seed, label, index)) {}

    std::uint64_t bits() { return engine_(); }

    // uniform double in [0, 1)
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + uniform() * (b - a); }

    bool bernoulli(double p) {
        if (p <= 0.0) return false;
        if (p >= 1.0) return true;
        return uniform() < p;
    }

    // uniform integer in [0, n), rejection-sampled to avoid modulo bias
    std::uint64_t uniform_int(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("uniform_int: n must be positive");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

private:
    std::mt19937_64 engine_;
};

} // namespace qlock
