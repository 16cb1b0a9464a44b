#pragma once

#include <cstdint>

// Counter-based deterministic random primitives. Every draw is a pure
// function of the bits fed into the mixer, so any (seed, identifier) tuple
// maps to the same value on every run and platform, independent of call
// order. No generator state is ever advanced.

namespace sttsim::rng {

/// SplitMix64 finalizer. Bijective 64-bit mix with good avalanche behavior.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Chained mix of a key tuple. Order-sensitive: hash(a,b) != hash(b,a).
inline std::uint64_t hash2(std::uint64_t seed, std::uint64_t a) { return mix64(mix64(seed) ^ a); }
inline std::uint64_t hash3(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return mix64(hash2(seed, a) ^ b);
}
inline std::uint64_t hash4(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return mix64(hash3(seed, a, b) ^ c);
}
inline std::uint64_t hash5(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c,
                           std::uint64_t d) {
    return mix64(hash4(seed, a, b, c) ^ d);
}

/// Maps 64 random bits to the open interval (0,1); never returns 0 or 1.
inline double uniform_open01(std::uint64_t bits) {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// Uniform in [0,1).
inline double uniform01(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Inverse of the standard normal CDF (Acklam's rational approximation,
/// relative error below 1.2e-9 over (0,1)). Self-contained so the mapping
/// from bits to deviates is pinned by this code, not by a library.
double inverse_normal_cdf(double p);

/// Standard normal deviate from 64 hash bits.
inline double gaussian(std::uint64_t bits) { return inverse_normal_cdf(uniform_open01(bits)); }

/// Tiny stateful stream for consumers that want sequential draws (the
/// synthetic workload generator). Still just counter hashing underneath.
class Stream {
public:
    explicit Stream(std::uint64_t seed, std::uint64_t stream_id = 0)
        : seed_(seed), stream_(stream_id) {}

    std::uint64_t next_u64() { return hash3(seed_, stream_, counter_++); }
    double next_uniform01() { return uniform01(next_u64()); }
    double next_open01() { return uniform_open01(next_u64()); }
    bool next_bernoulli(double p) { return next_uniform01() < p; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
};

} // namespace sttsim::rng
