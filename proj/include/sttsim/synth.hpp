#pragma once

#include <cstdint>
#include <vector>

#include "sttsim/cache.hpp"

// Synthetic workload generator. Parameterizes the three behavioral axes
// that drive the reliability model: access pattern (read fraction, locality),
// data content (ones density, rewrite similarity), and timing (request
// rate). Output is deterministic for a given (spec, seed) on any platform.

namespace sttsim {

struct SyntheticSpec {
    /// Length of the steady-state phase; fill burst (when enabled) precedes it.
    std::int64_t duration_ns = 1'000'000;
    /// Requests per microsecond; arrivals are evenly spaced.
    double request_rate_per_us = 10.0;
    double read_fraction = 0.5;

    /// Locality model: Zipf-distributed block popularity over a working set.
    /// zipf_exponent = 0 degenerates to uniform.
    std::uint64_t working_set_blocks = 64;
    double zipf_exponent = 0.0;

    /// Content model: fresh bits are Bernoulli(ones_density); on rewrite
    /// each bit keeps its old value with probability rewrite_similarity.
    double ones_density = 0.5;
    double rewrite_similarity = 0.0;

    /// Write every working-set block once before the steady-state phase
    /// (1 ns apart) so early reads observe generated content.
    bool initial_fill = true;

    void validate() const;
};

/// Generates the record stream for a block size of `block_bytes`.
/// Addresses are block-aligned: block index times block_bytes.
std::vector<AccessRecord> generate_trace(const SyntheticSpec& spec, std::uint32_t block_bytes,
                                         std::uint64_t seed);

} // namespace sttsim
