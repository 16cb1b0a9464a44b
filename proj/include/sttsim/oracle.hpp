#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sttsim/cache.hpp"
#include "sttsim/engine.hpp"
#include "sttsim/pv.hpp"

// Validation oracle: re-derives cache failure probabilities along routes
// that share no arithmetic with the engine. The brute-force route multiplies
// per-event survival factors in extended precision; the Monte Carlo route
// fault-injects independent Bernoulli events over many trials and checks the
// analytic value against a Wilson score interval.

namespace sttsim {

enum class EventClass { RF, RD, WF };

/// One independent failure opportunity: `count` Bernoulli draws with
/// probability `p` each.
struct FailureEvent {
    double p = 0.0;
    std::uint64_t count = 0;
    EventClass cls = EventClass::RF;
};

/// Nominal event list: one retention event per block and vulnerable idle
/// interval (count = bits per block; falls back to the accumulated total
/// when interval collection is off), one read-disturb event with the total
/// vulnerable-bit read count, and one write event per transition direction.
std::vector<FailureEvent> nominal_cache_events(const CellModelSet& cells, std::uint32_t n_bits,
                                               std::span<const BlockAccounting> accts);

/// PV event list: every event expanded per cell with that cell's sampled
/// parameters.
std::vector<FailureEvent> pv_cache_events(const PvModel& pv, const CellModelSet& cells,
                                          std::span<const BlockAccounting> accts);

/// 1 minus the product of per-event survival factors, accumulated in
/// extended precision (binary exponentiation for the counts).
double brute_force_failure(std::span<const FailureEvent> events);

/// Same survival product with every event probability scaled by `scale`
/// (clamped to 1); log-domain, used as the Monte Carlo reference.
/// `clamped`, when non-null, reports whether any probability hit the clamp.
double scaled_analytic_failure(std::span<const FailureEvent> events, double scale,
                               bool* clamped = nullptr);

struct WilsonInterval {
    double lo = 0.0;
    double hi = 1.0;
};

WilsonInterval wilson_interval(std::uint64_t failures, std::uint64_t trials, double z);

struct McEstimate {
    std::uint64_t trials = 0;
    std::uint64_t failures = 0;
    double p_hat = 0.0;
    WilsonInterval interval;
    bool scale_clamped = false;
};

/// Fault-injection estimate of the probability that at least one event
/// fires, over `trials` independent trials. Event probabilities are scaled
/// by `scale` first (rare-event amplification; compare against
/// scaled_analytic_failure with the same scale). Deterministic in `seed`.
McEstimate estimate_cache_failure(std::span<const FailureEvent> events, std::uint64_t trials,
                                  std::uint64_t seed, double scale = 1.0, double z = 4.0);

} // namespace sttsim
