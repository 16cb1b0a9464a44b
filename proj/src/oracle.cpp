#include "sttsim/oracle.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include "sttsim/errors.hpp"
#include "sttsim/rng.hpp"

namespace sttsim {

namespace {

#if defined(__SIZEOF_FLOAT128__)
using wide_float = __float128;
#else
using wide_float = long double;
#endif

wide_float pow_u64(wide_float base, std::uint64_t n) {
    wide_float r = 1;
    while (n != 0) {
        if (n & 1) r *= base;
        base *= base;
        n >>= 1;
    }
    return r;
}

void require(bool ok, const std::string& msg) {
    if (!ok) throw InvalidParameter(msg);
}

bool block_touched(const BlockAccounting& a) {
    return a.reads_total != 0 || a.writes_total != 0 || a.vulnerable_idle_time != 0.0 ||
           a.all_idle_time != 0.0 || a.trans_0to1_total != 0 || a.trans_1to0_total != 0;
}

void push_event(std::vector<FailureEvent>& out, double p, std::uint64_t count,
                EventClass cls) {
    if (count != 0 && p > 0.0) out.push_back({p, count, cls});
}

} // namespace

std::vector<FailureEvent> nominal_cache_events(const CellModelSet& cells, std::uint32_t n_bits,
                                               std::span<const BlockAccounting> accts) {
    std::vector<FailureEvent> out;
    const double rate = cells.base.retention_rate();
    std::uint64_t ones = 0;
    std::uint64_t t01 = 0;
    std::uint64_t t10 = 0;
    for (const auto& a : accts) {
        if (!a.vulnerable_intervals.empty()) {
            for (double t : a.vulnerable_intervals)
                push_event(out, -std::expm1(-rate * t), n_bits, EventClass::RF);
        } else if (a.vulnerable_idle_time > 0.0) {
            push_event(out, -std::expm1(-rate * a.vulnerable_idle_time), n_bits,
                       EventClass::RF);
        }
        ones += a.ones_read_total;
        t01 += a.trans_0to1_total;
        t10 += a.trans_1to0_total;
    }
    push_event(out, cells.base.p_read_disturb(), ones, EventClass::RD);
    const WriteFailurePair pair = cells.pair();
    push_event(out, pair.p_wf_0to1, t01, EventClass::WF);
    push_event(out, pair.p_wf_1to0, t10, EventClass::WF);
    return out;
}

std::vector<FailureEvent> pv_cache_events(const PvModel& pv, const CellModelSet& cells,
                                          std::span<const BlockAccounting> accts) {
    std::vector<FailureEvent> out;
    for (const auto& a : accts) {
        if (!block_touched(a)) continue;
        const std::size_t n_bits = std::max(
            {a.per_bit_vulnerable_time.size(), a.per_bit_ones_read.size(),
             a.per_bit_trans_0to1.size(), a.per_bit_trans_1to0.size()});
        require(n_bits > 0, "pv oracle needs per-bit accounting for block at set " +
                                std::to_string(a.set_index) + " way " +
                                std::to_string(a.way_index));
        for (std::size_t bit = 0; bit < n_bits; ++bit) {
            const CellId id{a.set_index, a.way_index, static_cast<std::uint32_t>(bit)};
            const double t_vul =
                bit < a.per_bit_vulnerable_time.size() ? a.per_bit_vulnerable_time[bit] : 0.0;
            if (t_vul > 0.0 || !a.vulnerable_intervals.empty()) {
                const double rate = pv.apply(cells.base, id).retention_rate();
                if (!a.vulnerable_intervals.empty()) {
                    for (double t : a.vulnerable_intervals)
                        push_event(out, -std::expm1(-rate * t), 1, EventClass::RF);
                } else {
                    push_event(out, -std::expm1(-rate * t_vul), 1, EventClass::RF);
                }
            }
            const std::uint32_t ones =
                bit < a.per_bit_ones_read.size() ? a.per_bit_ones_read[bit] : 0;
            if (ones != 0)
                push_event(out, pv.apply(cells.base, id).p_read_disturb(), ones,
                           EventClass::RD);
            const std::uint32_t c01 =
                bit < a.per_bit_trans_0to1.size() ? a.per_bit_trans_0to1[bit] : 0;
            if (c01 != 0)
                push_event(out, pv.apply(cells.write_0to1, id).p_write_fail(), c01,
                           EventClass::WF);
            const std::uint32_t c10 =
                bit < a.per_bit_trans_1to0.size() ? a.per_bit_trans_1to0[bit] : 0;
            if (c10 != 0)
                push_event(out, pv.apply(cells.write_1to0, id).p_write_fail(), c10,
                           EventClass::WF);
        }
    }
    return out;
}

double brute_force_failure(std::span<const FailureEvent> events) {
    // Factors are formed as 1 - p inside the wide type so probabilities far
    // below the double epsilon still shift the product.
    wide_float prod = 1;
    for (const auto& ev : events) {
        if (ev.count == 0 || ev.p <= 0.0) continue;
        if (ev.p >= 1.0) return 1.0;
        prod *= pow_u64(wide_float(1) - wide_float(ev.p), ev.count);
        if (prod == 0) return 1.0;
    }
    return static_cast<double>(wide_float(1) - prod);
}

double scaled_analytic_failure(std::span<const FailureEvent> events, double scale,
                               bool* clamped) {
    require(scale > 0.0, "scale factor must be > 0");
    bool hit = false;
    long double ls = 0.0L;
    for (const auto& ev : events) {
        if (ev.count == 0 || ev.p <= 0.0) continue;
        const double ps = ev.p * scale;
        if (ps >= 1.0) {
            hit = true;
            ls = -std::numeric_limits<long double>::infinity();
        } else {
            ls += static_cast<long double>(ev.count) * std::log1p(-ps);
        }
    }
    if (clamped != nullptr) *clamped = hit;
    return -static_cast<double>(std::expm1(static_cast<double>(ls)));
}

WilsonInterval wilson_interval(std::uint64_t failures, std::uint64_t trials, double z) {
    require(trials > 0, "wilson interval needs trials > 0");
    require(failures <= trials, "failures cannot exceed trials");
    require(z > 0.0, "z must be > 0");
    const double n = static_cast<double>(trials);
    const double p_hat = static_cast<double>(failures) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p_hat + z2 / (2.0 * n)) / denom;
    const double half =
        (z / denom) * std::sqrt(p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n));
    WilsonInterval w;
    w.lo = std::max(0.0, center - half);
    w.hi = std::min(1.0, center + half);
    return w;
}

McEstimate estimate_cache_failure(std::span<const FailureEvent> events, std::uint64_t trials,
                                  std::uint64_t seed, double scale, double z) {
    require(trials > 0, "monte carlo needs trials > 0");
    require(scale > 0.0, "scale factor must be > 0");

    McEstimate est;
    est.trials = trials;

    std::vector<std::uint64_t> bitmap((trials + 63) / 64, 0);
    bool all_failed = false;

    for (std::size_t e = 0; e < events.size() && !all_failed; ++e) {
        const auto& ev = events[e];
        if (ev.count == 0 || ev.p <= 0.0) continue;
        double ps = ev.p * scale;
        if (ps >= 1.0) {
            ps = 1.0;
            est.scale_clamped = true;
        }

        if (ps >= 1.0) {
            all_failed = true;
            break;
        }

        // A trial is hit by this event when any of its `count` independent
        // draws fires; that compound probability is exact, so one sweep per
        // event suffices.
        const double p_eff =
            ev.count == 1 ? ps
                          : -std::expm1(static_cast<double>(ev.count) * std::log1p(-ps));
        if (p_eff <= 0.0) continue;
        if (p_eff >= 1.0) {
            all_failed = true;
            break;
        }

        // Geometric skipping: marks each trial independently with
        // probability p_eff while spending time only on the marked ones.
        rng::Stream stream(seed, static_cast<std::uint64_t>(e));
        const double log_q = std::log1p(-p_eff);
        double pos = -1.0;
        for (;;) {
            const double u = stream.next_open01();
            pos += 1.0 + std::floor(std::log(u) / log_q);
            if (pos >= static_cast<double>(trials)) break;
            const auto idx = static_cast<std::uint64_t>(pos);
            bitmap[idx >> 6] |= std::uint64_t{1} << (idx & 63);
        }
    }

    if (all_failed) {
        est.failures = trials;
    } else {
        std::uint64_t f = 0;
        for (std::uint64_t word : bitmap) f += static_cast<std::uint64_t>(std::popcount(word));
        est.failures = f;
    }
    est.p_hat = static_cast<double>(est.failures) / static_cast<double>(trials);
    est.interval = wilson_interval(est.failures, trials, z);
    return est;
}

} // namespace sttsim
