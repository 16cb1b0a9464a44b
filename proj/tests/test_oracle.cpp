#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "sttsim/cache.hpp"
#include "sttsim/engine.hpp"
#include "sttsim/errors.hpp"
#include "sttsim/oracle.hpp"
#include "sttsim/pv.hpp"

using namespace sttsim;

namespace {

CellParams soft_cell() {
    CellParams p;
    p.delta = 20.0;
    p.i_c0 = 40.0;
    p.i_read = 15.0;
    p.i_write = 55.0;
    p.t_read = 1e-9;
    p.t_write = 3.0;
    p.tau = 1e-9;
    p.m = 1.0;
    p.p_pol = 0.6;
    p.mu_beta = 1.0;
    p.e_charge = 1.0;
    p.retention_rate_scale = 1e9;
    return p;
}

CellModelSet soft_cells() {
    CellModelSet s;
    s.base = soft_cell();
    s.write_0to1 = soft_cell();
    s.write_1to0 = soft_cell();
    s.write_1to0.i_write = 75.0;
    return s;
}

bool close_rel(double a, double b, double eps) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) <= eps * scale;
}

CacheModel::FinalizeResult toy_cache_run() {
    CacheGeometry g;
    g.num_sets = 2;
    g.associativity = 1;
    g.block_size_bits = 16;
    CacheOptions opt;
    opt.collect_per_bit = true;
    opt.collect_intervals = true;
    CacheModel cache(g, opt);
    auto acc = [&](std::int64_t t, AccessKind k, std::uint64_t addr, BlockData d = {}) {
        AccessRecord r;
        r.timestamp_ns = t;
        r.kind = k;
        r.address = addr;
        r.data = std::move(d);
        cache.apply_access(r);
    };
    acc(0, AccessKind::Write, 0, {0x3c, 0x81});
    acc(0, AccessKind::Write, 2, {0xff, 0x00});
    acc(1000, AccessKind::Read, 0);
    acc(1500, AccessKind::Write, 0, {0xc3, 0x81});
    acc(4000, AccessKind::Read, 0);
    acc(5000, AccessKind::Read, 2);
    acc(6000, AccessKind::Read, 2);
    acc(8000, AccessKind::Write, 2, {0x0f, 0xf0});
    acc(9000, AccessKind::Read, 2);
    return cache.finalize(10000);
}

} // namespace

TEST_CASE("wilson interval reference values") {
    const auto w = wilson_interval(50, 100, 1.959963984540054);
    CHECK(w.lo == doctest::Approx(0.40383).epsilon(1e-3));
    CHECK(w.hi == doctest::Approx(0.59617).epsilon(1e-3));
}

TEST_CASE("wilson interval properties") {
    const auto zero = wilson_interval(0, 1000, 4.0);
    CHECK(zero.lo == 0.0);
    CHECK(zero.hi > 0.0);
    CHECK(zero.hi < 0.05);

    const auto full = wilson_interval(1000, 1000, 4.0);
    CHECK(full.hi == 1.0);
    CHECK(full.lo < 1.0);

    const auto narrow = wilson_interval(100, 10000, 2.0);
    const auto wide = wilson_interval(100, 10000, 4.0);
    CHECK(wide.lo < narrow.lo);
    CHECK(wide.hi > narrow.hi);
    CHECK(narrow.lo <= 0.01);
    CHECK(narrow.hi >= 0.01);

    CHECK_THROWS_AS(wilson_interval(1, 0, 4.0), InvalidParameter);
    CHECK_THROWS_AS(wilson_interval(5, 4, 4.0), InvalidParameter);
    CHECK_THROWS_AS(wilson_interval(1, 10, 0.0), InvalidParameter);
}

TEST_CASE("brute force survival product") {
    CHECK(brute_force_failure({}) == 0.0);

    std::vector<FailureEvent> one{{0.25, 1, EventClass::RF}};
    CHECK(brute_force_failure(one) == doctest::Approx(0.25).epsilon(1e-15));

    std::vector<FailureEvent> two{{0.5, 2, EventClass::RF}};
    CHECK(brute_force_failure(two) == doctest::Approx(0.75).epsilon(1e-15));

    std::vector<FailureEvent> mix{{0.1, 3, EventClass::RF},
                                  {0.02, 10, EventClass::RD},
                                  {0.3, 1, EventClass::WF}};
    const double expect =
        1.0 - std::pow(0.9, 3.0) * std::pow(0.98, 10.0) * 0.7;
    CHECK(close_rel(brute_force_failure(mix), expect, 1e-14));

    std::vector<FailureEvent> certain{{1.0, 1, EventClass::WF}, {0.1, 5, EventClass::RF}};
    CHECK(brute_force_failure(certain) == 1.0);
}

TEST_CASE("brute force resolves probabilities far below double epsilon") {
    std::vector<FailureEvent> tiny{{1e-20, 1000, EventClass::RF},
                                   {2e-21, 500, EventClass::RD}};
    const double expect = -std::expm1(1000.0 * std::log1p(-1e-20) +
                                      500.0 * std::log1p(-2e-21));
    CHECK(close_rel(brute_force_failure(tiny), expect, 1e-12));
}

TEST_CASE("scaled analytic failure") {
    std::vector<FailureEvent> evs{{1e-8, 100, EventClass::RF}, {2e-9, 400, EventClass::RD}};
    bool clamped = true;
    const double unscaled = scaled_analytic_failure(evs, 1.0, &clamped);
    CHECK(!clamped);
    CHECK(close_rel(unscaled, brute_force_failure(evs), 1e-12));

    const double scaled = scaled_analytic_failure(evs, 1000.0, &clamped);
    CHECK(!clamped);
    // small probabilities scale nearly linearly
    CHECK(scaled == doctest::Approx(1000.0 * unscaled).epsilon(0.01));

    std::vector<FailureEvent> big{{0.5, 1, EventClass::WF}};
    const double hit = scaled_analytic_failure(big, 4.0, &clamped);
    CHECK(clamped);
    CHECK(hit == 1.0);

    CHECK_THROWS_AS(scaled_analytic_failure(evs, 0.0, nullptr), InvalidParameter);
}

TEST_CASE("monte carlo estimate is deterministic in the seed") {
    std::vector<FailureEvent> evs{{1e-3, 7, EventClass::RF}, {5e-4, 20, EventClass::RD}};
    const auto a = estimate_cache_failure(evs, 50000, 42);
    const auto b = estimate_cache_failure(evs, 50000, 42);
    CHECK(a.failures == b.failures);
    CHECK(a.p_hat == b.p_hat);
    CHECK(a.interval.lo == b.interval.lo);

    // different seeds shuffle the marked trials
    bool any_diff = false;
    for (std::uint64_t s = 43; s < 48; ++s)
        if (estimate_cache_failure(evs, 50000, s).failures != a.failures) any_diff = true;
    CHECK(any_diff);
}

TEST_CASE("monte carlo endpoints") {
    CHECK(estimate_cache_failure({}, 1000, 1).failures == 0);

    std::vector<FailureEvent> certain{{1.0, 1, EventClass::WF}};
    const auto all = estimate_cache_failure(certain, 1000, 1);
    CHECK(all.failures == 1000);
    CHECK(all.p_hat == 1.0);

    std::vector<FailureEvent> clamp{{0.5, 1, EventClass::WF}};
    const auto clamped = estimate_cache_failure(clamp, 1000, 1, 4.0);
    CHECK(clamped.scale_clamped);
    CHECK(clamped.failures == 1000);

    CHECK_THROWS_AS(estimate_cache_failure(certain, 0, 1), InvalidParameter);
    CHECK_THROWS_AS(estimate_cache_failure(certain, 10, 1, -1.0), InvalidParameter);
}

TEST_CASE("monte carlo tracks the analytic value") {
    std::vector<FailureEvent> evs{{2e-2, 1, EventClass::RF},
                                  {5e-3, 4, EventClass::RD},
                                  {1e-2, 1, EventClass::WF}};
    const double analytic = scaled_analytic_failure(evs, 1.0, nullptr);
    const auto est = estimate_cache_failure(evs, 200000, 7, 1.0, 4.0);
    CHECK(est.interval.lo <= analytic);
    CHECK(analytic <= est.interval.hi);
    CHECK(std::abs(est.p_hat - analytic) <
          4.0 * std::sqrt(analytic * (1.0 - analytic) / 200000.0) + 1e-9);
}

TEST_CASE("compound counts match their exact per-trial probability") {
    std::vector<FailureEvent> evs{{0.3, 2, EventClass::RF}};
    const double p_trial = 1.0 - 0.49;
    const auto est = estimate_cache_failure(evs, 100000, 11);
    CHECK(std::abs(est.p_hat - p_trial) <
          4.0 * std::sqrt(p_trial * (1.0 - p_trial) / 100000.0));
}

TEST_CASE("rare-event scaling recovers the amplified analytic value") {
    std::vector<FailureEvent> evs{{3e-7, 10, EventClass::RF}, {1e-7, 40, EventClass::RD}};
    const double scale = 2e4; // lifts the union probability to roughly 0.13
    bool clamped = true;
    const double analytic = scaled_analytic_failure(evs, scale, &clamped);
    CHECK(!clamped);
    CHECK(analytic > 1e-2);
    const auto est = estimate_cache_failure(evs, 200000, 3, scale, 4.0);
    CHECK(!est.scale_clamped);
    CHECK(est.interval.lo <= analytic);
    CHECK(analytic <= est.interval.hi);
}

TEST_CASE("nominal event list mirrors the engine closed forms") {
    const auto fin = toy_cache_run();
    const CellModelSet cells = soft_cells();
    const auto events = nominal_cache_events(cells, 16, fin.blocks);

    std::uint64_t ones = 0, t01 = 0, t10 = 0;
    for (const auto& a : fin.blocks) {
        ones += a.ones_read_total;
        t01 += a.trans_0to1_total;
        t10 += a.trans_1to0_total;
    }
    const double p_rf = p_rf_cache(cells.base, 16, fin.blocks);
    const double p_rd = p_rd_cache(cells.base, ones);
    const double p_wf = p_wf_cache(cells.pair(), t01, t10);
    const double composed = 1.0 - (1.0 - p_rf) * (1.0 - p_rd) * (1.0 - p_wf);
    CHECK(close_rel(brute_force_failure(events), composed, 1e-10));

    // per-class totals reproduce the per-source probabilities
    for (const EventClass cls : {EventClass::RF, EventClass::RD, EventClass::WF}) {
        std::vector<FailureEvent> filtered;
        for (const auto& ev : events)
            if (ev.cls == cls) filtered.push_back(ev);
        const double want = cls == EventClass::RF ? p_rf
                            : cls == EventClass::RD ? p_rd
                                                    : p_wf;
        CHECK(close_rel(brute_force_failure(filtered), want, 1e-10));
    }
}

TEST_CASE("nominal events fall back to the scalar vulnerable time") {
    const CellModelSet cells = soft_cells();
    BlockAccounting a;
    a.set_index = 0;
    a.way_index = 0;
    a.vulnerable_idle_time = 2e-3;
    a.all_idle_time = 2e-3;
    a.reads_total = 1;
    std::vector<BlockAccounting> accts{a};
    const auto events = nominal_cache_events(cells, 16, accts);
    REQUIRE(events.size() == 1);
    CHECK(events[0].cls == EventClass::RF);
    CHECK(events[0].count == 16);
    CHECK(close_rel(brute_force_failure(events), p_rf_cache(cells.base, 16, accts), 1e-10));
}

TEST_CASE("pv event list at sigma zero matches the nominal list") {
    const auto fin = toy_cache_run();
    const CellModelSet cells = soft_cells();
    PvConfig pc;
    pc.sigma_rel = 0.0;
    const PvModel pv(pc, cells.base);

    const auto nominal = nominal_cache_events(cells, 16, fin.blocks);
    const auto expanded = pv_cache_events(pv, cells, fin.blocks);
    CHECK(expanded.size() > nominal.size()); // per-cell expansion
    CHECK(close_rel(brute_force_failure(expanded), brute_force_failure(nominal), 1e-10));
}

TEST_CASE("pv event list shifts with sigma") {
    const auto fin = toy_cache_run();
    const CellModelSet cells = soft_cells();
    PvConfig pc;
    pc.sigma_rel = 0.05;
    pc.seed = 5;
    const PvModel pv(pc, cells.base);
    const auto events = pv_cache_events(pv, cells, fin.blocks);
    const double pv_fail = brute_force_failure(events);
    const double nominal_fail = brute_force_failure(nominal_cache_events(cells, 16, fin.blocks));
    CHECK(pv_fail > 0.0);
    CHECK(pv_fail != nominal_fail);
    // and it agrees with the engine's pv aggregation
    const auto ls = pv_cache_logsurv(pv, cells, fin.blocks);
    const double engine_total = -std::expm1(ls.rf_vulnerable + ls.rd + ls.wf);
    CHECK(close_rel(pv_fail, engine_total, 1e-10));
}
