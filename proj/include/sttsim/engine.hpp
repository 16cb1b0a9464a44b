#pragma once

#include <span>

#include "sttsim/cache.hpp"
#include "sttsim/cell.hpp"
#include "sttsim/pv.hpp"

// Aggregation engine: folds per-block accounting into block-level,
// cache-level and per-unit-time failure probabilities, along the nominal
// path (scalar totals, closed forms) and the PV path (per-cell parameters).
//
// Every survival product is accumulated as a sum of per-event log-survival
// terms; probabilities only materialize through expm1 at the very end, so
// contributions at the 1e-20 scale survive aggregation over millions of
// events. PV sums run in long double so that a sigma=0 model reproduces the
// nominal closed forms to within a few ulp.

namespace sttsim {

/// Cell parameter sets for one configuration: `base` drives retention and
/// read disturbance, the two presets realize the write-failure asymmetry.
struct CellModelSet {
    CellParams base;
    CellParams write_0to1;
    CellParams write_1to0;

    void validate() const;
    WriteFailurePair pair() const { return write_failure_pair(write_0to1, write_1to0); }
};

/// Accumulated ln(survival) per error source over total execution.
struct CacheLogSurvival {
    double rf_vulnerable = 0.0; ///< retention, idle intervals ended by a read
    double rf_all = 0.0;        ///< retention, all idle intervals (worst case)
    double rd = 0.0;
    double wf = 0.0;
};

// ---- nominal path ----

double p_rf_block(const CellParams& params, std::uint32_t n_bits, double t_vul_s);
double p_rf_cache(const CellParams& params, std::uint32_t n_bits,
                  std::span<const BlockAccounting> accts);
double p_rd_block(const CellParams& params, std::uint64_t ones_read_total);
double p_rd_cache(const CellParams& params, std::uint64_t total_ones_read);
double p_wf_block(const WriteFailurePair& pair, std::uint64_t trans_0to1,
                  std::uint64_t trans_1to0);
double p_wf_cache(const WriteFailurePair& pair, std::uint64_t total_0to1,
                  std::uint64_t total_1to0);

CacheLogSurvival nominal_cache_logsurv(const CellModelSet& cells, std::uint32_t n_bits,
                                       std::span<const BlockAccounting> accts);

// ---- PV path ----
// Per-cell sampled parameters; requires per-bit accounting for any block
// with nonzero counters. Blocks never touched contribute nothing.

double p_rf_cache_pv(const PvModel& pv, const CellParams& base,
                     std::span<const BlockAccounting> accts);
double p_rd_cache_pv(const PvModel& pv, const CellParams& base,
                     std::span<const BlockAccounting> accts);
double p_wf_cache_pv(const PvModel& pv, const CellParams& preset_0to1,
                     const CellParams& preset_1to0, std::span<const BlockAccounting> accts);

CacheLogSurvival pv_cache_logsurv(const PvModel& pv, const CellModelSet& cells,
                                  std::span<const BlockAccounting> accts);

// ---- per-unit-time integration ----

/// Fractional contribution of each source to the total failure probability:
/// F_i / (F_RF + F_RD + F_WF). Undefined (all zero, defined=false) when no
/// source has any failure probability.
struct SourceBreakdown {
    double rf = 0.0;
    double rd = 0.0;
    double wf = 0.0;
    bool defined = false;
};

enum class RetentionScenario { VulnerableOnly, AllIntervals };

struct ReliabilityReport {
    // Total-execution probabilities. p_rf_cache follows the masking rule
    // (vulnerable intervals only); the all-intervals companion is the
    // worst-case retention scenario.
    double p_rf_cache = 0.0;
    double p_rf_cache_all_intervals = 0.0;
    double p_rd_cache = 0.0;
    double p_wf_cache = 0.0;

    // Per-unit-time reliabilities (survival per report unit of execution
    // time) and the integrated total failure probability per unit time.
    double r_rf_t = 1.0;
    double r_rd_t = 1.0;
    double r_wf_t = 1.0;
    double p_total_per_t = 0.0;

    SourceBreakdown breakdown_vulnerable;
    SourceBreakdown breakdown_all_intervals;

    double t_exe_s = 0.0;     ///< seconds
    double unit_s = 1e-6;     ///< report unit in seconds (default: microsecond)
};

/// Builds the full report from accumulated log-survivals. The per-unit-time
/// exponents are the total-execution exponents divided by t_exe expressed in
/// report units. t_exe_s == 0 (degenerate empty trace) yields unit
/// reliabilities and a breakdown computed from the total-execution values.
ReliabilityReport make_report(const CacheLogSurvival& ls, double t_exe_s, double unit_s = 1e-6);

ReliabilityReport per_unit_time_report(const CellModelSet& cells, std::uint32_t n_bits,
                                       std::span<const BlockAccounting> accts, double t_exe_s,
                                       double unit_s = 1e-6);
ReliabilityReport per_unit_time_report_pv(const PvModel& pv, const CellModelSet& cells,
                                          std::span<const BlockAccounting> accts, double t_exe_s,
                                          double unit_s = 1e-6);

/// Probability that the block is erroneous at one read: retention over the
/// idle interval the read terminates, write failure of the most recent
/// write, and read disturbance of this read, integrated as independent
/// survivals.
double per_read_block_error(const CellModelSet& cells, std::uint32_t n_bits,
                            const ReadEventRecord& ev);

} // namespace sttsim
