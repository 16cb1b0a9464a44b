#include "sttsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sttsim/errors.hpp"

namespace sttsim {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw InvalidParameter(msg);
}

// Per-bit accounting is mandatory on the PV path for any block that saw
// traffic; silently falling back to scalar totals would average away the
// per-cell variation the path exists to capture.
void require_per_bit(const BlockAccounting& acct) {
    const bool have = !acct.per_bit_ones_read.empty() || !acct.per_bit_trans_0to1.empty() ||
                      !acct.per_bit_vulnerable_time.empty();
    if (!have) {
        throw InvalidParameter("pv path needs per-bit accounting for block at set " +
                               std::to_string(acct.set_index) + " way " +
                               std::to_string(acct.way_index) +
                               "; enable per-bit collection in the cache model");
    }
}

bool block_touched(const BlockAccounting& a) {
    return a.reads_total != 0 || a.writes_total != 0 || a.vulnerable_idle_time != 0.0 ||
           a.all_idle_time != 0.0 || a.trans_0to1_total != 0 || a.trans_1to0_total != 0;
}

double from_logsurv(long double ls) {
    return -static_cast<double>(std::expm1(static_cast<double>(ls)));
}

} // namespace

void CellModelSet::validate() const {
    base.validate();
    write_0to1.validate();
    write_1to0.validate();
}

// ---- nominal path ----

double p_rf_block(const CellParams& params, std::uint32_t n_bits, double t_vul_s) {
    require(t_vul_s >= 0.0, "vulnerable time must be >= 0");
    const double exponent = -static_cast<double>(n_bits) * t_vul_s * params.retention_rate();
    return -std::expm1(exponent);
}

double p_rf_cache(const CellParams& params, std::uint32_t n_bits,
                  std::span<const BlockAccounting> accts) {
    long double t_total = 0.0L;
    for (const auto& a : accts) {
        require(a.vulnerable_idle_time >= 0.0, "vulnerable time must be >= 0");
        t_total += a.vulnerable_idle_time;
    }
    const long double exponent =
        -static_cast<long double>(n_bits) * t_total * params.retention_rate();
    return from_logsurv(exponent);
}

double p_rd_block(const CellParams& params, std::uint64_t ones_read_total) {
    if (ones_read_total == 0) return 0.0;
    return from_logsurv(static_cast<long double>(ones_read_total) *
                        params.read_disturb_logsurv());
}

double p_rd_cache(const CellParams& params, std::uint64_t total_ones_read) {
    return p_rd_block(params, total_ones_read);
}

double p_wf_block(const WriteFailurePair& pair, std::uint64_t trans_0to1,
                  std::uint64_t trans_1to0) {
    long double ls = 0.0L;
    if (trans_0to1 != 0)
        ls += static_cast<long double>(trans_0to1) * std::log1p(-pair.p_wf_0to1);
    if (trans_1to0 != 0)
        ls += static_cast<long double>(trans_1to0) * std::log1p(-pair.p_wf_1to0);
    return from_logsurv(ls);
}

double p_wf_cache(const WriteFailurePair& pair, std::uint64_t total_0to1,
                  std::uint64_t total_1to0) {
    return p_wf_block(pair, total_0to1, total_1to0);
}

CacheLogSurvival nominal_cache_logsurv(const CellModelSet& cells, std::uint32_t n_bits,
                                       std::span<const BlockAccounting> accts) {
    long double t_vul = 0.0L;
    long double t_all = 0.0L;
    std::uint64_t ones = 0;
    std::uint64_t t01 = 0;
    std::uint64_t t10 = 0;
    for (const auto& a : accts) {
        require(a.vulnerable_idle_time >= 0.0 && a.all_idle_time >= 0.0,
                "idle times must be >= 0");
        t_vul += a.vulnerable_idle_time;
        t_all += a.all_idle_time;
        ones += a.ones_read_total;
        t01 += a.trans_0to1_total;
        t10 += a.trans_1to0_total;
    }

    const long double rate = cells.base.retention_rate();
    const long double n = static_cast<long double>(n_bits);

    CacheLogSurvival ls;
    ls.rf_vulnerable = static_cast<double>(-n * t_vul * rate);
    ls.rf_all = static_cast<double>(-n * t_all * rate);
    ls.rd = ones == 0 ? 0.0
                      : static_cast<double>(static_cast<long double>(ones) *
                                            cells.base.read_disturb_logsurv());

    long double wf = 0.0L;
    if (t01 != 0) wf += static_cast<long double>(t01) * cells.write_0to1.write_fail_logsurv();
    if (t10 != 0) wf += static_cast<long double>(t10) * cells.write_1to0.write_fail_logsurv();
    ls.wf = static_cast<double>(wf);
    return ls;
}

// ---- PV path ----

namespace {

struct PvAccumulator {
    long double rf_vul = 0.0L;
    long double rf_all = 0.0L;
    long double rd = 0.0L;
    long double wf = 0.0L;
};

// One pass over every touched cell; `what` selects the sources to fold so
// the single-source entry points do not pay for the others.
enum SourceMask : unsigned { kRf = 1, kRd = 2, kWf = 4, kAllSources = 7 };

void accumulate_pv(PvAccumulator& acc, const PvModel& pv, const CellModelSet& cells,
                   std::span<const BlockAccounting> accts, unsigned what) {
    for (const auto& a : accts) {
        if (!block_touched(a)) continue;
        require_per_bit(a);

        const std::size_t n_bits = std::max(
            {a.per_bit_vulnerable_time.size(), a.per_bit_ones_read.size(),
             a.per_bit_trans_0to1.size(), a.per_bit_trans_1to0.size()});
        require(n_bits > 0, "per-bit accounting vectors are empty");

        for (std::size_t bit = 0; bit < n_bits; ++bit) {
            const CellId id{a.set_index, a.way_index, static_cast<std::uint32_t>(bit)};

            if (what & kRf) {
                // All idle intervals span the whole block, so the per-cell
                // all-intervals time is the block scalar; the vulnerable
                // time is taken from the per-bit vector it is defined by.
                const double t_vul =
                    bit < a.per_bit_vulnerable_time.size() ? a.per_bit_vulnerable_time[bit] : 0.0;
                const double t_all = a.all_idle_time;
                if (t_vul != 0.0 || t_all != 0.0) {
                    const double rate = pv.apply(cells.base, id).retention_rate();
                    acc.rf_vul -= static_cast<long double>(t_vul) * rate;
                    acc.rf_all -= static_cast<long double>(t_all) * rate;
                }
            }
            if (what & kRd) {
                const std::uint32_t ones =
                    bit < a.per_bit_ones_read.size() ? a.per_bit_ones_read[bit] : 0;
                if (ones != 0) {
                    acc.rd += static_cast<long double>(ones) *
                              pv.apply(cells.base, id).read_disturb_logsurv();
                }
            }
            if (what & kWf) {
                const std::uint32_t t01 =
                    bit < a.per_bit_trans_0to1.size() ? a.per_bit_trans_0to1[bit] : 0;
                const std::uint32_t t10 =
                    bit < a.per_bit_trans_1to0.size() ? a.per_bit_trans_1to0[bit] : 0;
                if (t01 != 0) {
                    acc.wf += static_cast<long double>(t01) *
                              pv.apply(cells.write_0to1, id).write_fail_logsurv();
                }
                if (t10 != 0) {
                    acc.wf += static_cast<long double>(t10) *
                              pv.apply(cells.write_1to0, id).write_fail_logsurv();
                }
            }
        }
    }
}

} // namespace

double p_rf_cache_pv(const PvModel& pv, const CellParams& base,
                     std::span<const BlockAccounting> accts) {
    PvAccumulator acc;
    CellModelSet cells{base, base, base};
    accumulate_pv(acc, pv, cells, accts, kRf);
    return from_logsurv(acc.rf_vul);
}

double p_rd_cache_pv(const PvModel& pv, const CellParams& base,
                     std::span<const BlockAccounting> accts) {
    PvAccumulator acc;
    CellModelSet cells{base, base, base};
    accumulate_pv(acc, pv, cells, accts, kRd);
    return from_logsurv(acc.rd);
}

double p_wf_cache_pv(const PvModel& pv, const CellParams& preset_0to1,
                     const CellParams& preset_1to0, std::span<const BlockAccounting> accts) {
    PvAccumulator acc;
    CellModelSet cells{preset_0to1, preset_0to1, preset_1to0};
    accumulate_pv(acc, pv, cells, accts, kWf);
    return from_logsurv(acc.wf);
}

CacheLogSurvival pv_cache_logsurv(const PvModel& pv, const CellModelSet& cells,
                                  std::span<const BlockAccounting> accts) {
    PvAccumulator acc;
    accumulate_pv(acc, pv, cells, accts, kAllSources);
    CacheLogSurvival ls;
    ls.rf_vulnerable = static_cast<double>(acc.rf_vul);
    ls.rf_all = static_cast<double>(acc.rf_all);
    ls.rd = static_cast<double>(acc.rd);
    ls.wf = static_cast<double>(acc.wf);
    return ls;
}

// ---- per-unit-time integration ----

namespace {

SourceBreakdown breakdown_from(double ls_rf, double ls_rd, double ls_wf) {
    const double f_rf = -std::expm1(ls_rf);
    const double f_rd = -std::expm1(ls_rd);
    const double f_wf = -std::expm1(ls_wf);
    const double total = f_rf + f_rd + f_wf;
    SourceBreakdown b;
    if (total > 0.0) {
        b.rf = f_rf / total;
        b.rd = f_rd / total;
        b.wf = f_wf / total;
        b.defined = true;
    }
    return b;
}

} // namespace

ReliabilityReport make_report(const CacheLogSurvival& ls, double t_exe_s, double unit_s) {
    require(t_exe_s >= 0.0, "execution time must be >= 0");
    require(unit_s > 0.0, "report unit must be > 0");

    ReliabilityReport rep;
    rep.t_exe_s = t_exe_s;
    rep.unit_s = unit_s;
    rep.p_rf_cache = -std::expm1(ls.rf_vulnerable);
    rep.p_rf_cache_all_intervals = -std::expm1(ls.rf_all);
    rep.p_rd_cache = -std::expm1(ls.rd);
    rep.p_wf_cache = -std::expm1(ls.wf);

    if (t_exe_s == 0.0) {
        // Degenerate run: no execution time to normalize by. Reliabilities
        // stay at 1 and the breakdown falls back to total-execution values.
        rep.breakdown_vulnerable = breakdown_from(ls.rf_vulnerable, ls.rd, ls.wf);
        rep.breakdown_all_intervals = breakdown_from(ls.rf_all, ls.rd, ls.wf);
        return rep;
    }

    const double units = t_exe_s / unit_s;
    const double rf_t = ls.rf_vulnerable / units;
    const double rf_all_t = ls.rf_all / units;
    const double rd_t = ls.rd / units;
    const double wf_t = ls.wf / units;

    rep.r_rf_t = std::exp(rf_t);
    rep.r_rd_t = std::exp(rd_t);
    rep.r_wf_t = std::exp(wf_t);
    rep.p_total_per_t = -std::expm1(rf_t + rd_t + wf_t);
    rep.breakdown_vulnerable = breakdown_from(rf_t, rd_t, wf_t);
    rep.breakdown_all_intervals = breakdown_from(rf_all_t, rd_t, wf_t);
    return rep;
}

ReliabilityReport per_unit_time_report(const CellModelSet& cells, std::uint32_t n_bits,
                                       std::span<const BlockAccounting> accts, double t_exe_s,
                                       double unit_s) {
    return make_report(nominal_cache_logsurv(cells, n_bits, accts), t_exe_s, unit_s);
}

ReliabilityReport per_unit_time_report_pv(const PvModel& pv, const CellModelSet& cells,
                                          std::span<const BlockAccounting> accts, double t_exe_s,
                                          double unit_s) {
    return make_report(pv_cache_logsurv(pv, cells, accts), t_exe_s, unit_s);
}

double per_read_block_error(const CellModelSet& cells, std::uint32_t n_bits,
                            const ReadEventRecord& ev) {
    require(ev.idle_interval >= 0.0, "idle interval must be >= 0");
    long double ls = -static_cast<long double>(n_bits) * ev.idle_interval *
                     cells.base.retention_rate();
    if (ev.ones != 0)
        ls += static_cast<long double>(ev.ones) * cells.base.read_disturb_logsurv();
    if (ev.last_write_0to1 != 0)
        ls += static_cast<long double>(ev.last_write_0to1) *
              cells.write_0to1.write_fail_logsurv();
    if (ev.last_write_1to0 != 0)
        ls += static_cast<long double>(ev.last_write_1to0) *
              cells.write_1to0.write_fail_logsurv();
    return from_logsurv(ls);
}

} // namespace sttsim
