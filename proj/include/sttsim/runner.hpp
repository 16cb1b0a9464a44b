#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sttsim/cache.hpp"
#include "sttsim/config.hpp"
#include "sttsim/engine.hpp"
#include "sttsim/oracle.hpp"

// Orchestration: resolve the workload, replay it through the cache model,
// aggregate with the engine and render deterministic reports. Reports carry
// no wall-clock timestamps, every number is paired with its unit, and map
// keys serialize in sorted order, so identical (config, trace, seed) inputs
// produce byte-identical documents.

namespace sttsim {

struct TraceStats {
    std::uint64_t records = 0;
    std::uint64_t reads = 0;
    std::uint64_t writes = 0;
    std::uint64_t hits = 0;
    std::uint64_t misses = 0;
    std::uint64_t evictions = 0;
};

struct RunArtifacts {
    RunConfig config;
    std::uint64_t seed = 0; ///< effective workload seed after --seed override
    std::uint64_t config_hash = 0;
    std::string trace_source; ///< file path or "synthetic"

    TraceStats stats;
    CacheModel::FinalizeResult accounting;
    std::vector<ReadEventRecord> read_events; ///< only when requested

    CacheLogSurvival nominal_ls;
    ReliabilityReport nominal;
    std::optional<CacheLogSurvival> pv_ls;
    std::optional<ReliabilityReport> pv;
};

struct RunOptions {
    std::optional<std::uint64_t> seed_override;
    bool collect_intervals = false;   ///< keep per-interval lists (oracle input)
    bool collect_read_events = false; ///< per-read error stream
};

RunArtifacts execute_run(const RunConfig& cfg, const RunOptions& opts = {});

std::string report_json(const RunArtifacts& art);
/// CSV tables keyed by base filename ("retention", "read_disturb",
/// "write_fail", "total", "breakdown", and "per_read" when collected).
std::map<std::string, std::string> report_csv_tables(const RunArtifacts& art);

// ---- sweep ----

struct SweepPoint {
    double value = 0.0;
    RunArtifacts run;
    /// Forward-difference slope of each headline probability with respect to
    /// the swept parameter; absent on the last point.
    std::optional<double> slope_p_rf;
    std::optional<double> slope_p_rd;
    std::optional<double> slope_p_wf;
    std::optional<double> slope_p_total_per_t;
};

struct SweepResult {
    std::string parameter; ///< dotted config path
    std::vector<SweepPoint> points;
};

/// Re-runs the configuration once per value with the dotted numeric config
/// field `parameter_path` replaced. The document is re-validated per point.
SweepResult execute_sweep(const RunConfig& cfg, const std::string& parameter_path,
                          const std::vector<double>& values, const RunOptions& opts = {});

std::string sweep_json(const SweepResult& sweep);
std::string sweep_csv(const SweepResult& sweep);

// ---- validation ----

struct ValidationRow {
    std::string event_class; ///< "RF", "RD", "WF", "TOTAL"
    double analytic = 0.0;   ///< scaled analytic failure probability
    double estimate = 0.0;
    WilsonInterval interval;
    std::uint64_t trials = 0;
    std::uint64_t failures = 0;
    bool scale_clamped = false;
    bool pass = false;
};

struct ValidationResult {
    std::vector<ValidationRow> rows;
    bool all_pass = true;
    bool any_clamped = false;
    bool pv_path = false; ///< validated the PV path instead of the nominal one
};

/// Replays the trace, derives the per-event failure lists (PV path when
/// enabled) and checks the analytic value of every event class against the
/// Monte Carlo Wilson interval.
ValidationResult execute_validate(const RunConfig& cfg, const RunOptions& opts = {});

std::string validation_json(const ValidationResult& v, const RunArtifacts& art);
std::string validation_table(const ValidationResult& v);

} // namespace sttsim
