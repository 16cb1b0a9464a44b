#include "sttsim/runner.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <utility>

#include <json.hpp>

#include "sttsim/errors.hpp"
#include "sttsim/rng.hpp"
#include "sttsim/synth.hpp"
#include "sttsim/trace.hpp"

namespace sttsim {

namespace {

using nlohmann::json;

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_hash(std::uint64_t h) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "0x%016" PRIx64, h);
    return buf;
}

json qty(double value, const std::string& unit) {
    return json{{"unit", unit}, {"value", value}};
}

json qty_count(std::uint64_t value) {
    return json{{"unit", "count"}, {"value", value}};
}

const char* scenario_name(ScenarioSelect s) {
    switch (s) {
    case ScenarioSelect::VulnerableOnly: return "vulnerable-only";
    case ScenarioSelect::AllIntervals: return "all-intervals";
    default: return "both";
    }
}

struct Totals {
    double vulnerable_idle_time = 0.0;
    double all_idle_time = 0.0;
    std::uint64_t ones_read = 0;
    std::uint64_t trans_0to1 = 0;
    std::uint64_t trans_1to0 = 0;
    std::uint64_t reads = 0;
    std::uint64_t writes = 0;
};

Totals sum_totals(const std::vector<BlockAccounting>& blocks) {
    Totals t;
    for (const auto& b : blocks) {
        t.vulnerable_idle_time += b.vulnerable_idle_time;
        t.all_idle_time += b.all_idle_time;
        t.ones_read += b.ones_read_total;
        t.trans_0to1 += b.trans_0to1_total;
        t.trans_1to0 += b.trans_1to0_total;
        t.reads += b.reads_total;
        t.writes += b.writes_total;
    }
    return t;
}

/// The all-intervals retention scenario is the same report with the
/// worst-case retention exponent in the leading slot.
ReliabilityReport all_intervals_report(const CacheLogSurvival& ls, double t_exe, double unit_s) {
    CacheLogSurvival swapped = ls;
    swapped.rf_vulnerable = ls.rf_all;
    return make_report(swapped, t_exe, unit_s);
}

json breakdown_json(const SourceBreakdown& b) {
    return json{{"defined", b.defined},
                {"rd", qty(b.rd, "fraction")},
                {"rf", qty(b.rf, "fraction")},
                {"wf", qty(b.wf, "fraction")}};
}

json scenario_json(const ReliabilityReport& rep, const std::string& unit_name) {
    return json{{"breakdown", breakdown_json(rep.breakdown_vulnerable)},
                {"p_rf_cache", qty(rep.p_rf_cache, "probability")},
                {"p_total_per_t", qty(rep.p_total_per_t, "probability/" + unit_name)},
                {"r_rd_t", qty(rep.r_rd_t, "survival/" + unit_name)},
                {"r_rf_t", qty(rep.r_rf_t, "survival/" + unit_name)},
                {"r_wf_t", qty(rep.r_wf_t, "survival/" + unit_name)}};
}

json path_json(const RunArtifacts& art, const CacheLogSurvival& ls,
               const ReliabilityReport& rep, bool with_worst_case) {
    const RunConfig& cfg = art.config;
    json scenarios = json::object();
    if (cfg.scenario != ScenarioSelect::AllIntervals)
        scenarios["vulnerable_only"] = scenario_json(rep, cfg.unit_name);
    if (cfg.scenario != ScenarioSelect::VulnerableOnly) {
        scenarios["all_intervals"] = scenario_json(
            all_intervals_report(ls, art.accounting.t_exe, cfg.unit_s), cfg.unit_name);
    }

    json out{{"p_rd_cache", qty(rep.p_rd_cache, "probability")},
             {"p_wf_cache", qty(rep.p_wf_cache, "probability")},
             {"scenarios", std::move(scenarios)}};

    if (with_worst_case) {
        // Upper bounds with every bit of every access vulnerable: reads of
        // all-ones blocks, writes flipping all bits in the hard direction.
        const Totals t = sum_totals(art.accounting.blocks);
        const auto n = static_cast<std::uint64_t>(cfg.geometry.block_size_bits);
        out["worst_case"] =
            json{{"p_rd_cache_all_bits", qty(p_rd_cache(cfg.cells.base, t.reads * n),
                                             "probability")},
                 {"p_wf_cache_all_bits_0to1",
                  qty(p_wf_cache(cfg.cells.pair(), t.writes * n, 0), "probability")}};
    }
    return out;
}

json run_json(const RunArtifacts& art) {
    const RunConfig& cfg = art.config;
    const char* repl = cfg.geometry.replacement == ReplacementPolicy::Lru ? "lru" : "fifo";
    return json{
        {"config_hash_fnv1a", fmt_hash(art.config_hash)},
        {"geometry", json{{"associativity", cfg.geometry.associativity},
                          {"block_size_bits", cfg.geometry.block_size_bits},
                          {"num_sets", cfg.geometry.num_sets},
                          {"replacement", repl}}},
        {"pv_enabled", cfg.pv_enabled},
        {"read_disturb_direction", cfg.zero_vulnerable ? "zero" : "one"},
        {"report_unit", cfg.unit_name},
        {"retention_scenario", scenario_name(cfg.scenario)},
        {"seed", art.seed},
        {"t_exe", qty(art.accounting.t_exe / cfg.unit_s, cfg.unit_name)},
        {"trace", json{{"evictions", qty_count(art.stats.evictions)},
                       {"hits", qty_count(art.stats.hits)},
                       {"misses", qty_count(art.stats.misses)},
                       {"reads", qty_count(art.stats.reads)},
                       {"records", qty_count(art.stats.records)},
                       {"source", art.trace_source},
                       {"writes", qty_count(art.stats.writes)}}}};
}

json totals_json(const RunArtifacts& art) {
    const Totals t = sum_totals(art.accounting.blocks);
    return json{{"all_idle_time", qty(t.all_idle_time, "s")},
                {"ones_read", qty_count(t.ones_read)},
                {"reads", qty_count(t.reads)},
                {"trans_0to1", qty_count(t.trans_0to1)},
                {"trans_1to0", qty_count(t.trans_1to0)},
                {"vulnerable_idle_time", qty(t.vulnerable_idle_time, "s")},
                {"writes", qty_count(t.writes)}};
}

} // namespace

RunArtifacts execute_run(const RunConfig& cfg, const RunOptions& opts) {
    cfg.validate();

    RunArtifacts art;
    art.config = cfg;
    art.seed = opts.seed_override.value_or(cfg.seed);
    art.config_hash = fnv1a_hash(cfg.raw_text);

    std::vector<AccessRecord> records;
    if (cfg.trace.synthetic) {
        art.trace_source = "synthetic";
        records = generate_trace(*cfg.trace.synthetic, cfg.geometry.block_bytes(), art.seed);
    } else {
        art.trace_source = cfg.trace.file;
        records = load_trace(cfg.trace.file, cfg.geometry.block_bytes());
    }

    CacheOptions copts;
    copts.collect_per_bit = cfg.pv_enabled;
    copts.collect_intervals = opts.collect_intervals;
    copts.collect_read_events = opts.collect_read_events;
    copts.zero_vulnerable = cfg.zero_vulnerable;
    CacheModel model(cfg.geometry, copts);

    std::int64_t end_ts = 0;
    for (const auto& rec : records) {
        const AccessOutcome outcome = model.apply_access(rec);
        end_ts = rec.timestamp_ns;
        if (rec.kind == AccessKind::Read) {
            ++art.stats.reads;
        } else {
            ++art.stats.writes;
        }
        if (outcome.hit) {
            ++art.stats.hits;
        } else {
            ++art.stats.misses;
        }
        if (outcome.evicted) ++art.stats.evictions;
    }
    art.stats.records = records.size();

    art.accounting = model.finalize(end_ts);
    if (opts.collect_read_events) art.read_events = model.read_events();

    art.nominal_ls = nominal_cache_logsurv(cfg.cells, cfg.geometry.block_size_bits,
                                           art.accounting.blocks);
    art.nominal = make_report(art.nominal_ls, art.accounting.t_exe, cfg.unit_s);

    if (cfg.pv_enabled) {
        const PvModel pv(cfg.pv, cfg.cells.base);
        art.pv_ls = pv_cache_logsurv(pv, cfg.cells, art.accounting.blocks);
        art.pv = make_report(*art.pv_ls, art.accounting.t_exe, cfg.unit_s);
    }
    return art;
}

std::string report_json(const RunArtifacts& art) {
    json results{{"nominal", path_json(art, art.nominal_ls, art.nominal, true)}};
    if (art.pv) results["pv"] = path_json(art, *art.pv_ls, *art.pv, false);

    const json doc{{"results", std::move(results)},
                   {"run", run_json(art)},
                   {"schema", "sttsim-report"},
                   {"schema_version", 1},
                   {"totals", totals_json(art)}};
    return doc.dump(2) + "\n";
}

namespace {

struct PathView {
    const char* name;
    const CacheLogSurvival* ls;
    const ReliabilityReport* rep;
};

std::vector<PathView> path_views(const RunArtifacts& art) {
    std::vector<PathView> v{{"nominal", &art.nominal_ls, &art.nominal}};
    if (art.pv) v.push_back({"pv", &*art.pv_ls, &*art.pv});
    return v;
}

struct ScenarioView {
    const char* name;
    ReliabilityReport rep;
};

std::vector<ScenarioView> scenario_views(const RunArtifacts& art, const PathView& path) {
    std::vector<ScenarioView> v;
    if (art.config.scenario != ScenarioSelect::AllIntervals)
        v.push_back({"vulnerable_only", *path.rep});
    if (art.config.scenario != ScenarioSelect::VulnerableOnly) {
        v.push_back({"all_intervals", all_intervals_report(*path.ls, art.accounting.t_exe,
                                                           art.config.unit_s)});
    }
    return v;
}

} // namespace

std::map<std::string, std::string> report_csv_tables(const RunArtifacts& art) {
    std::map<std::string, std::string> tables;
    const auto paths = path_views(art);

    std::string retention = "path,scenario,p_rf_cache,r_rf_t\n";
    std::string total = "path,scenario,p_total_per_t,r_rf_t,r_rd_t,r_wf_t\n";
    std::string breakdown = "path,scenario,rf_share,rd_share,wf_share,defined\n";
    for (const auto& p : paths) {
        for (const auto& s : scenario_views(art, p)) {
            retention += std::string(p.name) + "," + s.name + "," +
                         fmt_double(s.rep.p_rf_cache) + "," + fmt_double(s.rep.r_rf_t) + "\n";
            total += std::string(p.name) + "," + s.name + "," +
                     fmt_double(s.rep.p_total_per_t) + "," + fmt_double(s.rep.r_rf_t) + "," +
                     fmt_double(s.rep.r_rd_t) + "," + fmt_double(s.rep.r_wf_t) + "\n";
            const SourceBreakdown& b = s.rep.breakdown_vulnerable;
            breakdown += std::string(p.name) + "," + s.name + "," + fmt_double(b.rf) + "," +
                         fmt_double(b.rd) + "," + fmt_double(b.wf) + "," +
                         (b.defined ? "true" : "false") + "\n";
        }
    }
    tables["retention"] = std::move(retention);
    tables["total"] = std::move(total);
    tables["breakdown"] = std::move(breakdown);

    const Totals t = sum_totals(art.accounting.blocks);
    const auto n = static_cast<std::uint64_t>(art.config.geometry.block_size_bits);
    std::string rd = "path,p_rd_cache,r_rd_t,p_rd_cache_worst_all_bits\n";
    std::string wf = "path,p_wf_cache,r_wf_t,p_wf_cache_worst_all_bits\n";
    for (const auto& p : paths) {
        const bool nominal = std::string(p.name) == "nominal";
        rd += std::string(p.name) + "," + fmt_double(p.rep->p_rd_cache) + "," +
              fmt_double(p.rep->r_rd_t) + "," +
              (nominal ? fmt_double(p_rd_cache(art.config.cells.base, t.reads * n)) : "") +
              "\n";
        wf += std::string(p.name) + "," + fmt_double(p.rep->p_wf_cache) + "," +
              fmt_double(p.rep->r_wf_t) + "," +
              (nominal ? fmt_double(p_wf_cache(art.config.cells.pair(), t.writes * n, 0))
                       : "") +
              "\n";
    }
    tables["read_disturb"] = std::move(rd);
    tables["write_fail"] = std::move(wf);

    if (!art.read_events.empty()) {
        std::string pr = "index,set,way,idle_s,ones,last_write_0to1,last_write_1to0,p_error\n";
        std::size_t idx = 0;
        for (const auto& ev : art.read_events) {
            pr += std::to_string(idx++) + "," + std::to_string(ev.set_index) + "," +
                  std::to_string(ev.way_index) + "," + fmt_double(ev.idle_interval) + "," +
                  std::to_string(ev.ones) + "," + std::to_string(ev.last_write_0to1) + "," +
                  std::to_string(ev.last_write_1to0) + "," +
                  fmt_double(per_read_block_error(art.config.cells,
                                                  art.config.geometry.block_size_bits, ev)) +
                  "\n";
        }
        tables["per_read"] = std::move(pr);
    }
    return tables;
}

// ---- sweep ----

SweepResult execute_sweep(const RunConfig& cfg, const std::string& parameter_path,
                          const std::vector<double>& values, const RunOptions& opts) {
    if (values.empty()) throw ConfigError("sweep needs at least one value", parameter_path);
    if (parameter_path.empty()) throw ConfigError("sweep parameter path is empty");

    json doc;
    try {
        doc = json::parse(cfg.raw_text, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("not valid JSON: ") + e.what());
    }

    std::string pointer = "/";
    for (char c : parameter_path) pointer += c == '.' ? '/' : c;
    const json::json_pointer ptr(pointer);

    bool integer_field = false;
    try {
        const json& field = doc.at(ptr);
        if (!field.is_number())
            throw ConfigError("sweep path does not address a numeric field", parameter_path);
        integer_field = field.is_number_integer() || field.is_number_unsigned();
    } catch (const json::exception&) {
        throw ConfigError("sweep path does not address an existing config field",
                          parameter_path);
    }

    SweepResult result;
    result.parameter = parameter_path;
    for (double v : values) {
        if (integer_field && v == std::floor(v) && std::abs(v) < 9e18) {
            doc[ptr] = static_cast<std::int64_t>(v);
        } else {
            doc[ptr] = v;
        }
        const RunConfig point_cfg = parse_run_config(doc.dump(2), "<sweep>");
        SweepPoint point;
        point.value = v;
        point.run = execute_run(point_cfg, opts);
        result.points.push_back(std::move(point));
    }

    for (std::size_t k = 0; k + 1 < result.points.size(); ++k) {
        SweepPoint& a = result.points[k];
        const SweepPoint& b = result.points[k + 1];
        const double dx = b.value - a.value;
        if (dx == 0.0) continue;
        a.slope_p_rf = (b.run.nominal.p_rf_cache - a.run.nominal.p_rf_cache) / dx;
        a.slope_p_rd = (b.run.nominal.p_rd_cache - a.run.nominal.p_rd_cache) / dx;
        a.slope_p_wf = (b.run.nominal.p_wf_cache - a.run.nominal.p_wf_cache) / dx;
        a.slope_p_total_per_t =
            (b.run.nominal.p_total_per_t - a.run.nominal.p_total_per_t) / dx;
    }
    return result;
}

namespace {

json opt_qty(const std::optional<double>& v, const std::string& unit) {
    if (!v) return nullptr;
    return qty(*v, unit);
}

} // namespace

std::string sweep_json(const SweepResult& sweep) {
    json points = json::array();
    for (const auto& p : sweep.points) {
        const std::string& unit = p.run.config.unit_name;
        points.push_back(
            json{{"report", json::parse(report_json(p.run))},
                 {"sensitivity",
                  json{{"dp_rd_cache", opt_qty(p.slope_p_rd, "probability/unit")},
                       {"dp_rf_cache", opt_qty(p.slope_p_rf, "probability/unit")},
                       {"dp_total_per_t",
                        opt_qty(p.slope_p_total_per_t, "probability/" + unit + "/unit")},
                       {"dp_wf_cache", opt_qty(p.slope_p_wf, "probability/unit")}}},
                 {"value", p.value}});
    }
    const json doc{{"parameter", sweep.parameter},
                   {"points", std::move(points)},
                   {"schema", "sttsim-sweep"},
                   {"schema_version", 1}};
    return doc.dump(2) + "\n";
}

std::string sweep_csv(const SweepResult& sweep) {
    std::string out =
        "value,p_rf_cache,p_rd_cache,p_wf_cache,p_total_per_t,"
        "dp_rf_cache,dp_rd_cache,dp_wf_cache,dp_total_per_t\n";
    auto opt = [](const std::optional<double>& v) { return v ? fmt_double(*v) : ""; };
    for (const auto& p : sweep.points) {
        const ReliabilityReport& r = p.run.nominal;
        out += fmt_double(p.value) + "," + fmt_double(r.p_rf_cache) + "," +
               fmt_double(r.p_rd_cache) + "," + fmt_double(r.p_wf_cache) + "," +
               fmt_double(r.p_total_per_t) + "," + opt(p.slope_p_rf) + "," +
               opt(p.slope_p_rd) + "," + opt(p.slope_p_wf) + "," +
               opt(p.slope_p_total_per_t) + "\n";
    }
    return out;
}

// ---- validation ----

ValidationResult execute_validate(const RunConfig& cfg, const RunOptions& opts) {
    RunOptions run_opts = opts;
    run_opts.collect_intervals = true;
    const RunArtifacts art = execute_run(cfg, run_opts);

    std::vector<FailureEvent> events;
    ValidationResult result;
    if (cfg.pv_enabled) {
        result.pv_path = true;
        const PvModel pv(cfg.pv, cfg.cells.base);
        events = pv_cache_events(pv, cfg.cells, art.accounting.blocks);
    } else {
        events = nominal_cache_events(cfg.cells, cfg.geometry.block_size_bits,
                                      art.accounting.blocks);
    }

    const struct {
        const char* name;
        std::optional<EventClass> cls;
    } classes[] = {{"RF", EventClass::RF},
                   {"RD", EventClass::RD},
                   {"WF", EventClass::WF},
                   {"TOTAL", std::nullopt}};

    std::uint32_t class_idx = 0;
    for (const auto& c : classes) {
        std::vector<FailureEvent> filtered;
        for (const auto& ev : events) {
            if (!c.cls || ev.cls == *c.cls) filtered.push_back(ev);
        }

        ValidationRow row;
        row.event_class = c.name;
        row.trials = cfg.oracle.trials;
        bool clamped = false;
        row.analytic = scaled_analytic_failure(filtered, cfg.oracle.scale_factor, &clamped);

        if (filtered.empty()) {
            row.interval = {0.0, 0.0};
            row.pass = row.analytic == 0.0;
        } else {
            const McEstimate est = estimate_cache_failure(
                filtered, cfg.oracle.trials, rng::hash2(cfg.oracle.seed, class_idx),
                cfg.oracle.scale_factor, cfg.oracle.z);
            row.estimate = est.p_hat;
            row.failures = est.failures;
            row.interval = est.interval;
            clamped = clamped || est.scale_clamped;
            row.pass = est.interval.lo <= row.analytic && row.analytic <= est.interval.hi;
        }
        row.scale_clamped = clamped;
        result.any_clamped = result.any_clamped || clamped;
        result.all_pass = result.all_pass && row.pass;
        result.rows.push_back(std::move(row));
        ++class_idx;
    }
    return result;
}

std::string validation_json(const ValidationResult& v, const RunArtifacts& art) {
    json rows = json::array();
    for (const auto& r : v.rows) {
        rows.push_back(json{{"analytic_scaled", qty(r.analytic, "probability")},
                            {"estimate", qty(r.estimate, "probability")},
                            {"event_class", r.event_class},
                            {"failures", qty_count(r.failures)},
                            {"interval_hi", qty(r.interval.hi, "probability")},
                            {"interval_lo", qty(r.interval.lo, "probability")},
                            {"pass", r.pass},
                            {"scale_clamped", r.scale_clamped},
                            {"trials", qty_count(r.trials)}});
    }
    const json doc{{"all_pass", v.all_pass},
                   {"any_clamped", v.any_clamped},
                   {"oracle", json{{"scale_factor", art.config.oracle.scale_factor},
                                   {"seed", art.config.oracle.seed},
                                   {"trials", art.config.oracle.trials},
                                   {"z", art.config.oracle.z}}},
                   {"path", v.pv_path ? "pv" : "nominal"},
                   {"rows", std::move(rows)},
                   {"run", run_json(art)},
                   {"schema", "sttsim-validation"},
                   {"schema_version", 1}};
    return doc.dump(2) + "\n";
}

std::string validation_table(const ValidationResult& v) {
    char line[160];
    std::string out;
    std::snprintf(line, sizeof line, "%-6s %-13s %-13s %-29s %-9s %s\n", "class", "analytic",
                  "estimate", "interval", "trials", "result");
    out += line;
    for (const auto& r : v.rows) {
        char interval[40];
        std::snprintf(interval, sizeof interval, "[%.5e, %.5e]", r.interval.lo,
                      r.interval.hi);
        std::snprintf(line, sizeof line, "%-6s %-13.5e %-13.5e %-29s %-9" PRIu64 " %s%s\n",
                      r.event_class.c_str(), r.analytic, r.estimate, interval, r.trials,
                      r.pass ? "pass" : "FAIL", r.scale_clamped ? " (clamped)" : "");
        out += line;
    }
    out += v.all_pass ? "validation: all event classes within the confidence interval\n"
                      : "validation: FAILED\n";
    if (v.any_clamped)
        out += "warning: scale_factor clamped at least one event probability to 1\n";
    return out;
}

} // namespace sttsim
