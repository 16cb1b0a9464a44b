#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "sttsim/cache.hpp"
#include "sttsim/engine.hpp"
#include "sttsim/pv.hpp"
#include "sttsim/synth.hpp"

// Run configuration: a single JSON document describing geometry, cell
// physics, PV model, workload source and reporting options. Physical cell
// parameters must be explicit in the file; only universal constants and
// bookkeeping knobs carry defaults. Validation errors name the dotted field
// path they refer to.

namespace sttsim {

enum class ScenarioSelect { VulnerableOnly, AllIntervals, Both };

struct OracleConfig {
    std::uint64_t trials = 100000;
    std::uint64_t seed = 1;
    double scale_factor = 1.0; ///< >= 1; amplifies per-event probabilities
    double z = 4.0;            ///< interval half-width in sigmas

    void validate() const;
};

/// Exactly one of `file` / `synthetic` is set.
struct TraceSource {
    std::string file;
    std::optional<SyntheticSpec> synthetic;
};

struct RunConfig {
    CacheGeometry geometry;
    CellModelSet cells;

    bool pv_enabled = false;
    PvConfig pv;

    TraceSource trace;
    ScenarioSelect scenario = ScenarioSelect::Both;
    bool zero_vulnerable = false; ///< read-disturb direction ('0' cells vulnerable)

    std::string unit_name = "us";
    double unit_s = 1e-6;

    std::uint64_t seed = 0; ///< synthetic-trace seed; the CLI --seed flag overrides it
    OracleConfig oracle;

    std::string raw_text; ///< exact file bytes, hashed into reports

    void validate() const;
};

RunConfig parse_run_config(const std::string& text, const std::string& source_name);
RunConfig load_run_config(const std::string& path);

/// 64-bit FNV-1a over raw bytes; identifies the configuration in reports.
std::uint64_t fnv1a_hash(const std::string& bytes);

} // namespace sttsim
