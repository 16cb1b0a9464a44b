#include "sttsim/config.hpp"

#include <fstream>
#include <initializer_list>
#include <iostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "sttsim/errors.hpp"

namespace sttsim {

namespace {

using nlohmann::json;

std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

const json& expect_object(const json& j, const std::string& path) {
    if (!j.is_object()) throw ConfigError("must be an object", path);
    return j;
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* k : allowed) {
            if (item.key() == k) {
                known = true;
                break;
            }
        }
        if (!known) throw ConfigError("unknown field", join(path, item.key()));
    }
}

double get_number(const json& obj, const std::string& path, const char* key) {
    const auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError("required field is missing", join(path, key));
    if (!it->is_number()) throw ConfigError("must be a number", join(path, key));
    return it->get<double>();
}

double get_number_or(const json& obj, const std::string& path, const char* key, double def) {
    const auto it = obj.find(key);
    if (it == obj.end()) return def;
    if (!it->is_number()) throw ConfigError("must be a number", join(path, key));
    return it->get<double>();
}

std::uint64_t get_u64_or(const json& obj, const std::string& path, const char* key,
                         std::uint64_t def) {
    const auto it = obj.find(key);
    if (it == obj.end()) return def;
    if (it->is_number_unsigned()) return it->get<std::uint64_t>();
    if (it->is_number_integer() && it->get<std::int64_t>() >= 0)
        return static_cast<std::uint64_t>(it->get<std::int64_t>());
    throw ConfigError("must be a nonnegative integer", join(path, key));
}

std::int64_t get_i64(const json& obj, const std::string& path, const char* key,
                     std::optional<std::int64_t> def = std::nullopt) {
    const auto it = obj.find(key);
    if (it == obj.end()) {
        if (def) return *def;
        throw ConfigError("required field is missing", join(path, key));
    }
    if (!it->is_number_integer() && !it->is_number_unsigned())
        throw ConfigError("must be an integer", join(path, key));
    return it->get<std::int64_t>();
}

bool get_bool_or(const json& obj, const std::string& path, const char* key, bool def) {
    const auto it = obj.find(key);
    if (it == obj.end()) return def;
    if (!it->is_boolean()) throw ConfigError("must be a boolean", join(path, key));
    return it->get<bool>();
}

std::string get_string_or(const json& obj, const std::string& path, const char* key,
                          const std::string& def) {
    const auto it = obj.find(key);
    if (it == obj.end()) return def;
    if (!it->is_string()) throw ConfigError("must be a string", join(path, key));
    return it->get<std::string>();
}

CacheGeometry parse_geometry(const json& j, const std::string& path) {
    expect_object(j, path);
    check_keys(j, path, {"num_sets", "associativity", "block_size_bits", "replacement"});
    CacheGeometry g;
    g.num_sets = static_cast<std::uint32_t>(get_u64_or(j, path, "num_sets", 0));
    g.associativity = static_cast<std::uint32_t>(get_u64_or(j, path, "associativity", 0));
    g.block_size_bits = static_cast<std::uint32_t>(get_u64_or(j, path, "block_size_bits", 0));
    const std::string repl = get_string_or(j, path, "replacement", "lru");
    if (repl == "lru") {
        g.replacement = ReplacementPolicy::Lru;
    } else if (repl == "fifo") {
        g.replacement = ReplacementPolicy::Fifo;
    } else {
        throw ConfigError("must be \"lru\" or \"fifo\"", join(path, "replacement"));
    }
    try {
        g.validate();
    } catch (const InvalidParameter& e) {
        throw ConfigError(e.what(), path);
    }
    return g;
}

constexpr std::initializer_list<const char*> kCellKeys = {
    "delta",     "e_b",     "temperature", "i_c0",        "i_read",
    "i_write",   "t_read",  "t_write",     "tau",         "m",
    "p_pol",     "mu_beta", "euler_c",     "e_charge",    "k_boltzmann",
    "retention_rate_scale"};

/// Applies the fields present in `j` on top of `base`. With `require_physics`
/// every physical parameter must be present (the base cell section); preset
/// sections override selectively.
CellParams parse_cell(const json& j, const std::string& path, CellParams base,
                      bool require_physics) {
    expect_object(j, path);
    check_keys(j, path, kCellKeys);

    auto num = [&](const char* key, double current, bool required) {
        if (required) return get_number(j, path, key);
        return get_number_or(j, path, key, current);
    };

    CellParams p = base;
    const bool has_delta = j.contains("delta");
    const bool has_eb = j.contains("e_b");
    if (require_physics && !has_delta && !has_eb)
        throw ConfigError("either delta or e_b is required", join(path, "delta"));

    p.temperature = num("temperature", p.temperature, false);
    p.i_c0 = num("i_c0", p.i_c0, require_physics);
    p.i_read = num("i_read", p.i_read, require_physics);
    p.i_write = num("i_write", p.i_write, require_physics);
    p.t_read = num("t_read", p.t_read, require_physics);
    p.t_write = num("t_write", p.t_write, require_physics);
    p.tau = num("tau", p.tau, false);
    p.m = num("m", p.m, require_physics);
    p.p_pol = num("p_pol", p.p_pol, require_physics);
    p.mu_beta = num("mu_beta", p.mu_beta, false);
    p.euler_c = num("euler_c", p.euler_c, false);
    p.e_charge = num("e_charge", p.e_charge, false);
    p.k_boltzmann = num("k_boltzmann", p.k_boltzmann, false);
    p.retention_rate_scale = num("retention_rate_scale", p.retention_rate_scale, false);

    if (has_delta) {
        p.delta = get_number(j, path, "delta");
        if (!has_eb) p.e_b.reset();
    }
    if (has_eb) {
        const double e_b = get_number(j, path, "e_b");
        if (has_delta) {
            p.e_b = e_b; // validate() checks consistency with delta
        } else {
            p = CellParams::with_barrier_energy(p, e_b, p.temperature);
        }
    }

    try {
        p.validate();
    } catch (const InvalidParameter& e) {
        throw ConfigError(e.what(), path);
    }
    return p;
}

PvConfig parse_pv(const json& j, const std::string& path, bool& enabled) {
    expect_object(j, path);
    check_keys(j, path, {"enabled", "sigma_rel", "seed", "truncation", "affected"});
    enabled = get_bool_or(j, path, "enabled", true);
    PvConfig pv;
    pv.sigma_rel = get_number_or(j, path, "sigma_rel", pv.sigma_rel);
    pv.seed = get_u64_or(j, path, "seed", pv.seed);
    pv.truncation = get_number_or(j, path, "truncation", pv.truncation);
    if (const auto it = j.find("affected"); it != j.end()) {
        if (!it->is_array()) throw ConfigError("must be an array", join(path, "affected"));
        pv.affected.clear();
        std::size_t idx = 0;
        for (const auto& name : *it) {
            const std::string field = join(path, "affected[" + std::to_string(idx) + "]");
            if (!name.is_string()) throw ConfigError("must be a string", field);
            try {
                pv.affected.push_back(pv_param_from_name(name.get<std::string>()));
            } catch (const InvalidParameter& e) {
                throw ConfigError(e.what(), field);
            }
            ++idx;
        }
    }
    try {
        pv.validate();
    } catch (const InvalidParameter& e) {
        throw ConfigError(e.what(), path);
    }
    return pv;
}

SyntheticSpec parse_synth(const json& j, const std::string& path) {
    expect_object(j, path);
    check_keys(j, path,
               {"duration_ns", "request_rate_per_us", "read_fraction", "working_set_blocks",
                "zipf_exponent", "ones_density", "rewrite_similarity", "initial_fill"});
    SyntheticSpec s;
    s.duration_ns = get_i64(j, path, "duration_ns", s.duration_ns);
    s.request_rate_per_us =
        get_number_or(j, path, "request_rate_per_us", s.request_rate_per_us);
    s.read_fraction = get_number_or(j, path, "read_fraction", s.read_fraction);
    s.working_set_blocks = get_u64_or(j, path, "working_set_blocks", s.working_set_blocks);
    s.zipf_exponent = get_number_or(j, path, "zipf_exponent", s.zipf_exponent);
    s.ones_density = get_number_or(j, path, "ones_density", s.ones_density);
    s.rewrite_similarity = get_number_or(j, path, "rewrite_similarity", s.rewrite_similarity);
    s.initial_fill = get_bool_or(j, path, "initial_fill", s.initial_fill);
    try {
        s.validate();
    } catch (const InvalidParameter& e) {
        throw ConfigError(e.what(), path);
    }
    return s;
}

OracleConfig parse_oracle(const json& j, const std::string& path) {
    expect_object(j, path);
    check_keys(j, path, {"trials", "seed", "scale_factor", "z"});
    OracleConfig o;
    o.trials = get_u64_or(j, path, "trials", o.trials);
    o.seed = get_u64_or(j, path, "seed", o.seed);
    o.scale_factor = get_number_or(j, path, "scale_factor", o.scale_factor);
    o.z = get_number_or(j, path, "z", o.z);
    try {
        o.validate();
    } catch (const InvalidParameter& e) {
        throw ConfigError(e.what(), path);
    }
    return o;
}

} // namespace

void OracleConfig::validate() const {
    if (trials < 1) throw InvalidParameter("trials must be >= 1");
    if (scale_factor < 1.0) throw InvalidParameter("scale_factor must be >= 1");
    if (!(z > 0.0)) throw InvalidParameter("z must be > 0");
}

void RunConfig::validate() const {
    try {
        geometry.validate();
        cells.validate();
        pv.validate();
        oracle.validate();
        if (trace.file.empty() == !trace.synthetic.has_value())
            throw InvalidParameter("exactly one trace source (file or synthetic) is required");
        if (trace.synthetic) trace.synthetic->validate();
        if (!(unit_s > 0.0)) throw InvalidParameter("report unit must be positive");
    } catch (const InvalidParameter& e) {
        throw ConfigError(e.what());
    }
}

RunConfig parse_run_config(const std::string& text, const std::string& source_name) {
    json doc;
    try {
        doc = json::parse(text, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("not valid JSON: ") + e.what(), source_name);
    }
    expect_object(doc, source_name);
    check_keys(doc, "",
               {"schema_version", "geometry", "cell", "write_0to1", "write_1to0", "pv",
                "trace", "retention_scenario", "read_disturb_direction", "report_unit",
                "seed", "oracle"});

    const auto version = get_u64_or(doc, "", "schema_version", 1);
    if (version != 1)
        throw ConfigError("unsupported schema_version " + std::to_string(version),
                          "schema_version");

    RunConfig cfg;
    cfg.raw_text = text;

    if (!doc.contains("geometry")) throw ConfigError("required field is missing", "geometry");
    cfg.geometry = parse_geometry(doc["geometry"], "geometry");

    if (!doc.contains("cell")) throw ConfigError("required field is missing", "cell");
    cfg.cells.base = parse_cell(doc["cell"], "cell", CellParams{}, true);
    cfg.cells.write_0to1 = doc.contains("write_0to1")
                               ? parse_cell(doc["write_0to1"], "write_0to1", cfg.cells.base, false)
                               : cfg.cells.base;
    cfg.cells.write_1to0 = doc.contains("write_1to0")
                               ? parse_cell(doc["write_1to0"], "write_1to0", cfg.cells.base, false)
                               : cfg.cells.base;

    if (doc.contains("pv")) cfg.pv = parse_pv(doc["pv"], "pv", cfg.pv_enabled);

    if (!doc.contains("trace")) throw ConfigError("required field is missing", "trace");
    {
        const json& t = expect_object(doc["trace"], "trace");
        check_keys(t, "trace", {"file", "synthetic"});
        const bool has_file = t.contains("file");
        const bool has_synth = t.contains("synthetic");
        if (has_file == has_synth)
            throw ConfigError("exactly one of file or synthetic is required", "trace");
        if (has_file) {
            cfg.trace.file = get_string_or(t, "trace", "file", "");
            if (cfg.trace.file.empty())
                throw ConfigError("must be a nonempty string", "trace.file");
        } else {
            cfg.trace.synthetic = parse_synth(t["synthetic"], "trace.synthetic");
        }
    }

    const std::string scenario = get_string_or(doc, "", "retention_scenario", "both");
    if (scenario == "vulnerable-only") {
        cfg.scenario = ScenarioSelect::VulnerableOnly;
    } else if (scenario == "all-intervals") {
        cfg.scenario = ScenarioSelect::AllIntervals;
    } else if (scenario == "both") {
        cfg.scenario = ScenarioSelect::Both;
    } else {
        throw ConfigError("must be \"vulnerable-only\", \"all-intervals\" or \"both\"",
                          "retention_scenario");
    }

    const std::string direction = get_string_or(doc, "", "read_disturb_direction", "one");
    if (direction == "one") {
        cfg.zero_vulnerable = false;
    } else if (direction == "zero") {
        cfg.zero_vulnerable = true;
    } else {
        throw ConfigError("must be \"one\" or \"zero\"", "read_disturb_direction");
    }

    const std::string unit = get_string_or(doc, "", "report_unit", "us");
    if (unit == "ns") {
        cfg.unit_s = 1e-9;
    } else if (unit == "us") {
        cfg.unit_s = 1e-6;
    } else if (unit == "ms") {
        cfg.unit_s = 1e-3;
    } else if (unit == "s") {
        cfg.unit_s = 1.0;
    } else {
        throw ConfigError("must be one of \"ns\", \"us\", \"ms\", \"s\"", "report_unit");
    }
    cfg.unit_name = unit;

    cfg.seed = get_u64_or(doc, "", "seed", 0);
    if (doc.contains("oracle")) cfg.oracle = parse_oracle(doc["oracle"], "oracle");

    cfg.validate();

    // Lint, not an error: the 0->1 write is expected to fail at least two
    // orders of magnitude more often than 1->0 in a realistic configuration.
    const WriteFailurePair pair = cfg.cells.pair();
    if (pair.p_wf_1to0 > 0.0 && pair.p_wf_0to1 < 100.0 * pair.p_wf_1to0) {
        std::cerr << "warning: write failure asymmetry is weak (p_wf_0to1=" << pair.p_wf_0to1
                  << ", p_wf_1to0=" << pair.p_wf_1to0
                  << "); expected p_wf_0to1 >= 100 * p_wf_1to0\n";
    }
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_run_config(buf.str(), path);
}

std::uint64_t fnv1a_hash(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

} // namespace sttsim
