#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "sttsim/config.hpp"
#include "sttsim/errors.hpp"
#include "sttsim/runner.hpp"
#include "sttsim/synth.hpp"
#include "sttsim/trace.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitConfig = 2;
constexpr int kExitTrace = 3;
constexpr int kExitValidation = 4;

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write error on " + path.string());
}

struct Args {
    std::string config_path;
    std::string trace_path;
    std::string out;
    std::string format = "json";
    std::optional<std::uint64_t> seed;
    bool per_read = false;

    std::string sweep_param;
    std::vector<double> sweep_values;
};

sttsim::RunConfig load_config(const Args& a) {
    sttsim::RunConfig cfg = sttsim::load_run_config(a.config_path);
    if (!a.trace_path.empty()) {
        cfg.trace.file = a.trace_path;
        cfg.trace.synthetic.reset();
    }
    return cfg;
}

sttsim::RunOptions run_options(const Args& a) {
    sttsim::RunOptions opts;
    opts.seed_override = a.seed;
    opts.collect_read_events = a.per_read;
    return opts;
}

void emit_csv_tables(const std::map<std::string, std::string>& tables, const std::string& out) {
    if (out.empty()) {
        for (const auto& [name, csv] : tables) std::cout << "# table: " << name << "\n" << csv;
        return;
    }
    for (const auto& [name, csv] : tables) write_file(fs::path(out) / (name + ".csv"), csv);
}

int cmd_run(const Args& a) {
    const sttsim::RunConfig cfg = load_config(a);
    const sttsim::RunArtifacts art = sttsim::execute_run(cfg, run_options(a));
    if (a.format == "csv") {
        emit_csv_tables(sttsim::report_csv_tables(art), a.out);
    } else {
        const std::string doc = sttsim::report_json(art);
        if (a.out.empty()) {
            std::cout << doc;
        } else {
            write_file(fs::path(a.out) / "report.json", doc);
        }
    }
    return kExitOk;
}

int cmd_sweep(const Args& a) {
    const sttsim::RunConfig cfg = load_config(a);
    const sttsim::SweepResult sweep =
        sttsim::execute_sweep(cfg, a.sweep_param, a.sweep_values, run_options(a));
    if (a.format == "csv") {
        const std::string csv = sttsim::sweep_csv(sweep);
        if (a.out.empty()) {
            std::cout << csv;
        } else {
            write_file(fs::path(a.out) / "sweep.csv", csv);
        }
    } else {
        const std::string doc = sttsim::sweep_json(sweep);
        if (a.out.empty()) {
            std::cout << doc;
        } else {
            write_file(fs::path(a.out) / "sweep.json", doc);
        }
    }
    return kExitOk;
}

int cmd_validate(const Args& a) {
    const sttsim::RunConfig cfg = load_config(a);
    sttsim::RunOptions opts = run_options(a);
    const sttsim::ValidationResult result = sttsim::execute_validate(cfg, opts);

    std::cout << sttsim::validation_table(result);
    if (!a.out.empty()) {
        opts.collect_intervals = true;
        const sttsim::RunArtifacts art = sttsim::execute_run(cfg, opts);
        write_file(fs::path(a.out) / "validation.json",
                   sttsim::validation_json(result, art));
    }
    return result.all_pass ? kExitOk : kExitValidation;
}

int cmd_gen_trace(const Args& a) {
    const sttsim::RunConfig cfg = load_config(a);
    if (!cfg.trace.synthetic)
        throw sttsim::ConfigError("gen-trace needs a synthetic trace spec", "trace.synthetic");
    if (a.out.empty())
        throw sttsim::ConfigError("gen-trace needs --out <file> for the generated trace");
    const std::uint64_t seed = a.seed.value_or(cfg.seed);
    const auto records = sttsim::generate_trace(*cfg.trace.synthetic,
                                                cfg.geometry.block_bytes(), seed);
    sttsim::save_trace(a.out, records);
    std::cerr << "wrote " << records.size() << " records to " << a.out << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"sttsim: trace-driven reliability simulator for STT-MRAM caches"};
    app.require_subcommand(1);

    Args args;
    auto add_common = [&](CLI::App* cmd, bool need_config) {
        auto* c = cmd->add_option("--config", args.config_path, "run configuration (JSON)");
        if (need_config) c->required();
        cmd->add_option("--trace", args.trace_path,
                        "trace file; overrides the config's trace source");
        cmd->add_option("--seed", args.seed, "workload seed; overrides the config's seed");
        cmd->add_option("--out", args.out, "output directory (gen-trace: output file)");
        cmd->add_option("--format", args.format, "output format")
            ->check(CLI::IsMember({"json", "csv"}));
    };

    CLI::App* run = app.add_subcommand("run", "simulate one configuration and report");
    add_common(run, true);
    run->add_flag("--per-read", args.per_read,
                  "collect the per-read error stream (csv output: per_read table)");

    CLI::App* sweep = app.add_subcommand("sweep", "run once per value of a config parameter");
    add_common(sweep, true);
    sweep->add_option("--param", args.sweep_param, "dotted config path, e.g. cell.delta")
        ->required();
    sweep->add_option("--values", args.sweep_values, "parameter values")
        ->required()
        ->delimiter(',');

    CLI::App* validate =
        app.add_subcommand("validate", "cross-check the analytic path against the Monte Carlo oracle");
    add_common(validate, true);

    CLI::App* gen = app.add_subcommand("gen-trace", "materialize the synthetic workload as a trace file");
    add_common(gen, true);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(args);
        if (sweep->parsed()) return cmd_sweep(args);
        if (validate->parsed()) return cmd_validate(args);
        if (gen->parsed()) return cmd_gen_trace(args);
        return kExitInternal;
    } catch (const sttsim::TraceError& e) {
        std::cerr << "trace error: " << e.what() << "\n";
        return kExitTrace;
    } catch (const sttsim::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const sttsim::InvalidParameter& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInternal;
    }
}
