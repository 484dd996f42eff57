// lagpath: lagged source-impact pathway discovery from ensemble time-series.
//
// Subcommands: synth | fit | prune | pipeline | export.
// Exit codes: 0 ok, 2 config error, 3 ingestion error, 4 strict-gate abort.

#include <lagpath/csv_io.hpp>
#include <lagpath/pipeline.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct Cli {
    std::string config;
    std::uint64_t seed = 0;
    std::string out_dir;
    int workers = 0;
    bool strict_gate = false;

    std::string in_csv;
    std::string format = "dot";
    std::string out_path;
    bool drop_self_loops = false;
    int display_cap = 0;
};

void add_common(CLI::App* sub, Cli& o) {
    sub->add_option("--config", o.config, "JSON config file");
    sub->add_option("--seed", o.seed, "master seed (overrides config)");
    sub->add_option("--out-dir", o.out_dir, "output directory (overrides config)");
    sub->add_option("--workers", o.workers, "worker threads (overrides config)");
    sub->add_flag("--strict-gate", o.strict_gate, "abort when the fit gate fails");
}

// Config file if given, else the synthetic preset; CLI flags win.
lagpath::RunConfig resolve_config(const CLI::App* sub, const Cli& o) {
    lagpath::RunConfig cfg;
    if (!o.config.empty())
        cfg = lagpath::load_config(o.config);
    else
        lagpath::apply_preset(cfg, "synthetic");
    if (sub->count("--seed")) cfg.seed = o.seed;
    if (sub->count("--out-dir")) cfg.out_dir = o.out_dir;
    if (sub->count("--workers")) cfg.workers = o.workers;
    if (o.strict_gate) cfg.strict_gate = true;
    return cfg;
}

void write_json(const ordered_json& j, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw lagpath::IngestError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

void write_text(const std::string& text, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw lagpath::IngestError("cannot write " + path.string());
    out << text;
}

ordered_json small_manifest(const lagpath::RunConfig& cfg, const char* mode,
                            std::vector<std::string> outputs) {
    return ordered_json{{"tool", "lagpath"},       {"version", "0.1.0"},
                        {"mode", mode},            {"config", lagpath::config_to_json(cfg)},
                        {"config_hash", lagpath::config_hash(cfg)},
                        {"seed", cfg.seed},        {"outputs", std::move(outputs)}};
}

int cmd_synth(const lagpath::RunConfig& cfg) {
    lagpath::SynthConfig sc = cfg.synth;
    sc.seed = cfg.seed;
    const lagpath::EnsembleSet set = lagpath::generate_synthetic(sc);
    fs::create_directories(cfg.out_dir);
    lagpath::save_ensemble_csv(set, (fs::path(cfg.out_dir) / "ensemble.csv").string());
    write_json(small_manifest(cfg, "synth", {"ensemble.csv", "manifest.json"}),
               fs::path(cfg.out_dir) / "manifest.json");
    return 0;
}

int cmd_fit(const lagpath::RunConfig& cfg) {
    cfg.validate();
    const lagpath::LoadedData data = lagpath::acquire_data(cfg);
    const lagpath::EnsembleSet processed = lagpath::preprocess_data(cfg, data);
    const lagpath::FitStage fit = lagpath::fit_stage(cfg, processed);

    fs::create_directories(cfg.out_dir);
    lagpath::save_edge_csv(fit.unpruned,
                           (fs::path(cfg.out_dir) / "edges_unpruned.csv").string());
    ordered_json manifest = lagpath::fit_stage_manifest(cfg, processed, fit);
    manifest["outputs"] = {"edges_unpruned.csv", "manifest.json"};
    write_json(manifest, fs::path(cfg.out_dir) / "manifest.json");

    if (!fit.gate_passed) {
        std::string msg = "fit gate violated for:";
        for (const auto& t : fit.gate_violations) msg += " " + t;
        if (cfg.strict_gate) throw lagpath::GateError(msg);
        std::cerr << "warning: " << msg << "\n";
    }
    return 0;
}

int cmd_pipeline(const lagpath::RunConfig& cfg) {
    const lagpath::PipelineResult result = lagpath::run_pipeline(cfg);
    lagpath::write_pipeline_outputs(result, cfg);
    if (!result.fit.gate_passed) {
        std::cerr << "warning: fit gate violated for:";
        for (const auto& t : result.fit.gate_violations) std::cerr << " " << t;
        std::cerr << "\n";
    }
    for (const auto& t : result.refit.null_pathways)
        std::cerr << "note: null pathway for target " << t << "\n";
    return 0;
}

int cmd_prune(lagpath::RunConfig cfg, const std::string& in_csv) {
    lagpath::EdgeTable table = lagpath::load_edge_csv(in_csv, cfg.ensemble_count);
    if (table.lags.empty()) table.lags = cfg.lags;
    const lagpath::EdgeTable pruned = lagpath::prune(table, cfg.prune_params);

    fs::create_directories(cfg.out_dir);
    const auto out = [&](const char* name) { return fs::path(cfg.out_dir) / name; };

    lagpath::EdgeTable emitted = pruned;
    lagpath::RefitResult refit;
    const bool has_source = cfg.use_synth || cfg.has_input;
    if (has_source) {
        cfg.validate();
        const lagpath::LoadedData data = lagpath::acquire_data(cfg);
        const lagpath::EnsembleSet processed = lagpath::preprocess_data(cfg, data);
        refit = lagpath::refit_and_score(processed, lagpath::LagSpec{cfg.lags}, pruned,
                                         cfg.forest, cfg.seed);
        emitted = refit.edges;
    }

    lagpath::save_edge_csv(emitted, out("edges_pruned.csv").string());
    lagpath::PathwayGraph graph = lagpath::build_graph(emitted);
    graph.meta.delta = cfg.prune_params.delta;
    graph.meta.top_k = cfg.prune_params.top_k;
    graph.meta.rule_order = cfg.prune_params.rule_order;
    write_text(lagpath::to_dot(graph), out("graph.dot"));
    write_json(lagpath::to_graph_json(graph), out("graph.json"));

    ordered_json manifest = small_manifest(
        cfg, "prune", {"edges_pruned.csv", "graph.dot", "graph.json", "manifest.json"});
    manifest["prune"] = {{"input", in_csv},
                         {"R", pruned.R},
                         {"delta", cfg.prune_params.delta},
                         {"top_k", cfg.prune_params.top_k},
                         {"rule_order", lagpath::to_string(cfg.prune_params.rule_order)},
                         {"edges_in", static_cast<int>(table.records.size())},
                         {"edges_out", static_cast<int>(pruned.records.size())},
                         {"refit", has_source},
                         {"null_pathways", refit.null_pathways}};
    write_json(manifest, out("manifest.json"));
    return 0;
}

int cmd_export(const Cli& o) {
    const lagpath::EdgeTable table = lagpath::load_edge_csv(o.in_csv);
    const std::string out_path =
        o.out_path.empty() ? ("graph." + o.format) : o.out_path;
    if (o.format == "csv") {
        lagpath::save_edge_csv(table, out_path);
    } else if (o.format == "dot" || o.format == "json") {
        const lagpath::PathwayGraph graph =
            lagpath::build_graph(table, o.drop_self_loops, o.display_cap);
        if (o.format == "dot")
            write_text(lagpath::to_dot(graph), out_path);
        else
            write_json(lagpath::to_graph_json(graph), out_path);
    } else {
        throw lagpath::ConfigError("unknown export format '" + o.format +
                                   "' (expected dot, json, or csv)");
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lagged source-impact pathway discovery from ensemble time-series"};
    app.require_subcommand(1);
    Cli o;

    CLI::App* synth = app.add_subcommand("synth", "generate the synthetic benchmark ensemble");
    add_common(synth, o);
    CLI::App* fit = app.add_subcommand("fit", "train forests and write the unpruned edge table");
    add_common(fit, o);
    CLI::App* prune = app.add_subcommand("prune", "prune an edge table; refit when data is configured");
    add_common(prune, o);
    prune->add_option("--in", o.in_csv, "input edge CSV")->required();
    CLI::App* pipeline = app.add_subcommand("pipeline", "run synth/ingest -> fit -> prune -> graph");
    add_common(pipeline, o);
    CLI::App* exp = app.add_subcommand("export", "convert an edge CSV to dot/json/csv");
    exp->add_option("--in", o.in_csv, "input edge CSV")->required();
    exp->add_option("--format", o.format, "dot | json | csv");
    exp->add_option("--out", o.out_path, "output path");
    exp->add_flag("--drop-self-loops", o.drop_self_loops, "omit self-edges");
    exp->add_option("--display-cap", o.display_cap,
                    "cap incoming edges per target (0 = unlimited)");

    try {
        app.parse(argc, argv);
        if (synth->parsed()) return cmd_synth(resolve_config(synth, o));
        if (fit->parsed()) return cmd_fit(resolve_config(fit, o));
        if (prune->parsed()) return cmd_prune(resolve_config(prune, o), o.in_csv);
        if (pipeline->parsed()) return cmd_pipeline(resolve_config(pipeline, o));
        if (exp->parsed()) return cmd_export(o);
        return 2;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const lagpath::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const lagpath::IngestError& e) {
        std::cerr << "ingestion error: " << e.what() << "\n";
        return 3;
    } catch (const lagpath::GateError& e) {
        std::cerr << "gate failure: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
