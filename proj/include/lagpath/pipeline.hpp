#pragma once

// End-to-end driver: config handling (JSON with presets and unknown-key
// rejection), data acquisition, preprocessing, per-(member, target) forest
// fits with SHAP importances, edge aggregation, pruning, refit, and artifact
// emission with a run manifest.

#include <lagpath/forest.hpp>
#include <lagpath/metrics.hpp>
#include <lagpath/pathway.hpp>
#include <lagpath/preprocess.hpp>
#include <lagpath/synth.hpp>

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lagpath {

struct RunConfig {
    std::string preset;  // "", "synthetic", or "pinatubo"
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    int workers = 1;
    bool strict_gate = false;

    std::vector<int> lags{1, 6, 11, 16, 21, 26, 31, 36, 41, 46, 51, 56, 61};
    std::vector<std::string> targets;  // empty: all features

    bool use_synth = false;
    SynthConfig synth;

    struct Input {
        std::string forced;
        std::string counterfactual;
        std::string schema = "ensemble";  // "ensemble" | "grid"
    } input;
    bool has_input = false;

    struct Preprocess {
        bool difference = false;
        bool normalize = false;
        bool has_window = false;
        Eigen::Index window_start = 1;
        Eigen::Index window_length = 750;
        std::string spatial = "none";  // "none" | "global" | "zonal"
        bool area_weighted = false;
        BandSpec bands;
    } preprocess;

    ForestConfig forest;
    PruneParams prune_params;

    Scalar gate_r2_min = 0.75;
    Scalar gate_rmse_max = 0.15;

    int ensemble_count = 0;  // only used when pruning a bare edge CSV

    void validate() const;
};

// Overlays named preset values onto cfg (synthetic: 5x750 generator, lags
// 1..5, min-max normalization only; pinatubo: difference + window 750 +
// normalize + global averaging).  Both presets run deterministic forests
// (bootstrap off).
void apply_preset(RunConfig& cfg, const std::string& name);

RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::string& path);
// Fully resolved canonical echo; hashing it identifies a run's inputs.
nlohmann::ordered_json config_to_json(const RunConfig& cfg);
std::string config_hash(const RunConfig& cfg);

struct LoadedData {
    EnsembleSet forced;
    std::optional<EnsembleSet> counterfactual;
};

LoadedData acquire_data(const RunConfig& cfg);

// difference -> window -> normalize, member-wise.
EnsembleSet preprocess_data(const RunConfig& cfg, const LoadedData& data);

struct FitStage {
    std::vector<std::string> features;
    std::vector<std::string> targets;
    std::vector<ColumnKey> columns;
    std::vector<PerTargetImportances> importances;
    std::map<std::string, std::vector<std::optional<FitReport>>> member_reports;
    std::map<std::string, std::optional<FitReport>> mean_reports;
    EdgeTable unpruned;
    bool gate_passed = true;
    std::vector<std::string> gate_violations;
};

// Per-(member, target) forests in parallel worker slots; forest seeds are
// derive_seed(master, {"forest", target, member}), so outputs do not depend
// on the worker count.
FitStage fit_stage(const RunConfig& cfg, const EnsembleSet& processed);

struct PipelineResult {
    EnsembleSet processed;
    FitStage fit;
    EdgeTable pruned;  // pre-refit aggregated weights
    RefitResult refit;
    PathwayGraph graph;  // refit weights
    nlohmann::ordered_json manifest;
};

// Manifest for a fit-only run (cmd `fit`): config echo, data shape, per-target
// fit reports, gate outcome.
nlohmann::ordered_json fit_stage_manifest(const RunConfig& cfg, const EnsembleSet& processed,
                                          const FitStage& fit);

// Runs synth/ingest -> preprocess -> fit -> prune -> refit -> graph.  In
// strict-gate mode a failing stage raises GateError after recording it.
PipelineResult run_pipeline(const RunConfig& cfg);

// Writes edges_unpruned.csv, edges_pruned.csv, graph.dot, graph.json,
// manifest.json into cfg.out_dir (created if missing).
void write_pipeline_outputs(const PipelineResult& result, const RunConfig& cfg);

}  // namespace lagpath
