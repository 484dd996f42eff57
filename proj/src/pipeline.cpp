#include <lagpath/pipeline.hpp>

#include <lagpath/csv_io.hpp>
#include <lagpath/rng.hpp>
#include <lagpath/shap.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <thread>

namespace lagpath {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find_if(allowed.begin(), allowed.end(),
                         [&](const char* k) { return it.key() == k; }) == allowed.end())
            throw ConfigError("unknown config key '" + where + it.key() + "'");
}

// Deterministic slot-based fan-out; worker count never changes results.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
            try {
                fn(i);
            } catch (...) {
                const std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const int count = std::min<int>(workers, static_cast<int>(n));
    pool.reserve(count);
    for (int w = 0; w < count; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

double ms_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

}  // namespace

void RunConfig::validate() const {
    if (workers < 1 || workers > 256) throw ConfigError("workers must be in [1, 256]");
    LagSpec{lags}.validate();
    forest.validate();
    if (prune_params.top_k < 1) throw ConfigError("prune.top_k must be >= 1");
    if (!(prune_params.delta >= 0.0)) throw ConfigError("prune.delta must be >= 0");
    if (gate_rmse_max < 0.0) throw ConfigError("gate.rmse_max must be >= 0");
    if (use_synth) synth.validate();

    if (use_synth && has_input)
        throw ConfigError("both synthetic generator and input files configured");
    if (!use_synth && !has_input)
        throw ConfigError("no data source: set input paths or choose the synthetic preset");

    if (input.schema != "ensemble" && input.schema != "grid")
        throw ConfigError("input.schema must be 'ensemble' or 'grid'");
    if (preprocess.spatial != "none" && preprocess.spatial != "global" &&
        preprocess.spatial != "zonal")
        throw ConfigError("preprocess.spatial must be 'none', 'global', or 'zonal'");
    if (has_input && input.schema == "grid" && preprocess.spatial == "none")
        throw ConfigError("grid input requires zonal or global spatial averaging");
    if (preprocess.spatial != "none" && (!has_input || input.schema != "grid"))
        throw ConfigError("spatial averaging requires grid-schema input");
    if (preprocess.spatial == "zonal") preprocess.bands.validate();

    if (preprocess.difference) {
        if (use_synth) throw ConfigError("difference requires a counterfactual input file");
        if (input.counterfactual.empty())
            throw ConfigError("difference requires input.counterfactual");
    } else if (!input.counterfactual.empty()) {
        throw ConfigError("input.counterfactual provided but preprocess.difference is off");
    }
    if (preprocess.has_window &&
        (preprocess.window_start < 1 || preprocess.window_length < 2))
        throw ConfigError("preprocess.window must have start >= 1 and length >= 2");
}

void apply_preset(RunConfig& cfg, const std::string& name) {
    cfg.preset = name;
    if (name == "synthetic") {
        cfg.use_synth = true;
        cfg.has_input = false;
        cfg.synth = SynthConfig{};
        cfg.lags = {1, 2, 3, 4, 5};
        cfg.preprocess = RunConfig::Preprocess{};
        cfg.preprocess.normalize = true;
        cfg.forest = ForestConfig{};
        cfg.forest.bootstrap = false;
        cfg.prune_params = PruneParams{};
    } else if (name == "pinatubo") {
        cfg.use_synth = false;
        cfg.lags = {1, 6, 11, 16, 21, 26, 31, 36, 41, 46, 51, 56, 61};
        cfg.preprocess = RunConfig::Preprocess{};
        cfg.preprocess.difference = true;
        cfg.preprocess.normalize = true;
        cfg.preprocess.has_window = true;
        cfg.preprocess.window_start = 1;
        cfg.preprocess.window_length = 750;
        cfg.preprocess.spatial = "global";
        cfg.forest = ForestConfig{};
        cfg.forest.bootstrap = false;
        cfg.prune_params = PruneParams{};
    } else {
        throw ConfigError("unknown preset '" + name + "' (expected synthetic or pinatubo)");
    }
}

RunConfig config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config root must be a JSON object");
    check_keys(j, "", {"preset", "seed", "out_dir", "workers", "strict_gate", "lags",
                       "targets", "synth", "input", "preprocess", "forest", "prune", "gate",
                       "ensemble_count"});
    RunConfig cfg;
    try {
        if (j.contains("preset")) {
            const auto preset = j.at("preset").get<std::string>();
            if (!preset.empty()) apply_preset(cfg, preset);  // "" = manifest echo, no preset
        }
        if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
        if (j.contains("workers")) cfg.workers = j.at("workers").get<int>();
        if (j.contains("strict_gate")) cfg.strict_gate = j.at("strict_gate").get<bool>();
        if (j.contains("lags")) cfg.lags = j.at("lags").get<std::vector<int>>();
        if (j.contains("targets"))
            cfg.targets = j.at("targets").get<std::vector<std::string>>();
        if (j.contains("ensemble_count")) cfg.ensemble_count = j.at("ensemble_count").get<int>();

        if (j.contains("synth")) {
            const json& s = j.at("synth");
            check_keys(s, "synth.", {"n_ensembles", "length", "noise_half_width"});
            cfg.use_synth = true;
            if (s.contains("n_ensembles")) cfg.synth.n_ensembles = s.at("n_ensembles").get<int>();
            if (s.contains("length")) cfg.synth.length = s.at("length").get<Eigen::Index>();
            if (s.contains("noise_half_width"))
                cfg.synth.noise_half_width = s.at("noise_half_width").get<double>();
        }
        if (j.contains("input")) {
            const json& in = j.at("input");
            check_keys(in, "input.", {"forced", "counterfactual", "schema"});
            cfg.has_input = true;
            cfg.use_synth = false;
            if (in.contains("forced")) cfg.input.forced = in.at("forced").get<std::string>();
            if (in.contains("counterfactual"))
                cfg.input.counterfactual = in.at("counterfactual").get<std::string>();
            if (in.contains("schema")) cfg.input.schema = in.at("schema").get<std::string>();
            if (cfg.input.forced.empty()) throw ConfigError("input.forced path is required");
        }
        if (j.contains("preprocess")) {
            const json& p = j.at("preprocess");
            check_keys(p, "preprocess.",
                       {"difference", "normalize", "window", "spatial", "area_weighted",
                        "bands"});
            if (p.contains("difference"))
                cfg.preprocess.difference = p.at("difference").get<bool>();
            if (p.contains("normalize")) cfg.preprocess.normalize = p.at("normalize").get<bool>();
            if (p.contains("window") && !p.at("window").is_null()) {
                const json& w = p.at("window");
                check_keys(w, "preprocess.window.", {"start", "length"});
                cfg.preprocess.has_window = true;
                if (w.contains("start"))
                    cfg.preprocess.window_start = w.at("start").get<Eigen::Index>();
                if (w.contains("length"))
                    cfg.preprocess.window_length = w.at("length").get<Eigen::Index>();
            }
            if (p.contains("spatial")) cfg.preprocess.spatial = p.at("spatial").get<std::string>();
            if (p.contains("area_weighted"))
                cfg.preprocess.area_weighted = p.at("area_weighted").get<bool>();
            if (p.contains("bands")) {
                cfg.preprocess.bands.bands.clear();
                for (const json& b : p.at("bands")) {
                    check_keys(b, "preprocess.bands[].", {"name", "lat_min", "lat_max"});
                    cfg.preprocess.bands.bands.push_back({b.at("name").get<std::string>(),
                                                          b.at("lat_min").get<double>(),
                                                          b.at("lat_max").get<double>()});
                }
            }
        }
        if (j.contains("forest")) {
            const json& f = j.at("forest");
            check_keys(f, "forest.",
                       {"n_trees", "max_depth", "min_samples_split", "min_samples_leaf",
                        "bootstrap", "features_per_split"});
            if (f.contains("n_trees")) cfg.forest.n_trees = f.at("n_trees").get<int>();
            if (f.contains("max_depth")) cfg.forest.max_depth = f.at("max_depth").get<int>();
            if (f.contains("min_samples_split"))
                cfg.forest.min_samples_split = f.at("min_samples_split").get<int>();
            if (f.contains("min_samples_leaf"))
                cfg.forest.min_samples_leaf = f.at("min_samples_leaf").get<int>();
            if (f.contains("bootstrap")) cfg.forest.bootstrap = f.at("bootstrap").get<bool>();
            if (f.contains("features_per_split"))
                cfg.forest.features_per_split = f.at("features_per_split").get<double>();
        }
        if (j.contains("prune")) {
            const json& p = j.at("prune");
            check_keys(p, "prune.", {"delta", "top_k", "rule_order"});
            if (p.contains("delta")) cfg.prune_params.delta = p.at("delta").get<double>();
            if (p.contains("top_k")) cfg.prune_params.top_k = p.at("top_k").get<int>();
            if (p.contains("rule_order"))
                cfg.prune_params.rule_order =
                    rule_order_from_string(p.at("rule_order").get<std::string>());
        }
        if (j.contains("gate")) {
            const json& g = j.at("gate");
            check_keys(g, "gate.", {"r2_min", "rmse_max"});
            if (g.contains("r2_min")) cfg.gate_r2_min = g.at("r2_min").get<double>();
            if (g.contains("rmse_max")) cfg.gate_rmse_max = g.at("rmse_max").get<double>();
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return config_from_json(j);
}

ordered_json config_to_json(const RunConfig& cfg) {
    ordered_json pre{{"difference", cfg.preprocess.difference},
                     {"normalize", cfg.preprocess.normalize},
                     {"spatial", cfg.preprocess.spatial},
                     {"area_weighted", cfg.preprocess.area_weighted}};
    if (cfg.preprocess.has_window)
        pre["window"] = {{"start", cfg.preprocess.window_start},
                         {"length", cfg.preprocess.window_length}};
    else
        pre["window"] = nullptr;
    if (!cfg.preprocess.bands.bands.empty()) {
        ordered_json bands = ordered_json::array();
        for (const auto& b : cfg.preprocess.bands.bands)
            bands.push_back(
                {{"name", b.name}, {"lat_min", b.lat_min}, {"lat_max", b.lat_max}});
        pre["bands"] = std::move(bands);
    }

    ordered_json out{
        {"preset", cfg.preset},
        {"seed", cfg.seed},
        {"out_dir", cfg.out_dir},
        {"workers", cfg.workers},
        {"strict_gate", cfg.strict_gate},
        {"lags", cfg.lags},
        {"targets", cfg.targets},
        {"preprocess", std::move(pre)},
        {"forest",
         {{"n_trees", cfg.forest.n_trees},
          {"max_depth", cfg.forest.max_depth},
          {"min_samples_split", cfg.forest.min_samples_split},
          {"min_samples_leaf", cfg.forest.min_samples_leaf},
          {"bootstrap", cfg.forest.bootstrap},
          {"features_per_split", cfg.forest.features_per_split}}},
        {"prune",
         {{"delta", cfg.prune_params.delta},
          {"top_k", cfg.prune_params.top_k},
          {"rule_order", to_string(cfg.prune_params.rule_order)}}},
        {"gate", {{"r2_min", cfg.gate_r2_min}, {"rmse_max", cfg.gate_rmse_max}}},
    };
    if (cfg.use_synth)
        out["synth"] = {{"n_ensembles", cfg.synth.n_ensembles},
                        {"length", cfg.synth.length},
                        {"noise_half_width", cfg.synth.noise_half_width}};
    if (cfg.has_input)
        out["input"] = {{"forced", cfg.input.forced},
                        {"counterfactual", cfg.input.counterfactual},
                        {"schema", cfg.input.schema}};
    if (cfg.ensemble_count > 0) out["ensemble_count"] = cfg.ensemble_count;
    return out;
}

std::string config_hash(const RunConfig& cfg) {
    const std::string dump = config_to_json(cfg).dump();
    char buf[19];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(rng::hash_str(dump)));
    return buf;
}

namespace {

EnsembleSet reduce_spatial(const RunConfig& cfg, const std::vector<GridCollection>& grids) {
    EnsembleSet set;
    for (const auto& g : grids)
        set.members.push_back(cfg.preprocess.spatial == "global"
                                  ? global_average(g, cfg.preprocess.area_weighted)
                                  : zonal_average(g, cfg.preprocess.bands,
                                                  cfg.preprocess.area_weighted));
    set.validate();
    return set;
}

EnsembleSet load_input(const RunConfig& cfg, const std::string& path) {
    if (cfg.input.schema == "grid") return reduce_spatial(cfg, load_grid_csv(path));
    return load_ensemble_csv(path);
}

}  // namespace

LoadedData acquire_data(const RunConfig& cfg) {
    LoadedData data;
    if (cfg.use_synth) {
        SynthConfig s = cfg.synth;
        s.seed = cfg.seed;
        data.forced = generate_synthetic(s);
        return data;
    }
    data.forced = load_input(cfg, cfg.input.forced);
    if (!cfg.input.counterfactual.empty())
        data.counterfactual = load_input(cfg, cfg.input.counterfactual);
    return data;
}

EnsembleSet preprocess_data(const RunConfig& cfg, const LoadedData& data) {
    EnsembleSet cur = data.forced;
    if (cfg.preprocess.difference) {
        if (!data.counterfactual)
            throw ConfigError("difference requires a counterfactual input");
        cur = counterfactual_difference(cur, *data.counterfactual);
    }
    for (auto& member : cur.members) {
        if (cfg.preprocess.has_window)
            member = window(member, cfg.preprocess.window_start, cfg.preprocess.window_length);
        if (cfg.preprocess.normalize) member = normalize_minmax(member);
    }
    cur.validate();
    return cur;
}

FitStage fit_stage(const RunConfig& cfg, const EnsembleSet& processed) {
    processed.validate();
    const int R = static_cast<int>(processed.size());
    const LagSpec lags{cfg.lags};

    FitStage stage;
    stage.features = processed.members.front().names();
    stage.targets = cfg.targets.empty() ? stage.features : cfg.targets;
    for (const auto& t : stage.targets)
        if (!processed.members.front().find(t))
            throw ConfigError("target feature not found: " + t);

    stage.columns = build_design(processed.members.front(), lags, stage.targets.front()).columns;

    struct Slot {
        Vec weights;
        std::optional<FitReport> report;
    };
    const std::size_t n_targets = stage.targets.size();
    std::vector<Slot> slots(static_cast<std::size_t>(R) * n_targets);

    parallel_for(slots.size(), cfg.workers, [&](std::size_t i) {
        const int r = static_cast<int>(i / n_targets);
        const std::string& target = stage.targets[i % n_targets];
        const DesignMatrix design = build_design(processed.members[r], lags, target);
        ForestConfig fc = cfg.forest;
        fc.seed = rng::derive_seed(cfg.seed, {rng::hash_str("forest"), rng::hash_str(target),
                                              static_cast<std::uint64_t>(r)});
        const RegressionForest forest = fit_forest(design, fc);
        slots[i].weights = aggregate_importance(forest, design);
        try {
            slots[i].report =
                fit_report(design.y, forest.predict_batch(design.X), design.cols());
        } catch (const std::domain_error&) {
            slots[i].report = std::nullopt;  // constant target: no meaningful fit
        }
    });

    for (std::size_t ti = 0; ti < n_targets; ++ti) {
        const std::string& target = stage.targets[ti];
        PerTargetImportances pt{target, stage.columns, {}};
        auto& reports = stage.member_reports[target];
        for (int r = 0; r < R; ++r) {
            const Slot& slot = slots[static_cast<std::size_t>(r) * n_targets + ti];
            pt.member_weights.push_back(slot.weights);
            reports.push_back(slot.report);
        }
        const bool complete =
            std::all_of(reports.begin(), reports.end(), [](const auto& r) { return bool(r); });
        if (complete) {
            FitReport mean;
            mean.n = reports.front()->n;
            mean.p = reports.front()->p;
            for (const auto& rep : reports) {
                mean.r2 += rep->r2;
                mean.r2_adj += rep->r2_adj;
                mean.rmse += rep->rmse;
            }
            mean.r2 /= R;
            mean.r2_adj /= R;
            mean.rmse /= R;
            stage.mean_reports[target] = mean;
        } else {
            stage.mean_reports[target] = std::nullopt;
        }
        stage.importances.push_back(std::move(pt));
    }

    for (const auto& target : stage.targets) {
        const auto& mean = stage.mean_reports.at(target);
        if (!mean || !passes_fit_gate(*mean, cfg.gate_r2_min, cfg.gate_rmse_max))
            stage.gate_violations.push_back(target);
    }
    stage.gate_passed = stage.gate_violations.empty();
    stage.unpruned = aggregate_edges(stage.importances, R, cfg.lags);
    return stage;
}

namespace {

ordered_json report_json(const FitReport& rep) {
    return {{"r2", rep.r2},
            {"r2_adj", rep.r2_adj},
            {"rmse", rep.rmse},
            {"n", rep.n},
            {"p", rep.p}};
}

ordered_json optional_report_json(const std::optional<FitReport>& rep) {
    if (!rep) return nullptr;
    return report_json(*rep);
}

}  // namespace

ordered_json fit_stage_manifest(const RunConfig& cfg, const EnsembleSet& processed,
                                const FitStage& fit) {
    ordered_json fit_reports;
    for (const auto& target : fit.targets) {
        ordered_json members = ordered_json::array();
        for (const auto& rep : fit.member_reports.at(target))
            members.push_back(optional_report_json(rep));
        const auto& mean = fit.mean_reports.at(target);
        fit_reports[target] = {
            {"members", std::move(members)},
            {"mean", optional_report_json(mean)},
            {"gate_passed",
             mean && passes_fit_gate(*mean, cfg.gate_r2_min, cfg.gate_rmse_max)}};
    }
    return ordered_json{
        {"tool", "lagpath"},
        {"version", "0.1.0"},
        {"mode", "fit"},
        {"config", config_to_json(cfg)},
        {"config_hash", config_hash(cfg)},
        {"seed", cfg.seed},
        {"data",
         {{"R", static_cast<int>(processed.size())},
          {"K", processed.members.front().length()},
          {"features", fit.features},
          {"design_columns", static_cast<int>(fit.columns.size())}}},
        {"gate",
         {{"mode", cfg.strict_gate ? "strict" : "advisory"},
          {"r2_min", cfg.gate_r2_min},
          {"rmse_max", cfg.gate_rmse_max},
          {"fit_passed", fit.gate_passed},
          {"fit_violations", fit.gate_violations}}},
        {"fit_reports", std::move(fit_reports)},
    };
}

PipelineResult run_pipeline(const RunConfig& cfg) {
    cfg.validate();
    PipelineResult result;
    ordered_json timings;

    auto t0 = std::chrono::steady_clock::now();
    const LoadedData data = acquire_data(cfg);
    result.processed = preprocess_data(cfg, data);
    timings["data"] = ms_since(t0);

    t0 = std::chrono::steady_clock::now();
    result.fit = fit_stage(cfg, result.processed);
    timings["fit"] = ms_since(t0);

    if (cfg.strict_gate && !result.fit.gate_passed) {
        std::string msg = "fit gate violated for:";
        for (const auto& t : result.fit.gate_violations) msg += " " + t;
        throw GateError(msg);
    }

    t0 = std::chrono::steady_clock::now();
    result.pruned = prune(result.fit.unpruned, cfg.prune_params);
    timings["prune"] = ms_since(t0);

    t0 = std::chrono::steady_clock::now();
    result.refit = refit_and_score(result.processed, LagSpec{cfg.lags}, result.pruned,
                                   cfg.forest, cfg.seed, result.fit.targets);
    timings["refit"] = ms_since(t0);

    result.graph = build_graph(result.refit.edges, result.fit.features);
    result.graph.meta.delta = cfg.prune_params.delta;
    result.graph.meta.top_k = cfg.prune_params.top_k;
    result.graph.meta.rule_order = cfg.prune_params.rule_order;

    std::vector<std::string> refit_violations;
    for (const auto& tr : result.refit.targets) {
        if (tr.columns.empty()) continue;  // null pathway: reported, not a failure
        if (!tr.mean_report ||
            !passes_fit_gate(*tr.mean_report, cfg.gate_r2_min, cfg.gate_rmse_max))
            refit_violations.push_back(tr.target);
    }

    ordered_json fit_reports;
    for (const auto& target : result.fit.targets) {
        ordered_json members = ordered_json::array();
        for (const auto& rep : result.fit.member_reports.at(target))
            members.push_back(optional_report_json(rep));
        const auto& mean = result.fit.mean_reports.at(target);
        fit_reports[target] = {
            {"members", std::move(members)},
            {"mean", optional_report_json(mean)},
            {"gate_passed",
             mean && passes_fit_gate(*mean, cfg.gate_r2_min, cfg.gate_rmse_max)}};
    }

    ordered_json refit_reports;
    for (const auto& tr : result.refit.targets) {
        ordered_json members = ordered_json::array();
        for (const auto& rep : tr.member_reports) members.push_back(report_json(rep));
        refit_reports[tr.target] = {{"columns", static_cast<int>(tr.columns.size())},
                                    {"members", std::move(members)},
                                    {"mean", optional_report_json(tr.mean_report)}};
    }

    // Survivors carry both weight sets: aggregated pre-refit and refit.
    ordered_json pruned_edges = ordered_json::array();
    for (const auto& pre : result.pruned.records) {
        ordered_json entry{{"source", pre.source},
                           {"target", pre.target},
                           {"lag", pre.lag},
                           {"prerefit",
                            {{"mean", pre.mean_weight},
                             {"sigma", pre.weight_sigma},
                             {"ensembles", pre.ensembles_with_edge}}}};
        for (const auto& post : result.refit.edges.records)
            if (post.source == pre.source && post.target == pre.target && post.lag == pre.lag)
                entry["refit"] = {{"mean", post.mean_weight},
                                  {"sigma", post.weight_sigma},
                                  {"ensembles", post.ensembles_with_edge}};
        pruned_edges.push_back(std::move(entry));
    }

    result.manifest = ordered_json{
        {"tool", "lagpath"},
        {"version", "0.1.0"},
        {"versions",
         {{"compiler", __VERSION__},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                        std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)}}},
        {"config", config_to_json(cfg)},
        {"config_hash", config_hash(cfg)},
        {"seed", cfg.seed},
        {"data",
         {{"R", static_cast<int>(result.processed.size())},
          {"K", result.processed.members.front().length()},
          {"features", result.fit.features},
          {"design_rows",
           result.processed.members.front().length() - LagSpec{cfg.lags}.max_lag()},
          {"design_columns", static_cast<int>(result.fit.columns.size())}}},
        {"timings_ms", std::move(timings)},
        {"gate",
         {{"mode", cfg.strict_gate ? "strict" : "advisory"},
          {"r2_min", cfg.gate_r2_min},
          {"rmse_max", cfg.gate_rmse_max},
          {"fit_passed", result.fit.gate_passed},
          {"fit_violations", result.fit.gate_violations},
          {"refit_violations", refit_violations}}},
        {"fit_reports", std::move(fit_reports)},
        {"prune",
         {{"delta", cfg.prune_params.delta},
          {"top_k", cfg.prune_params.top_k},
          {"rule_order", to_string(cfg.prune_params.rule_order)},
          {"edges_in", static_cast<int>(result.fit.unpruned.records.size())},
          {"edges_out", static_cast<int>(result.pruned.records.size())}}},
        {"refit",
         {{"null_pathways", result.refit.null_pathways},
          {"reports", std::move(refit_reports)}}},
        {"pruned_edges", std::move(pruned_edges)},
    };

    if (cfg.strict_gate && !refit_violations.empty()) {
        std::string msg = "refit gate violated for:";
        for (const auto& t : refit_violations) msg += " " + t;
        throw GateError(msg);
    }
    return result;
}

void write_pipeline_outputs(const PipelineResult& result, const RunConfig& cfg) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);
    const auto path = [&](const char* name) { return (fs::path(cfg.out_dir) / name).string(); };

    save_edge_csv(result.fit.unpruned, path("edges_unpruned.csv"));
    save_edge_csv(result.refit.edges, path("edges_pruned.csv"));

    std::ofstream dot(path("graph.dot"));
    if (!dot) throw IngestError("cannot write " + path("graph.dot"));
    dot << to_dot(result.graph);

    std::ofstream gj(path("graph.json"));
    if (!gj) throw IngestError("cannot write " + path("graph.json"));
    gj << to_graph_json(result.graph).dump(2) << '\n';

    ordered_json manifest = result.manifest;
    manifest["outputs"] = {"edges_unpruned.csv", "edges_pruned.csv", "graph.dot",
                           "graph.json", "manifest.json"};
    std::ofstream mf(path("manifest.json"));
    if (!mf) throw IngestError("cannot write " + path("manifest.json"));
    mf << manifest.dump(2) << '\n';
}

}  // namespace lagpath
