#pragma once

// Ensemble edge-table aggregation, the four pruning criteria, refit +
// re-score on surviving columns, and weighted directed graph emission
// (CSV / DOT / JSON).

#include <lagpath/forest.hpp>
#include <lagpath/metrics.hpp>

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lagpath {

struct EdgeRecord {
    std::string source;
    std::string target;
    int lag = 0;
    Scalar mean_weight = 0.0;
    Scalar weight_sigma = 0.0;
    int ensembles_with_edge = 0;
};

struct EdgeTable {
    std::vector<EdgeRecord> records;
    int R = 0;              // ensemble member count behind the statistics
    std::vector<int> lags;  // lag set the table was built from
};

// Importances for one target, aligned on `columns`, one weight vector per
// ensemble member.
struct PerTargetImportances {
    std::string target;
    std::vector<ColumnKey> columns;
    std::vector<Vec> member_weights;
};

// mean over members / population sigma / count of strictly positive weights;
// result sorted by descending mean weight.
EdgeTable aggregate_edges(const std::vector<PerTargetImportances>& per_target, int R,
                          const std::vector<int>& lags);

enum class RuleOrder {
    best_lag_first,  // (a) best lag per pair, (b) delta, (c) sigma, (d) majority, (e) top-k
    filters_first,   // (b)(c)(d), then (a), then (e)
};

std::string to_string(RuleOrder order);
RuleOrder rule_order_from_string(const std::string& name);

struct PruneParams {
    Scalar delta = 1e-4;
    int top_k = 4;
    RuleOrder rule_order = RuleOrder::best_lag_first;
};

// Pure record filter: output is a subset of input (no weight mutation).
EdgeTable prune(const EdgeTable& table, const PruneParams& params = {});

struct TargetRefit {
    std::string target;
    std::vector<ColumnKey> columns;        // surviving incoming edges
    std::vector<FitReport> member_reports;
    std::optional<FitReport> mean_report;  // nullopt: null pathway or degenerate target
};

struct RefitResult {
    std::vector<TargetRefit> targets;
    EdgeTable edges;  // pruned keys with refit weight statistics
    std::vector<std::string> null_pathways;
};

// Retrains per (member, target) on the surviving columns only, re-scores
// (p = surviving column count), and recomputes the edge statistics.  Rows
// stay aligned with the full lag set so fits are comparable pre/post prune.
RefitResult refit_and_score(const EnsembleSet& data, const LagSpec& lags,
                            const EdgeTable& pruned, const ForestConfig& config,
                            std::uint64_t master_seed,
                            const std::vector<std::string>& targets = {});

struct GraphMeta {
    int R = 0;
    std::vector<int> lags;
    Scalar delta = 0.0;
    int top_k = 0;
    RuleOrder rule_order = RuleOrder::best_lag_first;
};

struct PathwayGraph {
    std::vector<std::string> nodes;
    std::vector<EdgeRecord> edges;
    GraphMeta meta;
};

// Keeps records with weight > 0; optionally drops self-loops and caps
// incoming edges per target (display_cap <= 0 means uncapped).
PathwayGraph build_graph(const EdgeTable& table, const std::vector<std::string>& nodes,
                         bool drop_self_loops = false, int display_cap = 0);
PathwayGraph build_graph(const EdgeTable& table, bool drop_self_loops = false,
                         int display_cap = 0);

// DOT digraph with lag labels and a log-scale blue (high) -> yellow (low)
// edge color ramp.
std::string to_dot(const PathwayGraph& graph);
nlohmann::ordered_json to_graph_json(const PathwayGraph& graph);

// Header `source,target,lag,shap_weight,weight_sigma,ensembles_with_edge`;
// 17-significant-digit weights give an exact round trip.
void save_edge_csv(const EdgeTable& table, const std::string& path);

// R is not stored in the CSV; pass it (0 infers max(ensembles_with_edge)).
EdgeTable load_edge_csv(const std::string& path, int R = 0);

}  // namespace lagpath
