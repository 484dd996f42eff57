#include <lagpath/pathway.hpp>

#include <lagpath/csv_io.hpp>
#include <lagpath/rng.hpp>
#include <lagpath/shap.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

namespace lagpath {

namespace {

// Emission order: descending weight, then (source, target, lag) for stability.
void sort_edges(std::vector<EdgeRecord>& records) {
    std::sort(records.begin(), records.end(), [](const EdgeRecord& a, const EdgeRecord& b) {
        return std::tie(b.mean_weight, a.source, a.target, a.lag) <
               std::tie(a.mean_weight, b.source, b.target, b.lag);
    });
}

}  // namespace

std::string to_string(RuleOrder order) {
    return order == RuleOrder::best_lag_first ? "best_lag_first" : "filters_first";
}

RuleOrder rule_order_from_string(const std::string& name) {
    if (name == "best_lag_first") return RuleOrder::best_lag_first;
    if (name == "filters_first") return RuleOrder::filters_first;
    throw ConfigError("unknown rule_order '" + name +
                      "' (expected best_lag_first or filters_first)");
}

EdgeTable aggregate_edges(const std::vector<PerTargetImportances>& per_target, int R,
                          const std::vector<int>& lags) {
    EdgeTable table;
    table.R = R;
    table.lags = lags;
    for (const auto& pt : per_target) {
        if (static_cast<int>(pt.member_weights.size()) != R)
            throw ConfigError("aggregate_edges: expected " + std::to_string(R) +
                              " members for target " + pt.target);
        const auto n_cols = static_cast<Eigen::Index>(pt.columns.size());
        for (const auto& w : pt.member_weights)
            if (w.size() != n_cols)
                throw ConfigError("aggregate_edges: inconsistent column keys for target " +
                                  pt.target);
        for (Eigen::Index c = 0; c < n_cols; ++c) {
            Scalar mean = 0.0;
            int count = 0;
            for (const auto& w : pt.member_weights) {
                mean += w[c];
                if (w[c] > 0.0) ++count;
            }
            mean /= static_cast<Scalar>(R);
            Scalar var = 0.0;
            for (const auto& w : pt.member_weights) var += (w[c] - mean) * (w[c] - mean);
            var /= static_cast<Scalar>(R);  // population variance
            table.records.push_back({pt.columns[c].source, pt.target, pt.columns[c].lag,
                                     mean, std::sqrt(var), count});
        }
    }
    sort_edges(table.records);
    return table;
}

namespace {

// (a) per (source, target) keep only the lag with the largest mean weight;
// ties resolve to the lower lag.
std::vector<EdgeRecord> best_lag_per_pair(const std::vector<EdgeRecord>& records) {
    std::map<std::pair<std::string, std::string>, EdgeRecord> best;
    for (const auto& e : records) {
        auto [it, inserted] = best.try_emplace({e.source, e.target}, e);
        if (inserted) continue;
        const EdgeRecord& cur = it->second;
        if (e.mean_weight > cur.mean_weight ||
            (e.mean_weight == cur.mean_weight && e.lag < cur.lag))
            it->second = e;
    }
    std::vector<EdgeRecord> out;
    out.reserve(best.size());
    for (auto& [key, e] : best) out.push_back(std::move(e));
    return out;
}

// (b) delta (strict >), (c) sigma <= mean, (d) strict majority of members.
std::vector<EdgeRecord> apply_filters(const std::vector<EdgeRecord>& records, Scalar delta,
                                      int R) {
    std::vector<EdgeRecord> out;
    for (const auto& e : records)
        if (e.mean_weight > delta && e.weight_sigma <= e.mean_weight &&
            e.ensembles_with_edge >= R / 2 + 1)
            out.push_back(e);
    return out;
}

// (e) per target keep the top_k largest means; ties by lower lag, then source.
std::vector<EdgeRecord> top_k_per_target(const std::vector<EdgeRecord>& records, int top_k) {
    std::map<std::string, std::vector<EdgeRecord>> by_target;
    for (const auto& e : records) by_target[e.target].push_back(e);
    std::vector<EdgeRecord> out;
    for (auto& [target, group] : by_target) {
        std::sort(group.begin(), group.end(), [](const EdgeRecord& a, const EdgeRecord& b) {
            return std::tie(b.mean_weight, a.lag, a.source) <
                   std::tie(a.mean_weight, b.lag, b.source);
        });
        if (static_cast<int>(group.size()) > top_k) group.resize(top_k);
        out.insert(out.end(), group.begin(), group.end());
    }
    return out;
}

}  // namespace

EdgeTable prune(const EdgeTable& table, const PruneParams& params) {
    if (params.top_k < 1) throw ConfigError("prune: top_k must be >= 1");
    std::vector<EdgeRecord> recs = table.records;
    if (params.rule_order == RuleOrder::best_lag_first) {
        recs = best_lag_per_pair(recs);
        recs = apply_filters(recs, params.delta, table.R);
    } else {
        recs = apply_filters(recs, params.delta, table.R);
        recs = best_lag_per_pair(recs);
    }
    recs = top_k_per_target(recs, params.top_k);
    sort_edges(recs);
    return {std::move(recs), table.R, table.lags};
}

RefitResult refit_and_score(const EnsembleSet& data, const LagSpec& lags,
                            const EdgeTable& pruned, const ForestConfig& config,
                            std::uint64_t master_seed,
                            const std::vector<std::string>& targets) {
    data.validate();
    lags.validate();
    const int R = static_cast<int>(data.size());

    std::vector<std::string> target_list = targets;
    if (target_list.empty()) target_list = data.members.front().names();

    RefitResult result;
    result.edges.R = R;
    result.edges.lags = lags.lags;

    for (const auto& target : target_list) {
        TargetRefit tr;
        tr.target = target;

        // Surviving incoming columns, in canonical feature-major/lag-minor order.
        for (const auto& f : data.members.front().features)
            for (int l : lags.lags)
                for (const auto& e : pruned.records)
                    if (e.target == target && e.source == f.name && e.lag == l)
                        tr.columns.push_back({f.name, l});

        if (tr.columns.empty()) {
            result.null_pathways.push_back(target);
            result.targets.push_back(std::move(tr));
            continue;
        }

        std::vector<Vec> member_weights;
        bool degenerate = false;
        for (int r = 0; r < R; ++r) {
            DesignMatrix full = build_design(data.members[r], lags, target);
            DesignMatrix restricted;
            restricted.target = target;
            restricted.times = full.times;
            restricted.columns = tr.columns;
            restricted.y = full.y;
            restricted.X.resize(full.rows(), static_cast<Eigen::Index>(tr.columns.size()));
            for (std::size_t c = 0; c < tr.columns.size(); ++c) {
                const auto it =
                    std::find(full.columns.begin(), full.columns.end(), tr.columns[c]);
                restricted.X.col(static_cast<Eigen::Index>(c)) =
                    full.X.col(std::distance(full.columns.begin(), it));
            }

            ForestConfig cfg = config;
            cfg.seed = rng::derive_seed(
                master_seed, {rng::hash_str("refit"), rng::hash_str(target),
                              static_cast<std::uint64_t>(r)});
            const RegressionForest forest = fit_forest(restricted, cfg);
            member_weights.push_back(aggregate_importance(forest, restricted));
            try {
                tr.member_reports.push_back(
                    fit_report(restricted.y, forest.predict_batch(restricted.X),
                               restricted.cols()));
            } catch (const std::domain_error&) {
                degenerate = true;  // constant target in this member
            }
        }

        if (!degenerate && static_cast<int>(tr.member_reports.size()) == R) {
            FitReport mean;
            mean.n = tr.member_reports.front().n;
            mean.p = tr.member_reports.front().p;
            for (const auto& rep : tr.member_reports) {
                mean.r2 += rep.r2;
                mean.r2_adj += rep.r2_adj;
                mean.rmse += rep.rmse;
            }
            mean.r2 /= R;
            mean.r2_adj /= R;
            mean.rmse /= R;
            tr.mean_report = mean;
        }

        std::vector<PerTargetImportances> agg{{target, tr.columns, member_weights}};
        EdgeTable t = aggregate_edges(agg, R, lags.lags);
        result.edges.records.insert(result.edges.records.end(), t.records.begin(),
                                    t.records.end());
        result.targets.push_back(std::move(tr));
    }
    sort_edges(result.edges.records);
    return result;
}

PathwayGraph build_graph(const EdgeTable& table, const std::vector<std::string>& nodes,
                         bool drop_self_loops, int display_cap) {
    PathwayGraph g;
    g.nodes = nodes;
    g.meta.R = table.R;
    g.meta.lags = table.lags;
    for (const auto& e : table.records) {
        if (e.mean_weight <= 0.0) continue;
        if (drop_self_loops && e.source == e.target) continue;
        g.edges.push_back(e);
    }
    if (display_cap > 0) {
        EdgeTable capped{g.edges, table.R, table.lags};
        g.edges = top_k_per_target(capped.records, display_cap);
    }
    sort_edges(g.edges);
    return g;
}

PathwayGraph build_graph(const EdgeTable& table, bool drop_self_loops, int display_cap) {
    std::vector<std::string> nodes;
    for (const auto& e : table.records) {
        if (std::find(nodes.begin(), nodes.end(), e.source) == nodes.end())
            nodes.push_back(e.source);
        if (std::find(nodes.begin(), nodes.end(), e.target) == nodes.end())
            nodes.push_back(e.target);
    }
    std::sort(nodes.begin(), nodes.end());
    return build_graph(table, nodes, drop_self_loops, display_cap);
}

namespace {

// Log-scale ramp between yellow (lowest weight) and blue (highest).
std::string ramp_color(Scalar w, Scalar w_min, Scalar w_max) {
    double t = 1.0;
    if (w_max > w_min && w > 0.0)
        t = (std::log(w) - std::log(w_min)) / (std::log(w_max) - std::log(w_min));
    t = std::clamp(t, 0.0, 1.0);
    const int r = static_cast<int>(std::lround(255.0 * (1.0 - t)));
    const int g = static_cast<int>(std::lround(255.0 * (1.0 - t)));
    const int b = static_cast<int>(std::lround(255.0 * t));
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
    return buf;
}

}  // namespace

std::string to_dot(const PathwayGraph& graph) {
    Scalar w_min = 0.0;
    Scalar w_max = 0.0;
    if (!graph.edges.empty()) {
        w_min = w_max = graph.edges.front().mean_weight;
        for (const auto& e : graph.edges) {
            w_min = std::min(w_min, e.mean_weight);
            w_max = std::max(w_max, e.mean_weight);
        }
    }
    std::ostringstream out;
    out << "digraph pathway {\n";
    for (const auto& n : graph.nodes) out << "  \"" << n << "\";\n";
    for (const auto& e : graph.edges)
        out << "  \"" << e.source << "\" -> \"" << e.target << "\" [label=\"" << e.lag
            << "\", color=\"" << ramp_color(e.mean_weight, w_min, w_max)
            << "\"];  // weight=" << format_g17(e.mean_weight) << "\n";
    out << "}\n";
    return out.str();
}

nlohmann::ordered_json to_graph_json(const PathwayGraph& graph) {
    nlohmann::ordered_json edges = nlohmann::ordered_json::array();
    for (const auto& e : graph.edges)
        edges.push_back({{"source", e.source},
                         {"target", e.target},
                         {"lag", e.lag},
                         {"weight", e.mean_weight},
                         {"sigma", e.weight_sigma},
                         {"ensembles", e.ensembles_with_edge}});
    return {{"nodes", graph.nodes},
            {"edges", std::move(edges)},
            {"meta",
             {{"R", graph.meta.R},
              {"lags", graph.meta.lags},
              {"delta", graph.meta.delta},
              {"top_k", graph.meta.top_k},
              {"rule_order", to_string(graph.meta.rule_order)}}}};
}

void save_edge_csv(const EdgeTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IngestError("cannot write " + path);
    out << "source,target,lag,shap_weight,weight_sigma,ensembles_with_edge\n";
    for (const auto& e : table.records)
        out << e.source << ',' << e.target << ',' << e.lag << ',' << format_g17(e.mean_weight)
            << ',' << format_g17(e.weight_sigma) << ',' << e.ensembles_with_edge << '\n';
}

EdgeTable load_edge_csv(const std::string& path, int R) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw IngestError(path + ":1: empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "source,target,lag,shap_weight,weight_sigma,ensembles_with_edge")
        throw IngestError(path + ":1: unexpected edge CSV header");

    EdgeTable table;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream row(line);
        EdgeRecord e;
        std::string lag_s, mean_s, sigma_s, count_s;
        if (!std::getline(row, e.source, ',') || !std::getline(row, e.target, ',') ||
            !std::getline(row, lag_s, ',') || !std::getline(row, mean_s, ',') ||
            !std::getline(row, sigma_s, ',') || !std::getline(row, count_s))
            throw IngestError(path + ":" + std::to_string(lineno) + ": expected 6 fields");
        try {
            e.lag = std::stoi(lag_s);
            e.mean_weight = std::stod(mean_s);
            e.weight_sigma = std::stod(sigma_s);
            e.ensembles_with_edge = std::stoi(count_s);
        } catch (const std::exception&) {
            throw IngestError(path + ":" + std::to_string(lineno) + ": malformed numeric field");
        }
        table.records.push_back(std::move(e));
    }
    table.R = R;
    if (table.R == 0)
        for (const auto& e : table.records)
            table.R = std::max(table.R, e.ensembles_with_edge);
    return table;
}

}  // namespace lagpath
