#include <doctest.h>

#include <lagpath/pathway.hpp>
#include <lagpath/rng.hpp>
#include <lagpath/synth.hpp>

#include "fixtures/benchmark_fixtures.hpp"

#include <algorithm>
#include <filesystem>
#include <set>
#include <string>
#include <tuple>
#include <vector>

using namespace lagpath;

namespace {

using EdgeKey = std::tuple<std::string, std::string, int>;

EdgeKey key(const EdgeRecord& e) { return {e.source, e.target, e.lag}; }

std::set<EdgeKey> key_set(const EdgeTable& t) {
    std::set<EdgeKey> out;
    for (const auto& e : t.records) out.insert(key(e));
    return out;
}

template <std::size_t N>
EdgeTable from_fixture(const fixtures::EdgeRow (&rows)[N], int R = 5) {
    EdgeTable t;
    t.R = R;
    t.lags = {1, 6, 11, 16, 21, 26, 31, 36, 41, 46, 51, 56};
    for (const auto& r : rows)
        t.records.push_back({r.source, r.target, r.lag, r.mean, r.sigma, r.count});
    return t;
}

EdgeRecord edge(std::string s, std::string t, int lag, Scalar mean, Scalar sigma = 0.0,
                int count = 5) {
    return {std::move(s), std::move(t), lag, mean, sigma, count};
}

// Aggregated synthetic-benchmark top-6 (self and cross edges, all lag 1).
EdgeTable table3_like() {
    EdgeTable t;
    t.R = 5;
    t.lags = {1, 2, 3, 4, 5};
    t.records = {
        edge("X", "X", 1, 0.243), edge("W", "W", 1, 0.240), edge("X", "Z", 1, 0.229),
        edge("W", "Y", 1, 0.225), edge("Y", "Z", 1, 0.051), edge("W", "X", 1, 0.027),
    };
    return t;
}

}  // namespace

TEST_CASE("aggregate_edges worked examples") {
    SUBCASE("R = 1") {
        std::vector<PerTargetImportances> pt{{"T", {{"S", 1}}, {(Vec(1) << 0.4).finished()}}};
        const auto t = aggregate_edges(pt, 1, {1});
        REQUIRE(t.records.size() == 1);
        CHECK(t.records[0].mean_weight == 0.4);
        CHECK(t.records[0].weight_sigma == 0.0);
        CHECK(t.records[0].ensembles_with_edge == 1);
    }
    SUBCASE("population sigma over two members") {
        std::vector<PerTargetImportances> pt{
            {"T", {{"S", 1}}, {(Vec(1) << 0.2).finished(), (Vec(1) << 0.3).finished()}}};
        const auto t = aggregate_edges(pt, 2, {1});
        CHECK(t.records[0].mean_weight == doctest::Approx(0.25).epsilon(1e-15));
        CHECK(t.records[0].weight_sigma == doctest::Approx(0.05).epsilon(1e-12));
        CHECK(t.records[0].ensembles_with_edge == 2);
    }
    SUBCASE("positivity count") {
        std::vector<PerTargetImportances> pt{{"T",
                                              {{"S", 1}},
                                              {(Vec(1) << 0.0).finished(), (Vec(1) << 0.0).finished(),
                                               (Vec(1) << 0.3).finished(), (Vec(1) << 0.3).finished(),
                                               (Vec(1) << 0.3).finished()}}};
        const auto t = aggregate_edges(pt, 5, {1});
        CHECK(t.records[0].ensembles_with_edge == 3);
    }
    SUBCASE("member count mismatch is rejected") {
        std::vector<PerTargetImportances> pt{{"T", {{"S", 1}}, {(Vec(1) << 0.4).finished()}}};
        CHECK_THROWS_AS(aggregate_edges(pt, 2, {1}), ConfigError);
    }
}

TEST_CASE("aggregate_edges emits records sorted by descending mean weight") {
    std::vector<PerTargetImportances> pt{
        {"T", {{"A", 1}, {"B", 1}, {"C", 1}}, {(Vec(3) << 0.1, 0.5, 0.3).finished()}}};
    const auto t = aggregate_edges(pt, 1, {1});
    CHECK(t.records[0].source == "B");
    CHECK(t.records[1].source == "C");
    CHECK(t.records[2].source == "A");
}

TEST_CASE("delta threshold is strict") {
    EdgeTable t;
    t.R = 5;
    t.lags = {1};
    t.records = {edge("A", "B", 1, 2e-4, 1e-4), edge("A", "C", 1, 5e-5, 1e-5)};
    const auto pruned = prune(t);
    REQUIRE(pruned.records.size() == 1);
    CHECK(pruned.records[0].target == "B");

    t.records = {edge("A", "B", 1, 1e-4)};  // exactly delta: does not survive
    CHECK(prune(t).records.empty());
}

TEST_CASE("sigma and majority filters") {
    EdgeTable t;
    t.R = 5;
    t.lags = {1};
    t.records = {edge("A", "B", 1, 0.01, 0.02, 5),     // sigma > mean
                 edge("A", "C", 1, 0.01, 0.001, 2)};   // only 2 of 5 members
    const auto pruned = prune(t);
    CHECK(pruned.records.empty());

    t.records = {edge("A", "B", 1, 0.01, 0.01, 3)};  // sigma == mean passes, 3 of 5 passes
    CHECK(prune(t).records.size() == 1);
}

TEST_CASE("golden: stratospheric global fixture prunes to the published 7 edges") {
    const auto pruned = prune(from_fixture(fixtures::kGlobalStrat));
    const std::set<EdgeKey> expect{
        {"Globe_T050", "Globe_T050", 1},    {"Globe_FLNTC", "Globe_FLNTC", 1},
        {"Globe_AEROD_v", "Globe_AEROD_v", 1}, {"Globe_T050", "Globe_FLNTC", 1},
        {"Globe_AEROD_v", "Globe_FLNTC", 6},   {"Globe_FLNTC", "Globe_AEROD_v", 31},
        {"Globe_FLNTC", "Globe_T050", 36},
    };
    CHECK(key_set(pruned) == expect);
    // Emission order: descending mean weight.
    for (std::size_t i = 1; i < pruned.records.size(); ++i)
        CHECK(pruned.records[i - 1].mean_weight >= pruned.records[i].mean_weight);
}

TEST_CASE("golden: surface global fixture prunes to the published 6 edges") {
    const auto pruned = prune(from_fixture(fixtures::kGlobalSurf));
    const std::set<EdgeKey> expect{
        {"Globe_TREFHT", "Globe_TREFHT", 1}, {"Globe_FSDSC", "Globe_FSDSC", 1},
        {"Globe_AEROD_v", "Globe_AEROD_v", 1}, {"Globe_AEROD_v", "Globe_FSDSC", 1},
        {"Globe_FSDSC", "Globe_TREFHT", 51},   {"Globe_FSDSC", "Globe_AEROD_v", 21},
    };
    CHECK(key_set(pruned) == expect);
    // No AEROD_v -> TREFHT edge survives.
    for (const auto& e : pruned.records)
        CHECK_FALSE((e.source == "Globe_AEROD_v" && e.target == "Globe_TREFHT"));
}

TEST_CASE("rule order is observable: filters_first keeps one extra edge on A.1") {
    PruneParams ff;
    ff.rule_order = RuleOrder::filters_first;
    const auto pruned = prune(from_fixture(fixtures::kGlobalStrat), ff);
    auto expect = key_set(prune(from_fixture(fixtures::kGlobalStrat)));
    expect.insert({"Globe_AEROD_v", "Globe_T050", 31});
    CHECK(key_set(pruned) == expect);
}

TEST_CASE("zonal fixtures satisfy the prune invariants") {
    const auto check_fixture = [](const EdgeTable& input, std::size_t expect_count) {
        const auto pruned = prune(input);
        CHECK(pruned.records.size() == expect_count);

        // Subset of the input, no weight mutation.
        const auto inputs = key_set(input);
        std::map<EdgeKey, Scalar> in_weights;
        for (const auto& e : input.records) in_weights[key(e)] = e.mean_weight;
        std::map<std::string, int> incoming;
        std::map<std::pair<std::string, std::string>, int> per_pair;
        for (const auto& e : pruned.records) {
            CHECK(inputs.count(key(e)) == 1);
            CHECK(e.mean_weight == in_weights[key(e)]);
            CHECK(e.mean_weight > 1e-4);
            CHECK(e.weight_sigma <= e.mean_weight);
            CHECK(e.ensembles_with_edge >= 3);  // majority of R=5
            ++incoming[e.target];
            ++per_pair[{e.source, e.target}];
        }
        for (const auto& [target, n] : incoming) CHECK(n <= 4);
        for (const auto& [pair, n] : per_pair) CHECK(n == 1);  // one lag per pair

        // Idempotence.
        const auto again = prune(pruned);
        CHECK(key_set(again) == key_set(pruned));
    };
    check_fixture(from_fixture(fixtures::kZonalStrat), 18);
    check_fixture(from_fixture(fixtures::kZonalSurf), 22);
}

TEST_CASE("prune is idempotent on the global fixtures too") {
    for (int which = 0; which < 2; ++which) {
        const auto input = which == 0 ? from_fixture(fixtures::kGlobalStrat)
                                      : from_fixture(fixtures::kGlobalSurf);
        const auto once = prune(input);
        const auto twice = prune(once);
        CHECK(key_set(once) == key_set(twice));
        CHECK(once.records.size() == twice.records.size());
    }
}

TEST_CASE("pruning commutes with positive rescaling when delta scales too") {
    const auto input = from_fixture(fixtures::kGlobalStrat);
    const auto baseline = key_set(prune(input));
    for (Scalar c : {1e-3, 7.0, 1e4}) {
        EdgeTable scaled = input;
        for (auto& e : scaled.records) {
            e.mean_weight *= c;
            e.weight_sigma *= c;
        }
        PruneParams params;
        params.delta = 1e-4 * c;
        CHECK(key_set(prune(scaled, params)) == baseline);
    }
}

TEST_CASE("rule order strings round trip") {
    CHECK(to_string(RuleOrder::best_lag_first) == "best_lag_first");
    CHECK(to_string(RuleOrder::filters_first) == "filters_first");
    CHECK(rule_order_from_string("best_lag_first") == RuleOrder::best_lag_first);
    CHECK(rule_order_from_string("filters_first") == RuleOrder::filters_first);
    CHECK_THROWS_AS(rule_order_from_string("bogus"), ConfigError);
}

TEST_CASE("build_graph mirrors the synthetic top-6 table") {
    const auto g = build_graph(table3_like());
    CHECK(g.nodes == std::vector<std::string>{"W", "X", "Y", "Z"});
    REQUIRE(g.edges.size() == 6);
    const auto keys = key_set({g.edges, 5, {1}});
    CHECK(keys.count({"W", "W", 1}) == 1);
    CHECK(keys.count({"W", "X", 1}) == 1);
    CHECK(keys.count({"W", "Y", 1}) == 1);
    CHECK(keys.count({"X", "X", 1}) == 1);
    CHECK(keys.count({"X", "Z", 1}) == 1);
    CHECK(keys.count({"Y", "Z", 1}) == 1);
}

TEST_CASE("build_graph drops zero weights, self-loops on request, and caps display") {
    EdgeTable t = table3_like();
    t.records.push_back(edge("Z", "W", 2, 0.0));  // zero weight never appears
    const auto g = build_graph(t);
    CHECK(g.edges.size() == 6);

    const auto pruned7 = prune(from_fixture(fixtures::kGlobalStrat));
    const auto no_self = build_graph(pruned7, true);
    CHECK(no_self.edges.size() == 4);  // 7 published edges minus 3 self-loops
    for (const auto& e : no_self.edges) CHECK(e.source != e.target);

    const auto capped = build_graph(table3_like(), false, 1);
    std::map<std::string, int> incoming;
    for (const auto& e : capped.edges) ++incoming[e.target];
    for (const auto& [target, n] : incoming) CHECK(n == 1);
}

TEST_CASE("empty table gives a nodes-only graph and a valid DOT document") {
    EdgeTable t;
    t.R = 5;
    t.lags = {1};
    const auto g = build_graph(t, std::vector<std::string>{"A", "B"});
    CHECK(g.edges.empty());
    const auto dot = to_dot(g);
    CHECK(dot.find("digraph pathway {") == 0);
    CHECK(dot.find("\"A\";") != std::string::npos);
    CHECK(dot.find("->") == std::string::npos);
}

TEST_CASE("DOT output carries lag labels, ramp colors, and weight comments") {
    const auto dot = to_dot(build_graph(table3_like()));
    CHECK(dot.find("\"X\" -> \"Z\" [label=\"1\", color=\"#") != std::string::npos);
    CHECK(dot.find("// weight=0.229") != std::string::npos);
    // Strongest edge is pure blue, weakest pure yellow on the log ramp.
    CHECK(dot.find("\"X\" -> \"X\" [label=\"1\", color=\"#0000ff\"]") != std::string::npos);
    CHECK(dot.find("\"W\" -> \"X\" [label=\"1\", color=\"#ffff00\"]") != std::string::npos);
}

TEST_CASE("graph JSON carries nodes, edges, and meta") {
    auto table = table3_like();
    PathwayGraph g = build_graph(table);
    g.meta.delta = 1e-4;
    g.meta.top_k = 4;
    g.meta.rule_order = RuleOrder::best_lag_first;
    const auto j = to_graph_json(g);
    CHECK(j["nodes"].size() == 4);
    CHECK(j["edges"].size() == 6);
    CHECK(j["edges"][0]["source"] == "X");
    CHECK(j["edges"][0]["target"] == "X");
    CHECK(j["edges"][0]["lag"] == 1);
    CHECK(j["edges"][0]["weight"] == 0.243);
    CHECK(j["meta"]["R"] == 5);
    CHECK(j["meta"]["delta"] == 1e-4);
    CHECK(j["meta"]["top_k"] == 4);
    CHECK(j["meta"]["rule_order"] == "best_lag_first");
    CHECK(j["meta"]["lags"] == nlohmann::ordered_json({1, 2, 3, 4, 5}));
}

TEST_CASE("edge CSV round trips exactly") {
    EdgeTable t;
    t.R = 5;
    t.lags = {1, 2};
    t.records = {edge("A", "B", 1, 1.0 / 3.0, 0.05 / 7.0, 5),
                 edge("B", "A", 2, 2.41e-17, 1e-300, 3)};
    const auto path = std::filesystem::temp_directory_path() / "lagpath_edges.csv";
    save_edge_csv(t, path.string());
    const auto back = load_edge_csv(path.string(), 5);
    std::filesystem::remove(path);
    REQUIRE(back.records.size() == 2);
    CHECK(back.R == 5);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(back.records[i].source == t.records[i].source);
        CHECK(back.records[i].target == t.records[i].target);
        CHECK(back.records[i].lag == t.records[i].lag);
        CHECK(back.records[i].mean_weight == t.records[i].mean_weight);
        CHECK(back.records[i].weight_sigma == t.records[i].weight_sigma);
        CHECK(back.records[i].ensembles_with_edge == t.records[i].ensembles_with_edge);
    }
}

TEST_CASE("load_edge_csv infers R from counts when unspecified") {
    EdgeTable t;
    t.R = 5;
    t.lags = {1};
    t.records = {edge("A", "B", 1, 0.5, 0.0, 4)};
    const auto path = std::filesystem::temp_directory_path() / "lagpath_edges_r.csv";
    save_edge_csv(t, path.string());
    CHECK(load_edge_csv(path.string()).R == 4);
    CHECK(load_edge_csv(path.string(), 5).R == 5);
    std::filesystem::remove(path);
}

TEST_CASE("refit on the full table reproduces the pre-prune fits") {
    SynthConfig sc;
    sc.n_ensembles = 2;
    sc.length = 80;
    sc.seed = 5;
    const auto data = generate_synthetic(sc);
    const LagSpec lags{{1, 2}};
    ForestConfig fc;
    fc.n_trees = 5;
    fc.bootstrap = false;  // deterministic trees: refit seed is irrelevant

    // A "pruned" table that keeps every column of every target.
    EdgeTable full;
    full.R = 2;
    full.lags = lags.lags;
    for (const auto& tgt : data.members.front().names())
        for (const auto& src : data.members.front().names())
            for (int l : lags.lags) full.records.push_back(edge(src, tgt, l, 1.0));

    const auto refit = refit_and_score(data, lags, full, fc, 0);
    CHECK(refit.null_pathways.empty());
    REQUIRE(refit.targets.size() == 4);
    for (const auto& tr : refit.targets) {
        REQUIRE(tr.columns.size() == 8);  // 4 features x 2 lags
        REQUIRE(tr.member_reports.size() == 2);
        for (int r = 0; r < 2; ++r) {
            const auto design = build_design(data.members[static_cast<std::size_t>(r)],
                                             lags, tr.target);
            const auto forest = fit_forest(design, fc);
            const auto direct =
                fit_report(design.y, forest.predict_batch(design.X), design.cols());
            CHECK(tr.member_reports[static_cast<std::size_t>(r)].r2_adj ==
                  doctest::Approx(direct.r2_adj).epsilon(1e-12));
            CHECK(tr.member_reports[static_cast<std::size_t>(r)].rmse ==
                  doctest::Approx(direct.rmse).epsilon(1e-12));
            CHECK(tr.member_reports[static_cast<std::size_t>(r)].p == 8);
        }
    }
}

TEST_CASE("refit restricts the design to surviving columns") {
    SynthConfig sc;
    sc.n_ensembles = 2;
    sc.length = 60;
    sc.seed = 9;
    const auto data = generate_synthetic(sc);
    const LagSpec lags{{1, 2}};
    ForestConfig fc;
    fc.n_trees = 3;
    fc.bootstrap = false;

    EdgeTable pruned;
    pruned.R = 2;
    pruned.lags = lags.lags;
    pruned.records = {edge("W", "W", 1, 0.3)};  // only W keeps an incoming edge

    const auto refit = refit_and_score(data, lags, pruned, fc, 0);
    const auto& w = refit.targets;
    const auto w_it = std::find_if(w.begin(), w.end(),
                                   [](const TargetRefit& tr) { return tr.target == "W"; });
    REQUIRE(w_it != w.end());
    CHECK(w_it->columns == std::vector<ColumnKey>{{"W", 1}});
    REQUIRE(w_it->mean_report.has_value());
    CHECK(w_it->mean_report->p == 1);  // one-column design

    // Remaining targets are null pathways.
    std::set<std::string> nulls(refit.null_pathways.begin(), refit.null_pathways.end());
    CHECK(nulls == std::set<std::string>{"X", "Y", "Z"});

    // Refit edge statistics cover exactly the surviving keys.
    REQUIRE(refit.edges.records.size() == 1);
    CHECK(key(refit.edges.records[0]) == EdgeKey{"W", "W", 1});
    CHECK(refit.edges.records[0].mean_weight > 0.0);
    CHECK(refit.edges.records[0].ensembles_with_edge == 2);
}
