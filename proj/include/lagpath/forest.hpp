#pragma once

// From-scratch bagged CART regression forest.  Split search is exhaustive
// (all candidate columns, all midpoints of adjacent distinct sorted values),
// maximizing variance reduction; ties break toward lower column index, then
// lower threshold.  Every node records its cover (bootstrap rows reaching
// it), which path-dependent SHAP requires.

#include <lagpath/lag_design.hpp>
#include <lagpath/types.hpp>

#include <json.hpp>

#include <cstdint>
#include <vector>

namespace lagpath {

struct ForestConfig {
    int n_trees = 100;
    int max_depth = 4;  // root is depth 0: at most 4 split levels, <= 16 leaves
    int min_samples_split = 2;
    int min_samples_leaf = 1;
    bool bootstrap = true;
    double features_per_split = 1.0;  // fraction of columns tried per split
    std::uint64_t seed = 0;

    void validate() const;
};

struct TreeNode {
    int feature = -1;  // split column; -1 marks a leaf
    Scalar threshold = 0.0;
    int left = -1;
    int right = -1;
    Scalar value = 0.0;  // mean of the node's training rows
    long cover = 0;

    bool is_leaf() const { return feature < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    Scalar predict(const Eigen::Ref<const Vec>& x) const {
        int i = 0;
        while (!nodes[i].is_leaf())
            i = (x[nodes[i].feature] <= nodes[i].threshold) ? nodes[i].left : nodes[i].right;
        return nodes[i].value;
    }
};

struct RegressionForest {
    std::vector<Tree> trees;
    ForestConfig config;
    Eigen::Index n_columns = 0;

    Scalar predict(const Eigen::Ref<const Vec>& x) const;
    Vec predict_batch(const Mat& X) const;
};

// Deterministic in (design, config): tree t uses the stream seeded with
// derive_seed(config.seed, {t}); drivers put the per-(target, member) hash
// into config.seed.
RegressionForest fit_forest(const DesignMatrix& design, const ForestConfig& config);

// Nested-object dump (covers included) for fixture capture and debugging.
nlohmann::json forest_to_json(const RegressionForest& forest);

}  // namespace lagpath
