#pragma once

// Exact path-dependent TreeSHAP for regression forests, a brute-force
// Shapley oracle over the same cover-weighted conditional-expectation game,
// and aggregation of per-row attributions into per-column weights.

#include <lagpath/forest.hpp>

namespace lagpath {

struct Attribution {
    Vec phi;            // one entry per design column
    Scalar base = 0.0;  // expected model output (cover-weighted leaf mean)

    // Local accuracy: base + phi.sum() == prediction, to 1e-9.
};

Attribution tree_shap(const Tree& tree, const Eigen::Ref<const Vec>& x,
                      Eigen::Index n_columns);

// Mean of per-tree attributions, matching predict() being the tree mean.
Attribution forest_shap(const RegressionForest& forest, const Eigen::Ref<const Vec>& x);

// Exponential-time oracle (2^M subset enumeration); requires n_columns <= 16.
Attribution brute_force_shapley(const Tree& tree, const Eigen::Ref<const Vec>& x,
                                Eigen::Index n_columns);
Attribution brute_force_shapley(const RegressionForest& forest,
                                const Eigen::Ref<const Vec>& x);

// Per-column mean |phi| over all design rows; deterministic row order.
Vec aggregate_importance(const RegressionForest& forest, const DesignMatrix& design);

}  // namespace lagpath
