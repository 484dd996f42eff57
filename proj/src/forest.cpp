#include <lagpath/forest.hpp>
#include <lagpath/rng.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lagpath {

void ForestConfig::validate() const {
    if (n_trees < 1) throw ConfigError("forest: n_trees must be >= 1");
    if (max_depth < 1) throw ConfigError("forest: max_depth must be >= 1");
    if (min_samples_split < 2) throw ConfigError("forest: min_samples_split must be >= 2");
    if (min_samples_leaf < 1) throw ConfigError("forest: min_samples_leaf must be >= 1");
    if (!(features_per_split > 0.0) || features_per_split > 1.0)
        throw ConfigError("forest: features_per_split must be in (0, 1]");
}

namespace {

struct Builder {
    const Mat& X;
    const Vec& y;
    const ForestConfig& cfg;
    rng::Xoshiro256pp& gen;
    std::vector<TreeNode>& nodes;

    std::vector<Eigen::Index> candidate_columns() {
        const Eigen::Index n_cols = X.cols();
        if (cfg.features_per_split >= 1.0) {
            std::vector<Eigen::Index> all(n_cols);
            std::iota(all.begin(), all.end(), 0);
            return all;
        }
        const auto k = std::max<Eigen::Index>(
            1, static_cast<Eigen::Index>(std::ceil(cfg.features_per_split *
                                                   static_cast<double>(n_cols))));
        std::vector<Eigen::Index> pool(n_cols);
        std::iota(pool.begin(), pool.end(), 0);
        for (Eigen::Index i = 0; i < k; ++i) {  // partial Fisher-Yates
            const auto j = i + static_cast<Eigen::Index>(
                                   gen.below(static_cast<std::uint64_t>(n_cols - i)));
            std::swap(pool[i], pool[j]);
        }
        pool.resize(k);
        std::sort(pool.begin(), pool.end());  // ascending for stable tie-breaks
        return pool;
    }

    // Returns the node index; rows carry bootstrap multiplicity.
    int build(std::vector<Eigen::Index> rows, int depth) {
        const int idx = static_cast<int>(nodes.size());
        nodes.emplace_back();

        const auto m = static_cast<Eigen::Index>(rows.size());
        Scalar sum = 0.0;
        Scalar y_min = y[rows.front()];
        Scalar y_max = y_min;
        for (const auto r : rows) {
            sum += y[r];
            y_min = std::min(y_min, y[r]);
            y_max = std::max(y_max, y[r]);
        }
        nodes[idx].cover = m;
        nodes[idx].value = sum / static_cast<Scalar>(m);

        if (depth >= cfg.max_depth || m < cfg.min_samples_split || y_min == y_max)
            return idx;

        // Variance reduction via the equivalent score sum^2/n per side:
        // gain = sumL^2/nL + sumR^2/nR - sum^2/m, positive iff SSE decreases.
        Scalar best_gain = 0.0;
        Eigen::Index best_col = -1;
        Scalar best_thr = 0.0;

        std::vector<std::pair<Scalar, Scalar>> xy(m);
        for (const Eigen::Index c : candidate_columns()) {
            for (Eigen::Index i = 0; i < m; ++i) xy[i] = {X(rows[i], c), y[rows[i]]};
            std::sort(xy.begin(), xy.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });

            Scalar sum_left = 0.0;
            for (Eigen::Index i = 1; i < m; ++i) {
                sum_left += xy[i - 1].second;
                if (xy[i].first == xy[i - 1].first) continue;
                if (i < cfg.min_samples_leaf || m - i < cfg.min_samples_leaf) continue;
                const Scalar sum_right = sum - sum_left;
                const Scalar gain = sum_left * sum_left / static_cast<Scalar>(i) +
                                    sum_right * sum_right / static_cast<Scalar>(m - i) -
                                    sum * sum / static_cast<Scalar>(m);
                if (gain > best_gain) {
                    best_gain = gain;
                    best_col = c;
                    best_thr = (xy[i - 1].first + xy[i].first) / 2.0;
                }
            }
        }
        if (best_col < 0) return idx;  // pure node or no improving split

        std::vector<Eigen::Index> left, right;
        for (const auto r : rows)
            (X(r, best_col) <= best_thr ? left : right).push_back(r);
        rows.clear();
        rows.shrink_to_fit();

        nodes[idx].feature = static_cast<int>(best_col);
        nodes[idx].threshold = best_thr;
        const int l = build(std::move(left), depth + 1);
        const int r = build(std::move(right), depth + 1);
        nodes[idx].left = l;
        nodes[idx].right = r;
        return idx;
    }
};

Tree build_tree(const DesignMatrix& design, const ForestConfig& cfg, std::uint64_t seed) {
    rng::Xoshiro256pp gen(seed);
    const Eigen::Index n = design.rows();

    std::vector<Eigen::Index> rows(n);
    if (cfg.bootstrap)
        for (auto& r : rows)
            r = static_cast<Eigen::Index>(gen.below(static_cast<std::uint64_t>(n)));
    else
        std::iota(rows.begin(), rows.end(), 0);

    Tree tree;
    Builder b{design.X, design.y, cfg, gen, tree.nodes};
    b.build(std::move(rows), 0);
    return tree;
}

}  // namespace

RegressionForest fit_forest(const DesignMatrix& design, const ForestConfig& config) {
    config.validate();
    if (design.rows() == 0 || design.cols() == 0) throw ConfigError("forest: empty design");

    RegressionForest forest;
    forest.config = config;
    forest.n_columns = design.cols();
    forest.trees.reserve(config.n_trees);

    // Without bootstrap or column subsampling every tree is the same
    // deterministic CART; build it once and replicate.
    const bool all_identical = !config.bootstrap && config.features_per_split >= 1.0;
    for (int t = 0; t < config.n_trees; ++t) {
        if (all_identical && t > 0)
            forest.trees.push_back(forest.trees.front());
        else
            forest.trees.push_back(
                build_tree(design, config, rng::derive_seed(config.seed, {static_cast<std::uint64_t>(t)})));
    }
    return forest;
}

Scalar RegressionForest::predict(const Eigen::Ref<const Vec>& x) const {
    if (x.size() != n_columns)
        throw std::invalid_argument("predict: expected " + std::to_string(n_columns) +
                                    " inputs, got " + std::to_string(x.size()));
    Scalar acc = 0.0;
    for (const auto& t : trees) acc += t.predict(x);
    return acc / static_cast<Scalar>(trees.size());
}

Vec RegressionForest::predict_batch(const Mat& X) const {
    Vec out(X.rows());
    for (Eigen::Index r = 0; r < X.rows(); ++r) out[r] = predict(X.row(r).transpose());
    return out;
}

namespace {

nlohmann::json node_to_json(const Tree& tree, int i) {
    const TreeNode& nd = tree.nodes[i];
    if (nd.is_leaf()) return {{"value", nd.value}, {"cover", nd.cover}};
    return {{"feature", nd.feature},
            {"threshold", nd.threshold},
            {"cover", nd.cover},
            {"left", node_to_json(tree, nd.left)},
            {"right", node_to_json(tree, nd.right)}};
}

}  // namespace

nlohmann::json forest_to_json(const RegressionForest& forest) {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& t : forest.trees) trees.push_back(node_to_json(t, 0));
    return {{"n_columns", forest.n_columns},
            {"n_trees", static_cast<int>(forest.trees.size())},
            {"trees", std::move(trees)}};
}

}  // namespace lagpath
