#include <lagpath/shap.hpp>

#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

namespace lagpath {

namespace {

// One feature on the current root->node path: split feature d, fraction of
// cover-weighted paths flowing through when the feature is excluded (z) or
// included (o), and the permutation weight w.
struct PathElement {
    int d;
    Scalar z;
    Scalar o;
    Scalar w;
};

using Path = std::vector<PathElement>;

Path extend(Path m, Scalar pz, Scalar po, int pi) {
    const auto l = static_cast<int>(m.size());
    m.push_back({pi, pz, po, l == 0 ? 1.0 : 0.0});
    for (int i = l - 1; i >= 0; --i) {
        m[i + 1].w += po * m[i].w * (i + 1) / static_cast<Scalar>(l + 1);
        m[i].w = pz * m[i].w * (l - i) / static_cast<Scalar>(l + 1);
    }
    return m;
}

Path unwind(Path m, int i) {
    const auto l = static_cast<int>(m.size()) - 1;
    const Scalar oz = m[i].z;
    const Scalar oo = m[i].o;
    Scalar n = m[l].w;
    for (int j = l - 1; j >= 0; --j) {
        if (oo != 0.0) {
            const Scalar t = m[j].w;
            m[j].w = n * (l + 1) / ((j + 1) * oo);
            n = t - m[j].w * oz * (l - j) / static_cast<Scalar>(l + 1);
        } else {
            m[j].w = m[j].w * (l + 1) / (oz * (l - j));
        }
    }
    for (int j = i; j < l; ++j) {
        m[j].d = m[j + 1].d;
        m[j].z = m[j + 1].z;
        m[j].o = m[j + 1].o;
    }
    m.pop_back();
    return m;
}

Scalar unwound_sum(const Path& m, int i) {
    const auto l = static_cast<int>(m.size()) - 1;
    const Scalar oz = m[i].z;
    const Scalar oo = m[i].o;
    Scalar total = 0.0;
    Scalar n = m[l].w;
    for (int j = l - 1; j >= 0; --j) {
        if (oo != 0.0) {
            const Scalar t = n * (l + 1) / ((j + 1) * oo);
            total += t;
            n = m[j].w - t * oz * (l - j) / static_cast<Scalar>(l + 1);
        } else {
            total += m[j].w * (l + 1) / (oz * (l - j));
        }
    }
    return total;
}

struct ShapWalker {
    const Tree& tree;
    const Eigen::Ref<const Vec>& x;
    Vec& phi;

    // m is taken by value: each recursion level owns its copy of the path.
    void recurse(int j, Path m, Scalar pz, Scalar po, int pi) {
        m = extend(std::move(m), pz, po, pi);
        const TreeNode& nd = tree.nodes[j];
        if (nd.is_leaf()) {
            for (int i = 1; i < static_cast<int>(m.size()); ++i)
                phi[m[i].d] += unwound_sum(m, i) * (m[i].o - m[i].z) * nd.value;
            return;
        }
        const int f = nd.feature;
        const bool go_left = x[f] <= nd.threshold;
        const int hot = go_left ? nd.left : nd.right;
        const int cold = go_left ? nd.right : nd.left;

        Scalar iz = 1.0;
        Scalar io = 1.0;
        for (int idx = 0; idx < static_cast<int>(m.size()); ++idx)
            if (m[idx].d == f) {
                iz = m[idx].z;
                io = m[idx].o;
                m = unwind(std::move(m), idx);
                break;
            }
        const Scalar cover = static_cast<Scalar>(nd.cover);
        recurse(hot, m, iz * tree.nodes[hot].cover / cover, io, f);
        recurse(cold, std::move(m), iz * tree.nodes[cold].cover / cover, 0.0, f);
    }
};

Scalar tree_base(const Tree& tree, int j = 0) {
    const TreeNode& nd = tree.nodes[j];
    if (nd.is_leaf()) return nd.value;
    const Scalar cover = static_cast<Scalar>(nd.cover);
    return tree.nodes[nd.left].cover / cover * tree_base(tree, nd.left) +
           tree.nodes[nd.right].cover / cover * tree_base(tree, nd.right);
}

void check_covers(const Tree& tree) {
    for (const auto& nd : tree.nodes) {
        if (nd.cover <= 0) throw std::invalid_argument("tree_shap: missing cover counts");
        if (!nd.is_leaf() &&
            nd.cover != tree.nodes[nd.left].cover + tree.nodes[nd.right].cover)
            throw std::invalid_argument("tree_shap: cover(parent) != cover(left)+cover(right)");
    }
}

// v(S): follow x inside S, cover-weighted average outside S.
Scalar cond_exp(const Tree& tree, const Eigen::Ref<const Vec>& x, std::uint32_t mask, int j) {
    const TreeNode& nd = tree.nodes[j];
    if (nd.is_leaf()) return nd.value;
    if (mask >> nd.feature & 1u)
        return cond_exp(tree, x, mask, x[nd.feature] <= nd.threshold ? nd.left : nd.right);
    const Scalar cover = static_cast<Scalar>(nd.cover);
    return tree.nodes[nd.left].cover / cover * cond_exp(tree, x, mask, nd.left) +
           tree.nodes[nd.right].cover / cover * cond_exp(tree, x, mask, nd.right);
}

}  // namespace

Attribution tree_shap(const Tree& tree, const Eigen::Ref<const Vec>& x,
                      Eigen::Index n_columns) {
    check_covers(tree);
    Attribution a;
    a.phi = Vec::Zero(n_columns);
    a.base = tree_base(tree);
    ShapWalker walker{tree, x, a.phi};
    walker.recurse(0, {}, 1.0, 1.0, -1);
    return a;
}

Attribution forest_shap(const RegressionForest& forest, const Eigen::Ref<const Vec>& x) {
    Attribution acc;
    acc.phi = Vec::Zero(forest.n_columns);
    for (const auto& t : forest.trees) {
        const Attribution a = tree_shap(t, x, forest.n_columns);
        acc.phi += a.phi;
        acc.base += a.base;
    }
    const auto n = static_cast<Scalar>(forest.trees.size());
    acc.phi /= n;
    acc.base /= n;
    return acc;
}

Attribution brute_force_shapley(const Tree& tree, const Eigen::Ref<const Vec>& x,
                                Eigen::Index n_columns) {
    if (n_columns > 16) throw std::invalid_argument("brute_force_shapley: > 16 columns");
    check_covers(tree);
    const int m = static_cast<int>(n_columns);

    std::vector<Scalar> v(std::size_t{1} << m);
    for (std::uint32_t mask = 0; mask < v.size(); ++mask)
        v[mask] = cond_exp(tree, x, mask, 0);

    std::vector<Scalar> fact(m + 1, 1.0);
    for (int i = 1; i <= m; ++i) fact[i] = fact[i - 1] * i;

    Attribution a;
    a.phi = Vec::Zero(n_columns);
    a.base = v[0];
    for (int i = 0; i < m; ++i)
        for (std::uint32_t mask = 0; mask < v.size(); ++mask) {
            if (mask >> i & 1u) continue;
            const int s = std::popcount(mask);
            const Scalar w = fact[s] * fact[m - s - 1] / fact[m];
            a.phi[i] += w * (v[mask | (1u << i)] - v[mask]);
        }
    return a;
}

Attribution brute_force_shapley(const RegressionForest& forest,
                                const Eigen::Ref<const Vec>& x) {
    Attribution acc;
    acc.phi = Vec::Zero(forest.n_columns);
    for (const auto& t : forest.trees) {
        const Attribution a = brute_force_shapley(t, x, forest.n_columns);
        acc.phi += a.phi;
        acc.base += a.base;
    }
    const auto n = static_cast<Scalar>(forest.trees.size());
    acc.phi /= n;
    acc.base /= n;
    return acc;
}

Vec aggregate_importance(const RegressionForest& forest, const DesignMatrix& design) {
    if (design.rows() == 0) throw std::invalid_argument("aggregate_importance: empty design");
    Vec acc = Vec::Zero(design.cols());
    for (Eigen::Index r = 0; r < design.rows(); ++r) {
        const Attribution a = forest_shap(forest, design.X.row(r).transpose());
        acc += a.phi.cwiseAbs();
    }
    return acc / static_cast<Scalar>(design.rows());
}

}  // namespace lagpath
