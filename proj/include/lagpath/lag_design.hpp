#pragma once

// Per-target supervised-learning table: rows are times t = max(L)+1 .. K,
// inputs are every feature at every lag (feature-major, lag-minor), the
// target's own lags included.

#include <lagpath/series.hpp>

#include <vector>

namespace lagpath {

struct LagSpec {
    std::vector<int> lags;  // strictly increasing, all >= 1

    void validate() const;
    int max_lag() const { return lags.back(); }
};

struct ColumnKey {
    std::string source;
    int lag = 0;

    auto operator<=>(const ColumnKey&) const = default;
};

struct DesignMatrix {
    std::vector<ColumnKey> columns;
    Mat X;                     // rows x columns
    Vec y;                     // rows
    std::string target;
    std::vector<int> times;    // 1-based t of each row

    Eigen::Index rows() const { return X.rows(); }
    Eigen::Index cols() const { return X.cols(); }
};

// X[r][c] = collection[column c's feature][t_r - lag_c], y[r] = target[t_r].
DesignMatrix build_design(const FeatureCollection& collection, const LagSpec& lags,
                          const std::string& target);

}  // namespace lagpath
