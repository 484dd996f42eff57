#include <lagpath/lag_design.hpp>

namespace lagpath {

void LagSpec::validate() const {
    if (lags.empty()) throw ConfigError("lag set is empty");
    int prev = 0;
    for (int l : lags) {
        if (l <= prev) throw ConfigError("lags must be strictly increasing positive integers");
        prev = l;
    }
}

DesignMatrix build_design(const FeatureCollection& collection, const LagSpec& lags,
                          const std::string& target) {
    lags.validate();
    const FeatureSeries* tgt = collection.find(target);
    if (!tgt) throw ConfigError("target feature not found: " + target);

    const Eigen::Index k = collection.length();
    const int max_lag = lags.max_lag();
    if (k <= max_lag)
        throw ConfigError("series too short for lag set: K=" + std::to_string(k) +
                          " <= max lag " + std::to_string(max_lag));

    DesignMatrix d;
    d.target = target;
    for (const auto& f : collection.features)
        for (int l : lags.lags) d.columns.push_back({f.name, l});

    const Eigen::Index n_rows = k - max_lag;
    d.X.resize(n_rows, static_cast<Eigen::Index>(d.columns.size()));
    d.y.resize(n_rows);
    d.times.resize(n_rows);

    for (Eigen::Index c = 0; c < d.cols(); ++c) {
        const FeatureSeries* src = collection.find(d.columns[c].source);
        const int l = d.columns[c].lag;
        // rows t = max_lag+1 .. K (1-based); X entry is source at t - l.
        d.X.col(c) = src->values.segment(max_lag - l, n_rows);
    }
    d.y = tgt->values.segment(max_lag, n_rows);
    for (Eigen::Index r = 0; r < n_rows; ++r) d.times[r] = static_cast<int>(max_lag + r + 1);
    return d;
}

}  // namespace lagpath
