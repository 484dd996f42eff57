#pragma once

// Goodness-of-fit metrics and the fit gate: R2_adj > r2_min (strict) and
// RMSE <= rmse_max (inclusive).

#include <lagpath/types.hpp>

#include <cmath>
#include <stdexcept>
#include <string>

namespace lagpath {

struct FitReport {
    Scalar r2 = 0.0;
    Scalar r2_adj = 0.0;
    Scalar rmse = 0.0;
    Eigen::Index n = 0;  // sample count
    Eigen::Index p = 0;  // predictor count
};

inline Scalar r2(const Vec& y, const Vec& yhat) {
    if (y.size() != yhat.size()) throw std::invalid_argument("r2: length mismatch");
    if (y.size() < 2) throw std::invalid_argument("r2: need at least 2 samples");
    const Scalar mean = y.mean();
    const Scalar ss_tot = (y.array() - mean).square().sum();
    if (ss_tot == 0.0) throw std::domain_error("r2: degenerate variance (constant y)");
    const Scalar ss_res = (y - yhat).squaredNorm();
    return 1.0 - ss_res / ss_tot;
}

inline Scalar r2_adj(const Vec& y, const Vec& yhat, Eigen::Index p) {
    const Eigen::Index n = y.size();
    if (n - p - 1 < 1)
        throw std::invalid_argument("r2_adj: insufficient samples for adjustment (n=" +
                                    std::to_string(n) + ", p=" + std::to_string(p) + ")");
    return 1.0 - (1.0 - r2(y, yhat)) * static_cast<Scalar>(n - 1) /
                     static_cast<Scalar>(n - p - 1);
}

inline Scalar rmse(const Vec& y, const Vec& yhat) {
    if (y.size() != yhat.size()) throw std::invalid_argument("rmse: length mismatch");
    if (y.size() < 1) throw std::invalid_argument("rmse: empty input");
    return std::sqrt((y - yhat).squaredNorm() / static_cast<Scalar>(y.size()));
}

inline FitReport fit_report(const Vec& y, const Vec& yhat, Eigen::Index p) {
    FitReport rep;
    rep.n = y.size();
    rep.p = p;
    rep.r2 = r2(y, yhat);
    rep.r2_adj = r2_adj(y, yhat, p);
    rep.rmse = rmse(y, yhat);
    return rep;
}

inline bool passes_fit_gate(const FitReport& report, Scalar r2_min = 0.75,
                            Scalar rmse_max = 0.15) {
    return report.r2_adj > r2_min && report.rmse <= rmse_max;
}

}  // namespace lagpath
