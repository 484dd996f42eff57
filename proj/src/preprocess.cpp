#include <lagpath/preprocess.hpp>

#include <algorithm>
#include <cmath>
#include <iterator>
#include <map>
#include <numbers>
#include <tuple>

namespace lagpath {

void FeatureCollection::validate() const {
    const Eigen::Index k = length();
    std::map<std::string, int> seen;
    for (const auto& f : features) {
        if (f.name.empty()) throw IngestError("feature with empty name");
        if (++seen[f.name] > 1) throw IngestError("duplicate feature name: " + f.name);
        if (f.values.size() != k)
            throw IngestError("ragged lengths: feature " + f.name + " has " +
                              std::to_string(f.values.size()) + " values, expected " +
                              std::to_string(k));
        if (!f.values.allFinite())
            throw IngestError("non-finite value in feature " + f.name);
    }
}

void EnsembleSet::validate() const {
    if (members.empty()) throw IngestError("empty ensemble set");
    const auto names = members.front().names();
    const Eigen::Index k = members.front().length();
    for (std::size_t r = 0; r < members.size(); ++r) {
        members[r].validate();
        if (members[r].names() != names)
            throw IngestError("member " + std::to_string(r + 1) +
                              " feature names differ from member 1");
        if (members[r].length() != k)
            throw IngestError("member " + std::to_string(r + 1) + " length differs");
    }
}

void GridCollection::validate() const {
    const Eigen::Index k = length();
    std::map<std::tuple<double, double, std::string>, int> seen;
    for (const auto& c : cells) {
        if (c.variable.empty()) throw IngestError("grid cell with empty variable name");
        if (c.lat < -90.0 || c.lat > 90.0)
            throw IngestError("latitude out of range: " + std::to_string(c.lat));
        if (c.lon < -180.0 || c.lon >= 180.0)
            throw IngestError("longitude out of range: " + std::to_string(c.lon));
        if (++seen[{c.lat, c.lon, c.variable}] > 1)
            throw IngestError("duplicate grid key (" + std::to_string(c.lat) + ", " +
                              std::to_string(c.lon) + ", " + c.variable + ")");
        if (c.values.size() != k) throw IngestError("ragged grid series lengths");
        if (!c.values.allFinite())
            throw IngestError("non-finite value in grid variable " + c.variable);
    }
}

void BandSpec::validate() const {
    if (bands.empty()) throw ConfigError("empty band specification");
    for (std::size_t b = 0; b < bands.size(); ++b) {
        if (bands[b].name.empty()) throw ConfigError("band with empty name");
        if (!(bands[b].lat_min < bands[b].lat_max))
            throw ConfigError("band " + bands[b].name + " has empty latitude interval");
        if (b > 0 && bands[b].lat_min != bands[b - 1].lat_max)
            throw ConfigError("bands must be sorted and contiguous at " + bands[b].name);
    }
}

FeatureCollection zonal_average(const GridCollection& grid, const BandSpec& bands,
                                bool area_weighted) {
    grid.validate();
    bands.validate();
    const Eigen::Index k = grid.length();

    // Preserve first-appearance variable order for stable output naming.
    std::vector<std::string> variables;
    for (const auto& c : grid.cells)
        if (std::find(variables.begin(), variables.end(), c.variable) == variables.end())
            variables.push_back(c.variable);

    const std::size_t nb = bands.bands.size();
    std::vector<std::vector<Vec>> sums(nb, std::vector<Vec>(variables.size(), Vec::Zero(k)));
    std::vector<std::vector<double>> weights(nb, std::vector<double>(variables.size(), 0.0));

    for (const auto& c : grid.cells) {
        const int b = bands.band_of(c.lat);
        if (b < 0) continue;  // outside the requested latitude range
        const auto v = std::distance(
            variables.begin(), std::find(variables.begin(), variables.end(), c.variable));
        const double w =
            area_weighted ? std::cos(c.lat * std::numbers::pi / 180.0) : 1.0;
        sums[b][v] += w * c.values;
        weights[b][v] += w;
    }

    FeatureCollection out;
    for (std::size_t b = 0; b < nb; ++b)
        for (std::size_t v = 0; v < variables.size(); ++v) {
            if (weights[b][v] == 0.0)
                throw IngestError("band " + bands.bands[b].name + " contains no cells for " +
                                  variables[v]);
            out.features.push_back(
                {bands.bands[b].name + "_" + variables[v], sums[b][v] / weights[b][v]});
        }
    return out;
}

FeatureCollection global_average(const GridCollection& grid, bool area_weighted) {
    return zonal_average(grid, BandSpec{{{"Globe", -90.0, 90.0}}}, area_weighted);
}

EnsembleSet counterfactual_difference(const EnsembleSet& forced,
                                      const EnsembleSet& counterfactual) {
    forced.validate();
    counterfactual.validate();
    if (forced.size() != counterfactual.size())
        throw IngestError("ensemble pairing error: " + std::to_string(forced.size()) +
                          " forced vs " + std::to_string(counterfactual.size()) +
                          " counterfactual members");
    if (forced.members.front().names() != counterfactual.members.front().names())
        throw IngestError("forced and counterfactual feature names differ");
    if (forced.members.front().length() != counterfactual.members.front().length())
        throw IngestError("forced and counterfactual series lengths differ");

    EnsembleSet out = forced;
    for (std::size_t r = 0; r < out.size(); ++r)
        for (std::size_t i = 0; i < out.members[r].features.size(); ++i)
            out.members[r].features[i].values -=
                counterfactual.members[r].features[i].values;
    return out;
}

FeatureCollection normalize_minmax(const FeatureCollection& collection) {
    FeatureCollection out = collection;
    for (auto& f : out.features) {
        const Scalar lo = f.values.minCoeff();
        const Scalar hi = f.values.maxCoeff();
        if (lo == hi)
            f.values.setZero();
        else
            f.values = (2.0 * (f.values.array() - lo) / (hi - lo) - 1.0).matrix();
    }
    return out;
}

FeatureCollection window(const FeatureCollection& collection, Eigen::Index start,
                         Eigen::Index length) {
    const Eigen::Index k = collection.length();
    if (start < 1 || length < 1 || start + length - 1 > k)
        throw ConfigError("window [" + std::to_string(start) + ", " +
                          std::to_string(start + length - 1) + "] out of range for K=" +
                          std::to_string(k));
    FeatureCollection out = collection;
    for (auto& f : out.features) f.values = f.values.segment(start - 1, length).eval();
    return out;
}

}  // namespace lagpath
