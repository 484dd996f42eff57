#pragma once

// Core time-series data model: named features, per-member collections,
// ensembles, gridded inputs, and latitude-band specifications.

#include <lagpath/types.hpp>

#include <cmath>
#include <string>
#include <vector>

namespace lagpath {

struct FeatureSeries {
    std::string name;
    Vec values;
};

// Ordered set of equally long, uniquely named series (one ensemble member).
struct FeatureCollection {
    std::vector<FeatureSeries> features;

    Eigen::Index length() const { return features.empty() ? 0 : features.front().values.size(); }
    Eigen::Index feature_count() const { return static_cast<Eigen::Index>(features.size()); }

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        out.reserve(features.size());
        for (const auto& f : features) out.push_back(f.name);
        return out;
    }

    const FeatureSeries* find(const std::string& name) const {
        for (const auto& f : features)
            if (f.name == name) return &f;
        return nullptr;
    }

    // Throws IngestError on ragged lengths, duplicate/empty names, non-finite values.
    void validate() const;
};

struct EnsembleSet {
    std::vector<FeatureCollection> members;

    std::size_t size() const { return members.size(); }

    // Throws IngestError unless all members validate and share names/lengths.
    void validate() const;
};

// One gridded variable sample: series of length K at a (lat, lon) cell.
struct GridCell {
    double lat = 0.0;   // degrees, [-90, 90]
    double lon = 0.0;   // degrees, [-180, 180)
    std::string variable;
    Vec values;
};

struct GridCollection {
    std::vector<GridCell> cells;

    Eigen::Index length() const { return cells.empty() ? 0 : cells.front().values.size(); }
    void validate() const;
};

struct Band {
    std::string name;
    double lat_min = 0.0;  // inclusive
    double lat_max = 0.0;  // exclusive, except the topmost band (inclusive)
};

// Non-overlapping, sorted bands jointly covering the requested range.
struct BandSpec {
    std::vector<Band> bands;

    void validate() const;

    // Index of the band containing lat, or -1.  Intervals are
    // lower-inclusive / upper-exclusive; the topmost band closes at its
    // upper edge.
    int band_of(double lat) const {
        for (std::size_t b = 0; b < bands.size(); ++b) {
            const bool topmost = (b + 1 == bands.size());
            if (lat >= bands[b].lat_min &&
                (lat < bands[b].lat_max || (topmost && lat == bands[b].lat_max)))
                return static_cast<int>(b);
        }
        return -1;
    }
};

}  // namespace lagpath
