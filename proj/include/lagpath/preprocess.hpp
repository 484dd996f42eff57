#pragma once

// Preprocessing: spatial averaging of gridded data, counterfactual
// differencing, min-max normalization, and windowing.  The pipeline applies
// them in the order difference -> window -> normalize.

#include <lagpath/series.hpp>

namespace lagpath {

// Per-(band, variable) mean over cells, optionally cosine-latitude weighted.
// Output features are named "<Band>_<Variable>"; an empty band is an error.
FeatureCollection zonal_average(const GridCollection& grid, const BandSpec& bands,
                                bool area_weighted = false);

// Degenerate single-band [-90, 90] case; output names "Globe_<Variable>".
FeatureCollection global_average(const GridCollection& grid, bool area_weighted = false);

// Member-wise, feature-wise forced - counterfactual; members paired by index.
EnsembleSet counterfactual_difference(const EnsembleSet& forced,
                                      const EnsembleSet& counterfactual);

// x' = 2(x - min)/(max - min) - 1 per feature; constant features map to zeros.
FeatureCollection normalize_minmax(const FeatureCollection& collection);

// Truncate every feature to [start, start+length); start is 1-based.
FeatureCollection window(const FeatureCollection& collection, Eigen::Index start,
                         Eigen::Index length);

}  // namespace lagpath
