#pragma once

// Long-format CSV ingestion and emission.
//
// Ensemble schema:  ensemble,feature,t,value        (t is a 1-based integer)
// Grid schema:      ensemble,variable,lat,lon,t,value
//
// UTF-8, LF line endings, '.' decimal separator.  Malformed input raises
// IngestError naming the offending line.

#include <lagpath/series.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace lagpath {

EnsembleSet load_ensemble_csv(const std::string& path);
EnsembleSet load_ensemble_csv(std::istream& in, const std::string& origin = "<stream>");

// Members ordered by ensemble id (1-based in the file).
std::vector<GridCollection> load_grid_csv(const std::string& path);
std::vector<GridCollection> load_grid_csv(std::istream& in,
                                          const std::string& origin = "<stream>");

void save_ensemble_csv(const EnsembleSet& set, const std::string& path);

// %.17g — enough significant digits for an exact double round trip.
std::string format_g17(double v);

}  // namespace lagpath
