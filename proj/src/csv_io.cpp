#include <lagpath/csv_io.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

namespace lagpath {

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

[[noreturn]] void fail(const std::string& origin, std::size_t line, const std::string& msg) {
    throw IngestError(origin + ":" + std::to_string(line) + ": " + msg);
}

std::vector<std::string> split_csv(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t comma = line.find(',', pos);
        if (comma == std::string::npos) {
            out.push_back(line.substr(pos));
            return out;
        }
        out.push_back(line.substr(pos, comma - pos));
        pos = comma + 1;
    }
}

double parse_double(const std::string& tok, const std::string& origin, std::size_t line) {
    if (tok.empty()) fail(origin, line, "empty numeric field");
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size()) fail(origin, line, "malformed number '" + tok + "'");
    if (!std::isfinite(v)) fail(origin, line, "non-finite value '" + tok + "'");
    return v;
}

long parse_int(const std::string& tok, const std::string& origin, std::size_t line) {
    if (tok.empty()) fail(origin, line, "empty integer field");
    char* end = nullptr;
    const long v = std::strtol(tok.c_str(), &end, 10);
    if (end != tok.c_str() + tok.size()) fail(origin, line, "malformed integer '" + tok + "'");
    return v;
}

void expect_header(std::istream& in, const std::string& want, const std::string& origin) {
    std::string line;
    if (!std::getline(in, line)) fail(origin, 1, "empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != want) fail(origin, 1, "expected header '" + want + "', got '" + line + "'");
}

// Values keyed by t, assembled into a dense series once complete.
Vec assemble_series(const std::map<long, double>& by_t, const std::string& what,
                    const std::string& origin) {
    if (by_t.empty()) throw IngestError(origin + ": no rows for " + what);
    const long k = by_t.rbegin()->first;
    if (by_t.begin()->first != 1 || static_cast<long>(by_t.size()) != k)
        throw IngestError(origin + ": " + what + " has gaps in t (expected 1.." +
                          std::to_string(k) + ")");
    Vec v(k);
    for (const auto& [t, val] : by_t) v[t - 1] = val;
    return v;
}

}  // namespace

EnsembleSet load_ensemble_csv(std::istream& in, const std::string& origin) {
    expect_header(in, "ensemble,feature,t,value", origin);

    std::map<long, std::map<std::string, std::map<long, double>>> data;  // ens -> feat -> t -> v
    std::vector<std::string> feature_order;
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto f = split_csv(line);
        if (f.size() != 4) fail(origin, lineno, "expected 4 fields, got " + std::to_string(f.size()));
        const long ens = parse_int(f[0], origin, lineno);
        if (ens < 1) fail(origin, lineno, "ensemble id must be >= 1");
        if (f[1].empty()) fail(origin, lineno, "empty feature name");
        const long t = parse_int(f[2], origin, lineno);
        if (t < 1) fail(origin, lineno, "t must be >= 1");
        const double v = parse_double(f[3], origin, lineno);
        auto& series = data[ens][f[1]];
        if (!series.emplace(t, v).second)
            fail(origin, lineno, "duplicate key (ensemble=" + f[0] + ", feature=" + f[1] +
                                     ", t=" + f[2] + ")");
        if (std::find(feature_order.begin(), feature_order.end(), f[1]) == feature_order.end())
            feature_order.push_back(f[1]);
    }
    if (data.empty()) throw IngestError(origin + ": no data rows");

    EnsembleSet out;
    for (const auto& [ens, feats] : data) {
        FeatureCollection fc;
        for (const auto& name : feature_order) {
            const auto it = feats.find(name);
            if (it == feats.end())
                throw IngestError(origin + ": ensemble " + std::to_string(ens) +
                                  " is missing feature " + name);
            fc.features.push_back({name, assemble_series(it->second, "feature " + name, origin)});
        }
        out.members.push_back(std::move(fc));
    }
    out.validate();
    return out;
}

EnsembleSet load_ensemble_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open " + path);
    return load_ensemble_csv(in, path);
}

std::vector<GridCollection> load_grid_csv(std::istream& in, const std::string& origin) {
    expect_header(in, "ensemble,variable,lat,lon,t,value", origin);

    using CellKey = std::tuple<double, double, std::string>;
    std::map<long, std::map<CellKey, std::map<long, double>>> data;
    std::vector<CellKey> cell_order;
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto f = split_csv(line);
        if (f.size() != 6) fail(origin, lineno, "expected 6 fields, got " + std::to_string(f.size()));
        const long ens = parse_int(f[0], origin, lineno);
        if (ens < 1) fail(origin, lineno, "ensemble id must be >= 1");
        if (f[1].empty()) fail(origin, lineno, "empty variable name");
        const double lat = parse_double(f[2], origin, lineno);
        const double lon = parse_double(f[3], origin, lineno);
        const long t = parse_int(f[4], origin, lineno);
        if (t < 1) fail(origin, lineno, "t must be >= 1");
        const double v = parse_double(f[5], origin, lineno);
        const CellKey key{lat, lon, f[1]};
        auto& series = data[ens][key];
        if (!series.emplace(t, v).second) fail(origin, lineno, "duplicate grid row");
        if (std::find(cell_order.begin(), cell_order.end(), key) == cell_order.end())
            cell_order.push_back(key);
    }
    if (data.empty()) throw IngestError(origin + ": no data rows");

    std::vector<GridCollection> out;
    for (const auto& [ens, cells] : data) {
        GridCollection gc;
        for (const auto& key : cell_order) {
            const auto it = cells.find(key);
            if (it == cells.end())
                throw IngestError(origin + ": ensemble " + std::to_string(ens) +
                                  " is missing a grid cell present in another member");
            const auto& [lat, lon, var] = key;
            gc.cells.push_back({lat, lon, var, assemble_series(it->second, "cell", origin)});
        }
        gc.validate();
        out.push_back(std::move(gc));
    }
    return out;
}

std::vector<GridCollection> load_grid_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open " + path);
    return load_grid_csv(in, path);
}

void save_ensemble_csv(const EnsembleSet& set, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IngestError("cannot write " + path);
    out << "ensemble,feature,t,value\n";
    for (std::size_t r = 0; r < set.members.size(); ++r)
        for (const auto& f : set.members[r].features)
            for (Eigen::Index t = 0; t < f.values.size(); ++t)
                out << (r + 1) << ',' << f.name << ',' << (t + 1) << ','
                    << format_g17(f.values[t]) << '\n';
}

}  // namespace lagpath
