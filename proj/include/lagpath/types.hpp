#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace lagpath {

using Scalar = double;
using Vec = Eigen::VectorX<Scalar>;
using Mat = Eigen::MatrixX<Scalar>;

// Error taxonomy mirrored by the CLI exit codes (config=2, ingest=3, gate=4).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct IngestError : std::runtime_error {
    explicit IngestError(const std::string& what) : std::runtime_error(what) {}
};

struct GateError : std::runtime_error {
    explicit GateError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace lagpath
