#pragma once

// Coupled synthetic benchmark: four AR-style recurrences driven by
// independent uniform noise, generated per ensemble member from derived
// seeds.
//
//   W_t = 0.9 W_{t-1} + eW;   X_t = 0.8 X_{t-1} + 0.5 W_{t-1} + eX
//   Y_t = -0.9 W_{t-1} + eY;  Z_t = 0.6 X_{t-1} + 0.5 Y_{t-1} + eZ
//
// e ~ U[-h, h]; the t=1 value of each series is a pure noise draw.

#include <lagpath/series.hpp>

#include <cstdint>

namespace lagpath {

struct SynthConfig {
    int n_ensembles = 5;
    Eigen::Index length = 750;
    std::uint64_t seed = 0;
    double noise_half_width = 0.5;

    void validate() const;
};

// Member r draws from the stream seeded with derive_seed(seed, {"synth", r});
// per step the noise draws happen in the fixed order (W, X, Y, Z).
EnsembleSet generate_synthetic(const SynthConfig& config);

// The uniform stream feeding generate_synthetic, exposed for testing.
Vec noise_stream(std::uint64_t seed, Eigen::Index count, double half_width);

}  // namespace lagpath
