#include <lagpath/synth.hpp>

#include <lagpath/rng.hpp>

namespace lagpath {

void SynthConfig::validate() const {
    if (n_ensembles < 1) throw ConfigError("synth: n_ensembles must be >= 1");
    if (length < 2) throw ConfigError("synth: length must be >= 2");
    if (noise_half_width < 0.0) throw ConfigError("synth: noise_half_width must be >= 0");
}

Vec noise_stream(std::uint64_t seed, Eigen::Index count, double half_width) {
    rng::Xoshiro256pp gen(seed);
    Vec out(count);
    for (Eigen::Index i = 0; i < count; ++i) out[i] = gen.uniform(-half_width, half_width);
    return out;
}

EnsembleSet generate_synthetic(const SynthConfig& config) {
    config.validate();
    const Eigen::Index k = config.length;
    const double h = config.noise_half_width;

    EnsembleSet set;
    for (int r = 0; r < config.n_ensembles; ++r) {
        rng::Xoshiro256pp gen(rng::derive_seed(
            config.seed, {rng::hash_str("synth"), static_cast<std::uint64_t>(r)}));
        Vec w(k), x(k), y(k), z(k);
        for (Eigen::Index t = 0; t < k; ++t) {
            const double ew = gen.uniform(-h, h);
            const double ex = gen.uniform(-h, h);
            const double ey = gen.uniform(-h, h);
            const double ez = gen.uniform(-h, h);
            if (t == 0) {
                w[0] = ew;
                x[0] = ex;
                y[0] = ey;
                z[0] = ez;
            } else {
                w[t] = 0.9 * w[t - 1] + ew;
                x[t] = 0.8 * x[t - 1] + 0.5 * w[t - 1] + ex;
                y[t] = -0.9 * w[t - 1] + ey;
                z[t] = 0.6 * x[t - 1] + 0.5 * y[t - 1] + ez;
            }
        }
        FeatureCollection fc;
        fc.features = {{"W", std::move(w)}, {"X", std::move(x)}, {"Y", std::move(y)},
                       {"Z", std::move(z)}};
        set.members.push_back(std::move(fc));
    }
    return set;
}

}  // namespace lagpath
