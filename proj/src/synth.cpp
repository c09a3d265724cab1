#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "frostnet/data.hpp"

namespace frostnet {
namespace {

double gaussian_bump(double x, double center, double width) {
    const double z = (x - center) / width;
    return std::exp(-0.5 * z * z);
}

// Green-vegetation-like reflectance: low visible plateau, a red edge, a near-infrared
// plateau and two water absorption dips.
double base_reflectance(double x) {
    const double red_edge = 1.0 / (1.0 + std::exp(-(x - 0.30) / 0.02));
    return 0.05 + 0.40 * red_edge - 0.15 * gaussian_bump(x, 0.62, 0.03) -
           0.20 * gaussian_bump(x, 0.86, 0.04) + 0.03 * gaussian_bump(x, 0.17, 0.03);
}

}  // namespace

void SynthSpec::validate() const {
    if (n_per_class[0] == 0 || n_per_class[1] == 0)
        throw std::invalid_argument("synth: every class needs at least one sample");
    if (dim < 2) throw std::invalid_argument("synth: dim must be at least 2");
    if (!(noise_scale >= 0.0)) throw std::invalid_argument("synth: noise_scale must be >= 0");
    if (!(smoothness > 0.0)) throw std::invalid_argument("synth: smoothness must be positive");
    if (!(gain_jitter >= 0.0)) throw std::invalid_argument("synth: gain_jitter must be >= 0");
    for (const auto& bump : bumps)
        if (!(bump.width > 0.0)) throw std::invalid_argument("synth: bump width must be positive");
}

Dataset synth_generate(const SynthSpec& spec) {
    spec.validate();
    const std::size_t d = spec.dim;

    std::array<std::vector<double>, 2> profile;
    for (std::size_t c = 0; c < 2; ++c) {
        profile[c].resize(d);
        for (std::size_t j = 0; j < d; ++j) {
            const double x = static_cast<double>(j) / static_cast<double>(d - 1);
            double v = base_reflectance(x);
            for (const auto& bump : spec.bumps)
                v += bump.amplitude[c] * gaussian_bump(x, bump.center, bump.width);
            profile[c][j] = v;
        }
    }

    // AR(1) noise with unit marginal variance and the requested correlation length.
    const double corr_bands = spec.smoothness * static_cast<double>(d - 1);
    const double rho = std::exp(-1.0 / corr_bands);
    const double innovation = std::sqrt(1.0 - rho * rho);

    const std::size_t n = spec.n_per_class[0] + spec.n_per_class[1];
    Dataset ds{NumericArray({n, d}), std::vector<int>(n)};
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::size_t row = 0;
    for (std::size_t c = 0; c < 2; ++c) {
        for (std::size_t i = 0; i < spec.n_per_class[c]; ++i, ++row) {
            ds.labels[row] = static_cast<int>(c);
            const double gain = 1.0 + spec.noise_scale * spec.gain_jitter * normal(rng);
            double e = normal(rng);
            for (std::size_t j = 0; j < d; ++j) {
                if (j > 0) e = rho * e + innovation * normal(rng);
                ds.features.at(row, j) = gain * profile[c][j] + spec.noise_scale * e;
            }
        }
    }
    return ds;
}

}  // namespace frostnet
