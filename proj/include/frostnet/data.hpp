#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "frostnet/array.hpp"

namespace frostnet {

/// N spectral samples [N x D] with binary labels (0 = healthy, 1 = frosted).
struct Dataset {
    NumericArray features;
    std::vector<int> labels;

    std::size_t size() const noexcept { return labels.size(); }
    std::size_t dim() const { return features.rank() == 2 ? features.dim(1) : 0; }
    std::array<std::size_t, 2> class_counts() const;

    /// Throws unless shapes agree, labels are binary and all features are finite.
    void validate() const;
    /// Rows at `indices`, in that order.
    Dataset subset(std::span<const std::size_t> indices) const;

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Rows of a [N x D] array at `indices`.
NumericArray gather_rows(const NumericArray& rows, std::span<const std::size_t> indices);

// CSV: optional header row (band_0,...,band_{D-1},label), label in the last column.
// Values are written in shortest round-trip form so save/load preserves every bit.
Dataset load_csv(const std::filesystem::path& path);
void save_csv(const Dataset& dataset, const std::filesystem::path& path);

/// A smooth bump added to a class's base spectrum. Center and width are fractions of the
/// band range; amplitude is per class, in reflectance units.
struct SignatureBump {
    double center = 0.5;
    double width = 0.05;
    std::array<double, 2> amplitude{0.0, 0.0};
};

/// Parameters of the synthetic spectra generator.
struct SynthSpec {
    std::array<std::size_t, 2> n_per_class{940, 60};
    std::size_t dim = 2151;
    std::vector<SignatureBump> bumps{
        {0.22, 0.030, {0.0, -0.018}},
        {0.47, 0.050, {0.0, 0.022}},
        {0.78, 0.040, {0.0, -0.018}},
    };
    /// Standard deviation of the additive band-correlated noise. Also scales the per-sample
    /// brightness jitter, so 0 makes every sample of a class identical.
    double noise_scale = 0.03;
    /// Correlation length of the additive noise as a fraction of the band range.
    double smoothness = 0.01;
    /// Relative brightness jitter per unit of noise_scale.
    double gain_jitter = 1.0;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Per-class base spectrum (shared vegetation-like curve plus the class's bumps) plus
/// correlated Gaussian noise. Class 0 rows come first. Deterministic in spec.seed.
Dataset synth_generate(const SynthSpec& spec);

struct Split {
    Dataset train;
    Dataset test;
};

/// Per class, floor(count * train_fraction) shuffled rows go to train and the rest to test.
/// Both halves keep the input's row order.
Split stratified_split(const Dataset& dataset, double train_fraction, std::uint64_t seed);

/// Appends whole copies of minority rows, cycling in order, until
/// majority / minority <= max_ratio.
Dataset replicate_minority(const Dataset& train, double max_ratio);

/// Shuffled index batches covering [0, n) once; keyed by (seed, epoch). The last batch may
/// be partial.
std::vector<std::vector<std::size_t>> batch_iter(std::size_t n, std::size_t batch_size,
                                                 std::uint64_t seed, std::size_t epoch);

/// Per-band z-score with statistics from a reference set. Constant bands get scale 1.
struct Standardizer {
    NumericArray mean;
    NumericArray scale;

    static Standardizer fit(const NumericArray& features);
    NumericArray apply(const NumericArray& features) const;
    Dataset apply(const Dataset& dataset) const;
};

}  // namespace frostnet
