#include "frostnet/data.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace frostnet {

std::array<std::size_t, 2> Dataset::class_counts() const {
    std::array<std::size_t, 2> counts{0, 0};
    for (int y : labels) {
        if (y != 0 && y != 1) throw std::invalid_argument("dataset label " + std::to_string(y) + " is not 0 or 1");
        counts[static_cast<std::size_t>(y)]++;
    }
    return counts;
}

void Dataset::validate() const {
    require_rank(features, 2, "dataset features");
    if (features.dim(0) != labels.size())
        throw std::invalid_argument("dataset has " + std::to_string(features.dim(0)) +
                                    " feature rows but " + std::to_string(labels.size()) +
                                    " labels");
    class_counts();
    require_finite(features, "dataset features");
}

NumericArray gather_rows(const NumericArray& rows, std::span<const std::size_t> indices) {
    require_rank(rows, 2, "gather_rows");
    const std::size_t d = rows.dim(1);
    std::vector<double> out;
    out.reserve(indices.size() * d);
    for (std::size_t idx : indices) {
        if (idx >= rows.dim(0)) throw std::out_of_range("gather_rows: row " + std::to_string(idx) + " out of range");
        const double* src = rows.data() + idx * d;
        out.insert(out.end(), src, src + d);
    }
    return NumericArray({indices.size(), d}, std::move(out));
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
    Dataset out;
    out.features = gather_rows(features, indices);
    out.labels.reserve(indices.size());
    for (std::size_t idx : indices) out.labels.push_back(labels[idx]);
    return out;
}

Split stratified_split(const Dataset& dataset, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument("stratified_split: train fraction " +
                                    std::to_string(train_fraction) + " is outside (0, 1)");
    dataset.validate();

    std::array<std::vector<std::size_t>, 2> by_class;
    for (std::size_t i = 0; i < dataset.size(); ++i)
        by_class[static_cast<std::size_t>(dataset.labels[i])].push_back(i);

    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t c = 0; c < 2; ++c) {
        auto& idx = by_class[c];
        if (idx.size() < 2)
            throw std::invalid_argument("stratified_split: class " + std::to_string(c) +
                                        " has " + std::to_string(idx.size()) +
                                        " samples, need at least 2");
        // The epsilon keeps products such as 940 * 0.7 from rounding down to 657.
        const auto n_train = static_cast<std::size_t>(
            std::floor(static_cast<double>(idx.size()) * train_fraction + 1e-9));
        if (n_train == 0 || n_train >= idx.size())
            throw std::invalid_argument("stratified_split: fraction " +
                                        std::to_string(train_fraction) + " leaves class " +
                                        std::to_string(c) + " with an empty side");
        std::seed_seq seq{seed, std::uint64_t{c}, std::uint64_t{0x5b11}};
        std::mt19937_64 rng(seq);
        std::shuffle(idx.begin(), idx.end(), rng);
        train_idx.insert(train_idx.end(), idx.begin(), idx.begin() + static_cast<long>(n_train));
        test_idx.insert(test_idx.end(), idx.begin() + static_cast<long>(n_train), idx.end());
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());
    return {dataset.subset(train_idx), dataset.subset(test_idx)};
}

Dataset replicate_minority(const Dataset& train, double max_ratio) {
    if (!(max_ratio >= 1.0)) throw std::invalid_argument("replicate_minority: max_ratio must be >= 1");
    const auto counts = train.class_counts();
    if (counts[0] == 0 || counts[1] == 0)
        throw std::invalid_argument("replicate_minority: both classes must be present");
    const int minority = counts[1] < counts[0] ? 1 : 0;
    const std::size_t n_min = counts[static_cast<std::size_t>(minority)];
    const std::size_t n_maj = counts[static_cast<std::size_t>(1 - minority)];
    const auto target = static_cast<std::size_t>(std::ceil(static_cast<double>(n_maj) / max_ratio));
    if (n_min >= target) return train;

    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<std::size_t> minority_rows;
    for (std::size_t i = 0; i < train.size(); ++i)
        if (train.labels[i] == minority) minority_rows.push_back(i);
    for (std::size_t k = 0; k < target - n_min; ++k)
        order.push_back(minority_rows[k % minority_rows.size()]);
    return train.subset(order);
}

std::vector<std::vector<std::size_t>> batch_iter(std::size_t n, std::size_t batch_size,
                                                 std::uint64_t seed, std::size_t epoch) {
    if (batch_size == 0) throw std::invalid_argument("batch_iter: batch_size must be positive");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::seed_seq seq{seed, static_cast<std::uint64_t>(epoch), std::uint64_t{0xba7c}};
    std::mt19937_64 rng(seq);
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t start = 0; start < n; start += batch_size) {
        const std::size_t end = std::min(n, start + batch_size);
        batches.emplace_back(order.begin() + static_cast<long>(start),
                             order.begin() + static_cast<long>(end));
    }
    return batches;
}

Standardizer Standardizer::fit(const NumericArray& features) {
    require_rank(features, 2, "Standardizer::fit");
    const std::size_t n = features.dim(0), d = features.dim(1);
    Standardizer s{NumericArray({d}, 0.0), NumericArray({d}, 1.0)};
    for (std::size_t j = 0; j < d; ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += features.at(i, j);
        const double mean = sum / static_cast<double>(n);
        double sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) sq += (features.at(i, j) - mean) * (features.at(i, j) - mean);
        const double sd = std::sqrt(sq / static_cast<double>(n));
        s.mean[j] = mean;
        s.scale[j] = sd > 0.0 ? sd : 1.0;
    }
    return s;
}

NumericArray Standardizer::apply(const NumericArray& features) const {
    require_rank(features, 2, "Standardizer::apply");
    if (features.dim(1) != mean.size())
        throw std::invalid_argument("standardizer fitted on " + std::to_string(mean.size()) +
                                    " bands, data has " + std::to_string(features.dim(1)));
    NumericArray out = features;
    for (std::size_t i = 0; i < features.dim(0); ++i)
        for (std::size_t j = 0; j < features.dim(1); ++j)
            out.at(i, j) = (features.at(i, j) - mean[j]) / scale[j];
    return out;
}

Dataset Standardizer::apply(const Dataset& dataset) const {
    return {apply(dataset.features), dataset.labels};
}

}  // namespace frostnet
