#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "frostnet/array.hpp"

namespace frostnet {

/// n_ij counts samples of true class i predicted as class j. Class 1 (frosted) is positive.
struct ConfusionMatrix {
    std::uint64_t n00 = 0;
    std::uint64_t n01 = 0;
    std::uint64_t n10 = 0;
    std::uint64_t n11 = 0;

    std::uint64_t total() const noexcept { return n00 + n01 + n10 + n11; }
    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

struct PrecisionRecallF1 {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Argmax over the two class columns of [N x 2] probabilities; exact ties predict class 0.
std::vector<int> predict_labels(const NumericArray& probabilities);

ConfusionMatrix confusion(std::span<const int> predicted, std::span<const int> actual);

/// (n00 + n11) / total. Throws on an empty matrix.
double accuracy(const ConfusionMatrix& cm);

/// Precision n11/(n11+n01), recall n11/(n11+n10), F1 their harmonic mean.
/// Any 0/0 ratio is reported as 0.
PrecisionRecallF1 precision_recall_f1(const ConfusionMatrix& cm);

}  // namespace frostnet
