#pragma once

#include <cstddef>
#include <vector>

#include "frostnet/array.hpp"
#include "frostnet/data.hpp"

namespace frostnet {

/// Brute-force k-nearest-neighbours classifier (Euclidean distance, majority vote).
struct KnnModel {
    NumericArray features;
    std::vector<int> labels;
    std::size_t k = 5;
};

/// Stores the training set. k must be odd, positive and at most the number of samples.
KnnModel knn_fit(const Dataset& train, std::size_t k = 5);

/// Majority label among the k nearest training rows for each query row of [M x D].
/// Equal distances are ordered by training index.
std::vector<int> knn_predict(const KnnModel& model, const NumericArray& queries);

}  // namespace frostnet
