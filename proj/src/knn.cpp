#include "frostnet/knn.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <utility>

namespace frostnet {

KnnModel knn_fit(const Dataset& train, std::size_t k) {
    train.validate();
    if (k == 0 || k % 2 == 0)
        throw std::invalid_argument("knn: k = " + std::to_string(k) + " must be a positive odd number");
    if (k > train.size())
        throw std::invalid_argument("knn: k = " + std::to_string(k) + " exceeds " +
                                    std::to_string(train.size()) + " training samples");
    return {train.features, train.labels, k};
}

std::vector<int> knn_predict(const KnnModel& model, const NumericArray& queries) {
    require_rank(queries, 2, "knn queries");
    const std::size_t n = model.labels.size(), d = model.features.dim(1);
    if (queries.dim(1) != d)
        throw std::invalid_argument("knn: queries have " + std::to_string(queries.dim(1)) +
                                    " features, model was fitted on " + std::to_string(d));

    std::vector<int> out(queries.dim(0));
    std::vector<std::pair<double, std::size_t>> dist(n);
    for (std::size_t q = 0; q < queries.dim(0); ++q) {
        const double* x = queries.data() + q * d;
        for (std::size_t i = 0; i < n; ++i) {
            const double* t = model.features.data() + i * d;
            double s = 0.0;
            for (std::size_t j = 0; j < d; ++j) s += (x[j] - t[j]) * (x[j] - t[j]);
            dist[i] = {s, i};
        }
        std::partial_sort(dist.begin(), dist.begin() + static_cast<long>(model.k), dist.end());
        std::size_t positive = 0;
        for (std::size_t r = 0; r < model.k; ++r) positive += model.labels[dist[r].second] == 1;
        out[q] = 2 * positive > model.k ? 1 : 0;
    }
    return out;
}

}  // namespace frostnet
