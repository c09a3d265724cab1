#include "frostnet/metrics.hpp"

#include <stdexcept>
#include <string>

namespace frostnet {
namespace {

double ratio_or_zero(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

void require_binary(int label, std::size_t row, const char* what) {
    if (label != 0 && label != 1)
        throw std::invalid_argument(std::string(what) + " label " + std::to_string(label) +
                                    " at position " + std::to_string(row) + " is not 0 or 1");
}

}  // namespace

std::vector<int> predict_labels(const NumericArray& probabilities) {
    require_rank(probabilities, 2, "predict_labels");
    if (probabilities.dim(1) != 2)
        throw std::invalid_argument("predict_labels: expected 2 class columns, got " +
                                    std::to_string(probabilities.dim(1)));
    std::vector<int> labels(probabilities.dim(0));
    for (std::size_t i = 0; i < labels.size(); ++i)
        labels[i] = probabilities.at(i, 1) > probabilities.at(i, 0) ? 1 : 0;
    return labels;
}

ConfusionMatrix confusion(std::span<const int> predicted, std::span<const int> actual) {
    if (predicted.size() != actual.size())
        throw std::invalid_argument("confusion: " + std::to_string(predicted.size()) +
                                    " predictions for " + std::to_string(actual.size()) + " labels");
    if (predicted.empty()) throw std::invalid_argument("confusion: no samples");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        require_binary(predicted[i], i, "predicted");
        require_binary(actual[i], i, "actual");
        if (actual[i] == 0)
            (predicted[i] == 0 ? cm.n00 : cm.n01)++;
        else
            (predicted[i] == 0 ? cm.n10 : cm.n11)++;
    }
    return cm;
}

double accuracy(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw std::invalid_argument("accuracy: empty confusion matrix");
    return static_cast<double>(cm.n00 + cm.n11) / static_cast<double>(cm.total());
}

PrecisionRecallF1 precision_recall_f1(const ConfusionMatrix& cm) {
    PrecisionRecallF1 m;
    const auto tp = static_cast<double>(cm.n11);
    m.precision = ratio_or_zero(tp, tp + static_cast<double>(cm.n01));
    m.recall = ratio_or_zero(tp, tp + static_cast<double>(cm.n10));
    m.f1 = ratio_or_zero(2.0 * m.precision * m.recall, m.precision + m.recall);
    return m;
}

}  // namespace frostnet
