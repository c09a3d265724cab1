#include "frostnet/loss.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace frostnet {
namespace {

double clamp_probability(double p) {
    return std::clamp(p, kProbabilityFloor, 1.0 - kProbabilityFloor);
}

void check_batch(std::span<const double> probs, std::span<const int> labels, const char* what) {
    if (probs.empty()) throw std::invalid_argument(std::string(what) + ": empty batch");
    if (probs.size() != labels.size())
        throw std::invalid_argument(std::string(what) + ": " + std::to_string(probs.size()) +
                                    " probabilities for " + std::to_string(labels.size()) +
                                    " labels");
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] != 0 && labels[i] != 1)
            throw std::invalid_argument(std::string(what) + ": label " +
                                        std::to_string(labels[i]) + " at position " +
                                        std::to_string(i) + " is not 0 or 1");
}

double log_likelihood(double p, int y) {
    const double q = clamp_probability(p);
    return y * std::log(q) + (1 - y) * std::log(1.0 - q);
}

void check_logit_batch(const NumericArray& probabilities, std::span<const int> labels,
                       const char* what) {
    require_rank(probabilities, 2, what);
    if (probabilities.dim(1) != 2 || probabilities.dim(0) != labels.size())
        throw std::invalid_argument(std::string(what) + ": probabilities " +
                                    shape_to_string(probabilities.shape()) + " for " +
                                    std::to_string(labels.size()) + " labels");
    if (labels.empty()) throw std::invalid_argument(std::string(what) + ": empty batch");
}

NumericArray weighted_logit_gradient(const NumericArray& probabilities,
                                     std::span<const int> labels, const ClassPair* w) {
    const std::size_t n = labels.size();
    const double inv_n = 1.0 / static_cast<double>(n);
    NumericArray grad(probabilities.shape());
    for (std::size_t i = 0; i < n; ++i) {
        const int y = labels[i];
        if (y != 0 && y != 1)
            throw std::invalid_argument("logit gradient: label " + std::to_string(y) +
                                        " at position " + std::to_string(i) + " is not 0 or 1");
        for (int c = 0; c < 2; ++c) {
            const double g = (probabilities.at(i, c) - (c == y ? 1.0 : 0.0)) * inv_n;
            grad.at(i, c) = w ? (*w)[y] * g : g;
        }
    }
    return grad;
}

}  // namespace

void CostMatrix::validate() const {
    if (c00 != 0.0 || c11 != 0.0)
        throw std::invalid_argument("cost matrix: correct classifications must cost 0");
    if (c01 < 0.0 || c10 < 0.0)
        throw std::invalid_argument("cost matrix: costs must be non-negative");
    if (c10 < c01)
        throw std::invalid_argument("cost matrix: missing a positive (c10) must cost at least as "
                                    "much as a false alarm (c01)");
}

double CostMatrix::at(int i, int j) const {
    if (i < 0 || i > 1 || j < 0 || j > 1)
        throw std::out_of_range("cost matrix index out of range");
    if (i == 0) return j == 0 ? c00 : c01;
    return j == 0 ? c10 : c11;
}

CostWeights CostWeights::make(const ClassPair& alpha, const ClassPair& r, double c) {
    if (r[0] != 0.0) throw std::invalid_argument("cost weights: R_0 must be 0");
    if (!(r[1] >= 0.0 && r[1] <= 1.0))
        throw std::invalid_argument("cost weights: R_1 = " + std::to_string(r[1]) +
                                    " is outside [0, 1]");
    if (!(alpha[0] > 0.0 && alpha[1] > 0.0))
        throw std::invalid_argument("cost weights: alpha must be positive");
    CostWeights weights;
    weights.alpha = alpha;
    weights.r = r;
    weights.w = cost_weights(alpha, r);
    weights.c = c;
    return weights;
}

CostWeights CostWeights::uniform() { return make({1.0, 1.0}, {0.0, 0.0}); }

std::vector<double> compute_alpha(std::span<const std::size_t> class_counts, double c) {
    if (!(c > 0.0)) throw std::invalid_argument("compute_alpha: c must be positive");
    if (class_counts.empty()) throw std::invalid_argument("compute_alpha: no classes");
    const double total = static_cast<double>(
        std::accumulate(class_counts.begin(), class_counts.end(), std::size_t{0}));
    std::vector<double> alpha;
    alpha.reserve(class_counts.size());
    for (std::size_t i = 0; i < class_counts.size(); ++i) {
        if (class_counts[i] == 0)
            throw std::invalid_argument("compute_alpha: class " + std::to_string(i) +
                                        " has no samples");
        alpha.push_back(total / (c * static_cast<double>(class_counts[i])));
    }
    return alpha;
}

ClassPair initial_r() { return {0.0, 1.0}; }

ClassPair update_r(const ConfusionMatrix& cm, const ClassPair& previous) {
    const std::uint64_t positives = cm.n11 + cm.n10;
    if (positives == 0) return {0.0, previous[1]};
    return {0.0, static_cast<double>(cm.n10) / static_cast<double>(positives)};
}

ClassPair cost_weights(const ClassPair& alpha, const ClassPair& r) {
    return {alpha[0] * std::exp(r[0]), alpha[1] * std::exp(r[1])};
}

double cross_entropy(std::span<const double> probs, std::span<const int> labels) {
    check_batch(probs, labels, "cross_entropy");
    double sum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) sum += log_likelihood(probs[i], labels[i]);
    return -sum / static_cast<double>(probs.size());
}

LossResult csbl_loss(std::span<const double> probs, std::span<const int> labels,
                     const CostWeights& weights) {
    check_batch(probs, labels, "csbl_loss");
    const double n = static_cast<double>(probs.size());
    LossResult result;
    result.d_prob.resize(probs.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const int y = labels[i];
        const double w = weights.w[y];
        sum += w * log_likelihood(probs[i], y);
        const double q = clamp_probability(probs[i]);
        result.d_prob[i] = w * (q - y) / (q * (1.0 - q)) / n;
    }
    result.value = -sum / n;
    return result;
}

NumericArray cross_entropy_logit_gradient(const NumericArray& probabilities,
                                          std::span<const int> labels) {
    check_logit_batch(probabilities, labels, "cross_entropy_logit_gradient");
    return weighted_logit_gradient(probabilities, labels, nullptr);
}

NumericArray csbl_logit_gradient(const NumericArray& probabilities, std::span<const int> labels,
                                 const CostWeights& weights) {
    check_logit_batch(probabilities, labels, "csbl_logit_gradient");
    return weighted_logit_gradient(probabilities, labels, &weights.w);
}

std::vector<double> positive_probabilities(const NumericArray& probabilities) {
    require_rank(probabilities, 2, "positive_probabilities");
    if (probabilities.dim(1) != 2)
        throw std::invalid_argument("positive_probabilities: expected 2 class columns");
    std::vector<double> out(probabilities.dim(0));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = probabilities.at(i, 1);
    return out;
}

double expected_cost(std::span<const double> posterior, const CostMatrix& cm, int assigned_class) {
    if (posterior.size() != 2)
        throw std::invalid_argument("expected_cost: binary posterior required");
    if (assigned_class != 0 && assigned_class != 1)
        throw std::invalid_argument("expected_cost: assigned class must be 0 or 1");
    double cost = 0.0;
    for (int j = 0; j < 2; ++j)
        if (j != assigned_class) cost += posterior[j] * cm.at(assigned_class, j);
    return cost;
}

}  // namespace frostnet
