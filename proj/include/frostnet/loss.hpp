#pragma once

// Cost-sensitive binary loss (CSBL).
//
// Each sample's cross-entropy term is scaled by the weight of its true class,
//
//     W_i = alpha_i * exp(R_i),
//
// where alpha_i = (sum_j N_j) / (c * N_i) is a fixed inverse-frequency factor and R_i is an
// adjustment factor: R_0 is always 0, R_1 is the fraction of positive samples the model
// misclassified at the last evaluation, starting from 1 before any evaluation.

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "frostnet/array.hpp"
#include "frostnet/metrics.hpp"

namespace frostnet {

/// Probabilities are clamped to [kProbabilityFloor, 1 - kProbabilityFloor] before any log.
inline constexpr double kProbabilityFloor = 1e-12;

/// C_ij is the cost of classifying a sample of true class i as class j.
struct CostMatrix {
    double c00 = 0.0;
    double c01 = 1.0;
    double c10 = 1.0;
    double c11 = 0.0;

    /// Throws unless the diagonal is zero, costs are non-negative and c10 >= c01.
    void validate() const;
    double at(int i, int j) const;
};

using ClassPair = std::array<double, 2>;

struct CostWeights {
    ClassPair alpha{1.0, 1.0};
    ClassPair r{0.0, 1.0};
    ClassPair w{1.0, 1.0};
    double c = 2.0;

    /// Builds the weights with w = alpha * exp(r). Rejects R_0 != 0 or R_1 outside [0, 1].
    static CostWeights make(const ClassPair& alpha, const ClassPair& r, double c = 2.0);
    /// Every W equal to 1.
    static CostWeights uniform();
};

/// alpha_i = (sum_j N_j) / (c * N_i). Any zero count or non-positive c is rejected.
std::vector<double> compute_alpha(std::span<const std::size_t> class_counts, double c);

/// R before the first evaluation: {0, 1}.
ClassPair initial_r();

/// R_1 = N_10 / (N_11 + N_10), R_0 = 0. With no positive samples in `cm`, R_1 keeps
/// `previous[1]`.
ClassPair update_r(const ConfusionMatrix& cm, const ClassPair& previous = initial_r());

/// W_i = alpha_i * exp(R_i).
ClassPair cost_weights(const ClassPair& alpha, const ClassPair& r);

/// Mean binary cross-entropy. probs[i] is the predicted probability of class 1.
double cross_entropy(std::span<const double> probs, std::span<const int> labels);

struct LossResult {
    double value = 0.0;
    /// d loss / d probs[i].
    std::vector<double> d_prob;
};

/// Cross-entropy with each term scaled by W of the sample's true label.
LossResult csbl_loss(std::span<const double> probs, std::span<const int> labels,
                     const CostWeights& weights);

/// Gradient of mean cross-entropy with respect to softmax logits: (p - onehot(y)) / N.
NumericArray cross_entropy_logit_gradient(const NumericArray& probabilities,
                                          std::span<const int> labels);
/// Gradient of the CSBL with respect to softmax logits: W_{y_i} * (p - onehot(y_i)) / N.
NumericArray csbl_logit_gradient(const NumericArray& probabilities, std::span<const int> labels,
                                 const CostWeights& weights);

/// Column 1 of [N x 2] softmax probabilities.
std::vector<double> positive_probabilities(const NumericArray& probabilities);

/// Expected cost of assigning a sample to `assigned_class`: sum over j != i of P(j|x) * C_ij
/// with i = assigned_class. Diagnostic only; training does not use it.
double expected_cost(std::span<const double> posterior, const CostMatrix& cm, int assigned_class);

}  // namespace frostnet
