#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "frostnet/array.hpp"

namespace frostnet {

enum class Mode { train, eval };

/// Gradients produced by one layer's backward pass.
struct LayerGradients {
    NumericArray d_input;
    std::map<std::string, NumericArray> d_params;
};

// Convolution is a valid (no padding), stride-1 cross-correlation; kernels are not flipped.
//   output[o][t] = bias[o] + sum_{c,k} input[c][t+k] * kernels[o][c][k]
// Both conv1d and conv1d_backward accept a single sample [C_in x L] or a batch [N x C_in x L].
NumericArray conv1d(const NumericArray& input, const NumericArray& kernels,
                    const NumericArray& bias);
/// Returns d_input plus d_params "kernels" and "bias". With `need_input_grad` false, d_input
/// is left empty (the first layer of a network has no use for it).
LayerGradients conv1d_backward(const NumericArray& input, const NumericArray& kernels,
                               const NumericArray& d_output, bool need_input_grad = true);

struct PoolResult {
    NumericArray output;
    /// Flat index into the input of the element selected for each output element.
    std::vector<std::size_t> argmax;
};

/// Non-overlapping max pooling (stride == window). A trailing remainder shorter than the
/// window is dropped; ties go to the lowest index. Accepts [C x L] or [N x C x L].
PoolResult maxpool1d(const NumericArray& input, std::size_t window);
NumericArray maxpool1d_backward(const NumericArray& d_output,
                                const std::vector<std::size_t>& argmax,
                                const Shape& input_shape);

struct BatchNormStats {
    NumericArray mean;
    NumericArray var;

    bool ready() const noexcept { return !mean.empty() && !var.empty(); }
    static BatchNormStats identity(std::size_t channels);
};

struct BatchNormOptions {
    double eps = 1e-5;
    double momentum = 0.1;
};

/// What the backward pass needs from a train-mode forward.
struct BatchNormCache {
    NumericArray normalized;         // x_hat, [N x C x L]
    std::vector<double> inv_std;     // per channel, 1 / sqrt(var + eps)
};

/// Per-channel normalization over the batch and length axes of a [N x C x L] input.
/// Train mode uses batch statistics, writes `cache` when non-null and blends the biased
/// batch mean and the unbiased batch variance into `running` with the configured momentum.
/// Eval mode reads `running` only.
NumericArray batchnorm1d(const NumericArray& input, const NumericArray& gamma,
                         const NumericArray& beta, BatchNormStats& running, Mode mode,
                         BatchNormCache* cache = nullptr, const BatchNormOptions& options = {});
/// Eval-mode overload; never touches the running statistics.
NumericArray batchnorm1d(const NumericArray& input, const NumericArray& gamma,
                         const NumericArray& beta, const BatchNormStats& running,
                         const BatchNormOptions& options = {});
/// Returns d_input plus d_params "gamma" and "beta".
LayerGradients batchnorm1d_backward(const BatchNormCache& cache, const NumericArray& gamma,
                                    const NumericArray& d_output);

NumericArray relu(const NumericArray& input);
/// Passes d_output where input > 0; zero at and below zero.
NumericArray relu_backward(const NumericArray& input, const NumericArray& d_output);

/// input [N x F] times weights [F x O] plus bias [O].
NumericArray dense(const NumericArray& input, const NumericArray& weights,
                   const NumericArray& bias);
/// Returns d_input plus d_params "weights" and "bias".
LayerGradients dense_backward(const NumericArray& input, const NumericArray& weights,
                              const NumericArray& d_output);

/// Row-wise softmax of [N x C] logits (C >= 2), max-subtracted.
NumericArray softmax(const NumericArray& logits);

/// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h for every coordinate of x.
NumericArray finite_difference_gradient(const std::function<double(const NumericArray&)>& f,
                                        const NumericArray& x, double h = 1e-5);

}  // namespace frostnet
