#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "frostnet/array.hpp"
#include "frostnet/layers.hpp"

namespace frostnet {

/// Three conv blocks (conv -> batch-norm -> ReLU -> max-pool), then one dense layer and softmax.
struct ArchitectureConfig {
    std::size_t input_length = 2151;
    std::vector<std::size_t> conv_filters{64, 128, 32};
    std::size_t conv_kernel = 7;
    std::vector<std::size_t> pool_windows{9, 5, 7};
    std::size_t num_classes = 2;

    friend bool operator==(const ArchitectureConfig&, const ArchitectureConfig&) = default;
};

/// Shape audit. `stages` alternates conv and pool output lengths, one pair per block.
/// A length may come out non-positive for an infeasible config; nothing is rejected here.
struct FeatureLengths {
    std::vector<std::int64_t> stages;
    std::int64_t dense_input = 0;
};

FeatureLengths feature_lengths(const ArchitectureConfig& config);

/// Throws std::invalid_argument naming the first failing layer.
void validate(const ArchitectureConfig& config);

struct ConvBlock {
    NumericArray kernels;  // [filters x in_channels x kernel]
    NumericArray bias;     // [filters]
    NumericArray gamma;    // [filters]
    NumericArray beta;     // [filters]
    BatchNormStats running;
};

struct ModelParams {
    ArchitectureConfig config;
    std::vector<ConvBlock> blocks;
    NumericArray dense_weights;  // [dense_input x num_classes]
    NumericArray dense_bias;     // [num_classes]

    /// Learnable tensors in a fixed order, e.g. "block0.kernels", "dense.weights".
    std::vector<std::pair<std::string, NumericArray*>> named_parameters();
    std::vector<std::pair<std::string, const NumericArray*>> named_parameters() const;

    friend bool operator==(const ModelParams& a, const ModelParams& b);
};

/// Gradient (or any per-parameter tensor) keyed by the names of named_parameters().
using ParamMap = std::map<std::string, NumericArray>;

/// He-normal kernels and dense weights (stddev sqrt(2 / fan_in)), zero biases, gamma 1,
/// beta 0, running mean 0 and running variance 1. Deterministic in `seed`.
ModelParams build_model(const ArchitectureConfig& config, std::uint64_t seed);

struct BlockCache {
    NumericArray input;         // [N x C_in x L]
    BatchNormCache norm;
    NumericArray pre_activation;  // batch-norm output
    Shape activation_shape;
    std::vector<std::size_t> pool_argmax;
};

struct ForwardCache {
    std::vector<BlockCache> blocks;
    NumericArray flattened;  // [N x dense_input]
    NumericArray probabilities;
};

struct TrainForward {
    NumericArray probabilities;  // [N x num_classes]
    ForwardCache cache;
};

/// Train-mode forward over a [N x input_length] batch. Uses batch statistics and updates the
/// batch-norm running statistics in `params`; nothing else is modified.
TrainForward forward_train(ModelParams& params, const NumericArray& batch);

/// Eval-mode forward using running statistics. Pure.
NumericArray forward_eval(const ModelParams& params, const NumericArray& batch);

/// Gradients of the loss with respect to every learnable parameter, given the loss gradient
/// with respect to the pre-softmax logits.
ParamMap backward(const ModelParams& params, const ForwardCache& cache,
                  const NumericArray& d_logits);

// Checkpoint container, little-endian:
//   "FROSTNET" | u32 version | u64 header bytes | header (JSON architecture config)
//   | u64 array count | per array: u32 name bytes, name, u32 rank, u64 dims[rank],
//     f64 values | "END."
// Arrays are the learnable parameters, the running statistics ("blockK.running_mean",
// "blockK.running_var") and any attachments the caller adds.
inline constexpr std::uint32_t kCheckpointVersion = 1;

using Attachments = std::map<std::string, NumericArray>;

struct Checkpoint {
    ModelParams model;
    Attachments attachments;
};

void save_checkpoint(const ModelParams& params, const std::filesystem::path& path,
                     const Attachments& attachments = {});
Checkpoint read_checkpoint(const std::filesystem::path& path);
ModelParams load_checkpoint(const std::filesystem::path& path);
/// As load_checkpoint, but also rejects a file whose architecture differs from `expected`.
ModelParams load_checkpoint(const std::filesystem::path& path, const ArchitectureConfig& expected);

std::string architecture_to_json(const ArchitectureConfig& config);
ArchitectureConfig architecture_from_json(const std::string& text);

}  // namespace frostnet
