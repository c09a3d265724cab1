#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "frostnet/array.hpp"

namespace frostnet {

/// Training hyperparameters. Defaults are the paper-scale settings.
struct TrainConfig {
    std::size_t epochs = 1500;
    std::size_t batch_size = 256;
    double base_lr = 1.0e-3;
    double lr_decay_factor = 0.1;
    std::size_t lr_decay_every = 300;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps_adam = 1e-8;
    double c = 2.0;
    std::uint64_t seed = 0;

    void validate() const;
};

struct AdamMoments {
    NumericArray first;
    NumericArray second;
};

struct AdamState {
    std::map<std::string, AdamMoments> moments;
    std::uint64_t step = 0;
};

using ParameterRefs = std::vector<std::pair<std::string, NumericArray*>>;

/// One bias-corrected Adam update of every parameter in `params` using the gradient of the
/// same name in `grads`. Moments are created lazily on the first step.
void adam_step(const ParameterRefs& params, const std::map<std::string, NumericArray>& grads,
               AdamState& state, double lr, const TrainConfig& hyper);

/// base_lr * decay_factor ^ floor(epoch / decay_every).
double lr_at_epoch(const TrainConfig& config, std::size_t epoch);

}  // namespace frostnet
