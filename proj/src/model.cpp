#include "frostnet/model.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace frostnet {

FeatureLengths feature_lengths(const ArchitectureConfig& config) {
    FeatureLengths out;
    auto length = static_cast<std::int64_t>(config.input_length);
    const auto kernel = static_cast<std::int64_t>(config.conv_kernel);
    const std::size_t blocks = std::min(config.conv_filters.size(), config.pool_windows.size());
    for (std::size_t b = 0; b < blocks; ++b) {
        length = length - kernel + 1;
        out.stages.push_back(length);
        const auto window = static_cast<std::int64_t>(config.pool_windows[b]);
        length = (length > 0 && window > 0) ? length / window : 0;
        out.stages.push_back(length);
    }
    const std::int64_t channels =
        blocks == 0 ? 1 : static_cast<std::int64_t>(config.conv_filters[blocks - 1]);
    out.dense_input = length * channels;
    return out;
}

void validate(const ArchitectureConfig& config) {
    if (config.input_length == 0) throw std::invalid_argument("architecture: input_length must be positive");
    if (config.conv_filters.size() != config.pool_windows.size())
        throw std::invalid_argument("architecture: " + std::to_string(config.conv_filters.size()) +
                                    " conv blocks but " +
                                    std::to_string(config.pool_windows.size()) + " pool windows");
    if (config.num_classes < 2) throw std::invalid_argument("architecture: need at least 2 classes");
    if (!config.conv_filters.empty() && config.conv_kernel == 0)
        throw std::invalid_argument("architecture: conv_kernel must be positive");
    for (std::size_t b = 0; b < config.conv_filters.size(); ++b) {
        if (config.conv_filters[b] == 0)
            throw std::invalid_argument("architecture: conv" + std::to_string(b + 1) +
                                        " has zero filters");
        if (config.pool_windows[b] == 0)
            throw std::invalid_argument("architecture: pool" + std::to_string(b + 1) +
                                        " has a zero window");
    }
    const FeatureLengths lengths = feature_lengths(config);
    for (std::size_t s = 0; s < lengths.stages.size(); ++s) {
        if (lengths.stages[s] < 1) {
            const std::string layer = (s % 2 == 0 ? "conv" : "pool") + std::to_string(s / 2 + 1);
            throw std::invalid_argument("architecture: " + layer + " output length " +
                                        std::to_string(lengths.stages[s]) + " for input_length " +
                                        std::to_string(config.input_length));
        }
    }
}

namespace {

template <typename Params, typename Array>
std::vector<std::pair<std::string, Array*>> collect_parameters(Params& p) {
    std::vector<std::pair<std::string, Array*>> out;
    for (std::size_t b = 0; b < p.blocks.size(); ++b) {
        const std::string prefix = "block" + std::to_string(b) + ".";
        out.emplace_back(prefix + "kernels", &p.blocks[b].kernels);
        out.emplace_back(prefix + "bias", &p.blocks[b].bias);
        out.emplace_back(prefix + "gamma", &p.blocks[b].gamma);
        out.emplace_back(prefix + "beta", &p.blocks[b].beta);
    }
    out.emplace_back("dense.weights", &p.dense_weights);
    out.emplace_back("dense.bias", &p.dense_bias);
    return out;
}

}  // namespace

std::vector<std::pair<std::string, NumericArray*>> ModelParams::named_parameters() {
    return collect_parameters<ModelParams, NumericArray>(*this);
}

std::vector<std::pair<std::string, const NumericArray*>> ModelParams::named_parameters() const {
    return collect_parameters<const ModelParams, const NumericArray>(*this);
}

bool operator==(const ModelParams& a, const ModelParams& b) {
    if (!(a.config == b.config) || a.blocks.size() != b.blocks.size()) return false;
    for (std::size_t i = 0; i < a.blocks.size(); ++i) {
        const ConvBlock& x = a.blocks[i];
        const ConvBlock& y = b.blocks[i];
        if (!(x.kernels == y.kernels && x.bias == y.bias && x.gamma == y.gamma &&
              x.beta == y.beta && x.running.mean == y.running.mean &&
              x.running.var == y.running.var))
            return false;
    }
    return a.dense_weights == b.dense_weights && a.dense_bias == b.dense_bias;
}

ModelParams build_model(const ArchitectureConfig& config, std::uint64_t seed) {
    validate(config);
    std::mt19937_64 rng(seed);
    auto he_normal = [&rng](Shape shape, std::size_t fan_in) {
        NumericArray a(std::move(shape));
        std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
        for (double& v : a.values()) v = dist(rng);
        return a;
    };

    ModelParams params;
    params.config = config;
    std::size_t in_channels = 1;
    for (std::size_t filters : config.conv_filters) {
        ConvBlock block;
        block.kernels = he_normal({filters, in_channels, config.conv_kernel},
                                  in_channels * config.conv_kernel);
        block.bias = NumericArray({filters}, 0.0);
        block.gamma = NumericArray({filters}, 1.0);
        block.beta = NumericArray({filters}, 0.0);
        block.running = BatchNormStats::identity(filters);
        params.blocks.push_back(std::move(block));
        in_channels = filters;
    }
    const auto dense_input = static_cast<std::size_t>(feature_lengths(config).dense_input);
    params.dense_weights = he_normal({dense_input, config.num_classes}, dense_input);
    params.dense_bias = NumericArray({config.num_classes}, 0.0);
    return params;
}

namespace {

NumericArray as_channels(const NumericArray& batch, const ArchitectureConfig& config) {
    require_rank(batch, 2, "model input");
    if (batch.dim(1) != config.input_length)
        throw std::invalid_argument("model input has " + std::to_string(batch.dim(1)) +
                                    " bands, architecture expects " +
                                    std::to_string(config.input_length));
    return batch.reshaped({batch.dim(0), 1, batch.dim(1)});
}

NumericArray flatten(const NumericArray& x) {
    return x.reshaped({x.dim(0), x.size() / x.dim(0)});
}

}  // namespace

TrainForward forward_train(ModelParams& params, const NumericArray& batch) {
    TrainForward result;
    NumericArray x = as_channels(batch, params.config);
    for (std::size_t b = 0; b < params.blocks.size(); ++b) {
        ConvBlock& block = params.blocks[b];
        BlockCache cache;
        NumericArray conv = conv1d(x, block.kernels, block.bias);
        cache.pre_activation = batchnorm1d(conv, block.gamma, block.beta, block.running,
                                           Mode::train, &cache.norm);
        NumericArray activation = relu(cache.pre_activation);
        cache.activation_shape = activation.shape();
        PoolResult pooled = maxpool1d(activation, params.config.pool_windows[b]);
        cache.pool_argmax = std::move(pooled.argmax);
        cache.input = std::move(x);
        x = std::move(pooled.output);
        result.cache.blocks.push_back(std::move(cache));
    }
    result.cache.flattened = flatten(x);
    result.probabilities =
        softmax(dense(result.cache.flattened, params.dense_weights, params.dense_bias));
    result.cache.probabilities = result.probabilities;
    return result;
}

NumericArray forward_eval(const ModelParams& params, const NumericArray& batch) {
    NumericArray x = as_channels(batch, params.config);
    for (std::size_t b = 0; b < params.blocks.size(); ++b) {
        const ConvBlock& block = params.blocks[b];
        NumericArray conv = conv1d(x, block.kernels, block.bias);
        NumericArray normed = batchnorm1d(conv, block.gamma, block.beta, block.running);
        x = maxpool1d(relu(normed), params.config.pool_windows[b]).output;
    }
    return softmax(dense(flatten(x), params.dense_weights, params.dense_bias));
}

ParamMap backward(const ModelParams& params, const ForwardCache& cache,
                  const NumericArray& d_logits) {
    if (cache.blocks.size() != params.blocks.size())
        throw std::invalid_argument("backward: cache holds " + std::to_string(cache.blocks.size()) +
                                    " blocks, model has " + std::to_string(params.blocks.size()));
    if (cache.flattened.rank() != 2 || cache.flattened.dim(1) != params.dense_weights.dim(0))
        throw std::invalid_argument("backward: cached features " +
                                    shape_to_string(cache.flattened.shape()) +
                                    " do not fit dense weights " +
                                    shape_to_string(params.dense_weights.shape()));
    if (d_logits.shape() != Shape{cache.flattened.dim(0), params.config.num_classes})
        throw std::invalid_argument("backward: logit gradient " +
                                    shape_to_string(d_logits.shape()) + " for a batch of " +
                                    std::to_string(cache.flattened.dim(0)));
    for (std::size_t b = 0; b < params.blocks.size(); ++b)
        if (cache.blocks[b].input.rank() != 3 ||
            cache.blocks[b].input.dim(1) != params.blocks[b].kernels.dim(1))
            throw std::invalid_argument("backward: cache for block " + std::to_string(b) +
                                        " does not match the model");

    ParamMap grads;
    LayerGradients dense_grads = dense_backward(cache.flattened, params.dense_weights, d_logits);
    grads["dense.weights"] = std::move(dense_grads.d_params.at("weights"));
    grads["dense.bias"] = std::move(dense_grads.d_params.at("bias"));

    NumericArray upstream = std::move(dense_grads.d_input);
    for (std::size_t b = params.blocks.size(); b-- > 0;) {
        const BlockCache& bc = cache.blocks[b];
        const ConvBlock& block = params.blocks[b];
        const std::string prefix = "block" + std::to_string(b) + ".";
        NumericArray d_act = maxpool1d_backward(upstream, bc.pool_argmax, bc.activation_shape);
        NumericArray d_norm = relu_backward(bc.pre_activation, d_act);
        LayerGradients bn = batchnorm1d_backward(bc.norm, block.gamma, d_norm);
        LayerGradients conv = conv1d_backward(bc.input, block.kernels, bn.d_input, b > 0);
        grads[prefix + "kernels"] = std::move(conv.d_params.at("kernels"));
        grads[prefix + "bias"] = std::move(conv.d_params.at("bias"));
        grads[prefix + "gamma"] = std::move(bn.d_params.at("gamma"));
        grads[prefix + "beta"] = std::move(bn.d_params.at("beta"));
        upstream = std::move(conv.d_input);
    }
    return grads;
}

}  // namespace frostnet
