#include "frostnet/layers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace frostnet {
namespace {

struct ConvGeometry {
    std::size_t batch;     // 1 for an unbatched [C x L] input
    std::size_t channels;
    std::size_t length;
    bool batched;
};

ConvGeometry geometry_of(const NumericArray& input, const std::string& what) {
    if (input.rank() == 2) return {1, input.dim(0), input.dim(1), false};
    if (input.rank() == 3) return {input.dim(0), input.dim(1), input.dim(2), true};
    throw std::invalid_argument(what + ": expected [C x L] or [N x C x L], got " +
                                shape_to_string(input.shape()));
}

Shape make_shape(const ConvGeometry& g, std::size_t channels, std::size_t length) {
    if (g.batched) return {g.batch, channels, length};
    return {channels, length};
}

void check_conv_shapes(const ConvGeometry& g, const NumericArray& kernels) {
    require_rank(kernels, 3, "conv1d kernels");
    if (kernels.dim(1) != g.channels)
        throw std::invalid_argument("conv1d: kernels expect " + std::to_string(kernels.dim(1)) +
                                    " input channels, input has " + std::to_string(g.channels));
    if (g.length < kernels.dim(2))
        throw std::invalid_argument("conv1d: input length " + std::to_string(g.length) +
                                    " is shorter than kernel width " +
                                    std::to_string(kernels.dim(2)));
}

void check_output(const NumericArray& out, const char* what) {
    require_finite(out, std::string(what) + " output");
}

}  // namespace

NumericArray conv1d(const NumericArray& input, const NumericArray& kernels,
                    const NumericArray& bias) {
    const ConvGeometry g = geometry_of(input, "conv1d input");
    check_conv_shapes(g, kernels);
    const std::size_t out_channels = kernels.dim(0);
    const std::size_t width = kernels.dim(2);
    require_rank(bias, 1, "conv1d bias");
    if (bias.dim(0) != out_channels)
        throw std::invalid_argument("conv1d: bias has " + std::to_string(bias.dim(0)) +
                                    " entries for " + std::to_string(out_channels) +
                                    " output channels");
    require_finite(input, "conv1d input");

    const std::size_t out_len = g.length - width + 1;
    NumericArray output(make_shape(g, out_channels, out_len));
    const double* w = kernels.data();
    for (std::size_t n = 0; n < g.batch; ++n) {
        const double* x = input.data() + n * g.channels * g.length;
        double* y = output.data() + n * out_channels * out_len;
        for (std::size_t o = 0; o < out_channels; ++o) {
            double* yo = y + o * out_len;
            std::fill(yo, yo + out_len, bias[o]);
            for (std::size_t c = 0; c < g.channels; ++c) {
                const double* xc = x + c * g.length;
                const double* wk = w + (o * g.channels + c) * width;
                for (std::size_t k = 0; k < width; ++k) {
                    const double wv = wk[k];
                    const double* xs = xc + k;
                    for (std::size_t t = 0; t < out_len; ++t) yo[t] += wv * xs[t];
                }
            }
        }
    }
    check_output(output, "conv1d");
    return output;
}

LayerGradients conv1d_backward(const NumericArray& input, const NumericArray& kernels,
                               const NumericArray& d_output, bool need_input_grad) {
    const ConvGeometry g = geometry_of(input, "conv1d input");
    check_conv_shapes(g, kernels);
    const std::size_t out_channels = kernels.dim(0);
    const std::size_t width = kernels.dim(2);
    const std::size_t out_len = g.length - width + 1;
    if (d_output.shape() != make_shape(g, out_channels, out_len))
        throw std::invalid_argument("conv1d_backward: upstream gradient shape " +
                                    shape_to_string(d_output.shape()) + " does not match output " +
                                    shape_to_string(make_shape(g, out_channels, out_len)));

    LayerGradients grads;
    if (need_input_grad) grads.d_input = NumericArray(input.shape());
    NumericArray d_kernels(kernels.shape());
    NumericArray d_bias({out_channels});
    const double* w = kernels.data();
    for (std::size_t n = 0; n < g.batch; ++n) {
        const double* x = input.data() + n * g.channels * g.length;
        const double* dy = d_output.data() + n * out_channels * out_len;
        double* dx = need_input_grad ? grads.d_input.data() + n * g.channels * g.length : nullptr;
        for (std::size_t o = 0; o < out_channels; ++o) {
            const double* dyo = dy + o * out_len;
            double bsum = 0.0;
            for (std::size_t t = 0; t < out_len; ++t) bsum += dyo[t];
            d_bias[o] += bsum;
            for (std::size_t c = 0; c < g.channels; ++c) {
                const double* xc = x + c * g.length;
                const std::size_t base = (o * g.channels + c) * width;
                for (std::size_t k = 0; k < width; ++k) {
                    const double* xs = xc + k;
                    // Four interleaved partial sums so the reduction vectorizes.
                    double acc[4] = {0.0, 0.0, 0.0, 0.0};
                    std::size_t t = 0;
                    for (; t + 4 <= out_len; t += 4)
                        for (std::size_t l = 0; l < 4; ++l) acc[l] += dyo[t + l] * xs[t + l];
                    for (; t < out_len; ++t) acc[0] += dyo[t] * xs[t];
                    d_kernels[base + k] += (acc[0] + acc[1]) + (acc[2] + acc[3]);
                    if (dx) {
                        const double wv = w[base + k];
                        double* dxs = dx + c * g.length + k;
                        for (std::size_t u = 0; u < out_len; ++u) dxs[u] += wv * dyo[u];
                    }
                }
            }
        }
    }
    grads.d_params.emplace("kernels", std::move(d_kernels));
    grads.d_params.emplace("bias", std::move(d_bias));
    return grads;
}

PoolResult maxpool1d(const NumericArray& input, std::size_t window) {
    const ConvGeometry g = geometry_of(input, "maxpool1d input");
    if (window == 0) throw std::invalid_argument("maxpool1d: window must be positive");
    if (window > g.length)
        throw std::invalid_argument("maxpool1d: window " + std::to_string(window) +
                                    " exceeds input length " + std::to_string(g.length));
    require_finite(input, "maxpool1d input");

    const std::size_t out_len = g.length / window;
    PoolResult result{NumericArray(make_shape(g, g.channels, out_len)), {}};
    result.argmax.resize(result.output.size());
    std::size_t out_idx = 0;
    for (std::size_t row = 0; row < g.batch * g.channels; ++row) {
        const std::size_t row_start = row * g.length;
        for (std::size_t p = 0; p < out_len; ++p, ++out_idx) {
            std::size_t best = row_start + p * window;
            for (std::size_t j = best + 1; j < row_start + (p + 1) * window; ++j)
                if (input[j] > input[best]) best = j;
            result.output[out_idx] = input[best];
            result.argmax[out_idx] = best;
        }
    }
    return result;
}

NumericArray maxpool1d_backward(const NumericArray& d_output,
                                const std::vector<std::size_t>& argmax,
                                const Shape& input_shape) {
    if (argmax.size() != d_output.size())
        throw std::invalid_argument("maxpool1d_backward: argmax map has " +
                                    std::to_string(argmax.size()) + " entries for " +
                                    std::to_string(d_output.size()) + " gradients");
    NumericArray d_input(input_shape);
    for (std::size_t i = 0; i < argmax.size(); ++i) {
        if (argmax[i] >= d_input.size())
            throw std::invalid_argument("maxpool1d_backward: argmax index out of range");
        d_input[argmax[i]] += d_output[i];
    }
    return d_input;
}

BatchNormStats BatchNormStats::identity(std::size_t channels) {
    return {NumericArray({channels}, 0.0), NumericArray({channels}, 1.0)};
}

namespace {

void check_batchnorm_shapes(const NumericArray& input, const NumericArray& gamma,
                            const NumericArray& beta) {
    require_rank(input, 3, "batchnorm1d input");
    const std::size_t channels = input.dim(1);
    if (gamma.shape() != Shape{channels} || beta.shape() != Shape{channels})
        throw std::invalid_argument("batchnorm1d: gamma " + shape_to_string(gamma.shape()) +
                                    " / beta " + shape_to_string(beta.shape()) +
                                    " do not match " + std::to_string(channels) + " channels");
    require_finite(input, "batchnorm1d input");
}

NumericArray batchnorm_eval(const NumericArray& input, const NumericArray& gamma,
                            const NumericArray& beta, const BatchNormStats& running,
                            const BatchNormOptions& options) {
    if (!running.ready())
        throw std::logic_error("batchnorm1d: eval mode requested before running statistics exist");
    const std::size_t n = input.dim(0), channels = input.dim(1), len = input.dim(2);
    if (running.mean.size() != channels || running.var.size() != channels)
        throw std::invalid_argument("batchnorm1d: running statistics do not match " +
                                    std::to_string(channels) + " channels");
    NumericArray output(input.shape());
    for (std::size_t c = 0; c < channels; ++c) {
        const double scale = gamma[c] / std::sqrt(running.var[c] + options.eps);
        const double shift = beta[c] - running.mean[c] * scale;
        for (std::size_t i = 0; i < n; ++i) {
            const double* x = input.data() + (i * channels + c) * len;
            double* y = output.data() + (i * channels + c) * len;
            for (std::size_t t = 0; t < len; ++t) y[t] = x[t] * scale + shift;
        }
    }
    check_output(output, "batchnorm1d");
    return output;
}

}  // namespace

NumericArray batchnorm1d(const NumericArray& input, const NumericArray& gamma,
                         const NumericArray& beta, const BatchNormStats& running,
                         const BatchNormOptions& options) {
    check_batchnorm_shapes(input, gamma, beta);
    return batchnorm_eval(input, gamma, beta, running, options);
}

NumericArray batchnorm1d(const NumericArray& input, const NumericArray& gamma,
                         const NumericArray& beta, BatchNormStats& running, Mode mode,
                         BatchNormCache* cache, const BatchNormOptions& options) {
    check_batchnorm_shapes(input, gamma, beta);
    if (mode == Mode::eval) return batchnorm_eval(input, gamma, beta, running, options);

    const std::size_t n = input.dim(0), channels = input.dim(1), len = input.dim(2);
    const std::size_t count = n * len;
    if (count < 2)
        throw std::invalid_argument("batchnorm1d: train mode needs at least 2 values per channel, got " +
                                    std::to_string(count));
    if (!running.ready()) running = BatchNormStats::identity(channels);

    NumericArray output(input.shape());
    NumericArray normalized(input.shape());
    std::vector<double> inv_std(channels);
    for (std::size_t c = 0; c < channels; ++c) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double* x = input.data() + (i * channels + c) * len;
            for (std::size_t t = 0; t < len; ++t) sum += x[t];
        }
        const double mean = sum / static_cast<double>(count);
        double sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double* x = input.data() + (i * channels + c) * len;
            for (std::size_t t = 0; t < len; ++t) sq += (x[t] - mean) * (x[t] - mean);
        }
        const double var = sq / static_cast<double>(count);
        inv_std[c] = 1.0 / std::sqrt(var + options.eps);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t off = (i * channels + c) * len;
            for (std::size_t t = 0; t < len; ++t) {
                const double xh = (input[off + t] - mean) * inv_std[c];
                normalized[off + t] = xh;
                output[off + t] = gamma[c] * xh + beta[c];
            }
        }
        const double unbiased = sq / static_cast<double>(count - 1);
        running.mean[c] = (1.0 - options.momentum) * running.mean[c] + options.momentum * mean;
        running.var[c] = (1.0 - options.momentum) * running.var[c] + options.momentum * unbiased;
    }
    check_output(output, "batchnorm1d");
    if (cache) {
        cache->normalized = std::move(normalized);
        cache->inv_std = std::move(inv_std);
    }
    return output;
}

LayerGradients batchnorm1d_backward(const BatchNormCache& cache, const NumericArray& gamma,
                                    const NumericArray& d_output) {
    const NumericArray& xh = cache.normalized;
    if (xh.rank() != 3 || d_output.shape() != xh.shape())
        throw std::invalid_argument("batchnorm1d_backward: upstream gradient shape " +
                                    shape_to_string(d_output.shape()) +
                                    " does not match cached input " + shape_to_string(xh.shape()));
    const std::size_t n = xh.dim(0), channels = xh.dim(1), len = xh.dim(2);
    if (gamma.size() != channels || cache.inv_std.size() != channels)
        throw std::invalid_argument("batchnorm1d_backward: channel count mismatch");
    const double count = static_cast<double>(n * len);

    LayerGradients grads;
    grads.d_input = NumericArray(xh.shape());
    NumericArray d_gamma({channels});
    NumericArray d_beta({channels});
    for (std::size_t c = 0; c < channels; ++c) {
        double sum_dy = 0.0, sum_dy_xh = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t off = (i * channels + c) * len;
            for (std::size_t t = 0; t < len; ++t) {
                sum_dy += d_output[off + t];
                sum_dy_xh += d_output[off + t] * xh[off + t];
            }
        }
        d_gamma[c] = sum_dy_xh;
        d_beta[c] = sum_dy;
        // dx = gamma * inv_std / M * (M * dy - sum(dy) - x_hat * sum(dy * x_hat))
        const double k = gamma[c] * cache.inv_std[c] / count;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t off = (i * channels + c) * len;
            for (std::size_t t = 0; t < len; ++t)
                grads.d_input[off + t] =
                    k * (count * d_output[off + t] - sum_dy - xh[off + t] * sum_dy_xh);
        }
    }
    grads.d_params.emplace("gamma", std::move(d_gamma));
    grads.d_params.emplace("beta", std::move(d_beta));
    return grads;
}

NumericArray relu(const NumericArray& input) {
    require_finite(input, "relu input");
    NumericArray output = input;
    for (double& v : output.values()) v = v > 0.0 ? v : 0.0;
    return output;
}

NumericArray relu_backward(const NumericArray& input, const NumericArray& d_output) {
    if (input.shape() != d_output.shape())
        throw std::invalid_argument("relu_backward: shapes " + shape_to_string(input.shape()) +
                                    " and " + shape_to_string(d_output.shape()) + " differ");
    NumericArray d_input(input.shape());
    for (std::size_t i = 0; i < input.size(); ++i)
        d_input[i] = input[i] > 0.0 ? d_output[i] : 0.0;
    return d_input;
}

NumericArray dense(const NumericArray& input, const NumericArray& weights,
                   const NumericArray& bias) {
    require_rank(input, 2, "dense input");
    require_rank(weights, 2, "dense weights");
    require_rank(bias, 1, "dense bias");
    const std::size_t n = input.dim(0), features = input.dim(1), outputs = weights.dim(1);
    if (weights.dim(0) != features)
        throw std::invalid_argument("dense: input has " + std::to_string(features) +
                                    " features, weights expect " + std::to_string(weights.dim(0)));
    if (bias.dim(0) != outputs)
        throw std::invalid_argument("dense: bias has " + std::to_string(bias.dim(0)) +
                                    " entries for " + std::to_string(outputs) + " outputs");
    require_finite(input, "dense input");

    NumericArray output({n, outputs});
    for (std::size_t i = 0; i < n; ++i) {
        double* y = output.data() + i * outputs;
        for (std::size_t o = 0; o < outputs; ++o) y[o] = bias[o];
        for (std::size_t f = 0; f < features; ++f) {
            const double xv = input.at(i, f);
            const double* w = weights.data() + f * outputs;
            for (std::size_t o = 0; o < outputs; ++o) y[o] += xv * w[o];
        }
    }
    check_output(output, "dense");
    return output;
}

LayerGradients dense_backward(const NumericArray& input, const NumericArray& weights,
                              const NumericArray& d_output) {
    require_rank(input, 2, "dense input");
    require_rank(weights, 2, "dense weights");
    const std::size_t n = input.dim(0), features = input.dim(1), outputs = weights.dim(1);
    if (weights.dim(0) != features || d_output.shape() != Shape{n, outputs})
        throw std::invalid_argument("dense_backward: shapes input " +
                                    shape_to_string(input.shape()) + ", weights " +
                                    shape_to_string(weights.shape()) + ", upstream " +
                                    shape_to_string(d_output.shape()) + " disagree");

    LayerGradients grads;
    grads.d_input = NumericArray(input.shape());
    NumericArray d_weights(weights.shape());
    NumericArray d_bias({outputs});
    for (std::size_t i = 0; i < n; ++i) {
        const double* dy = d_output.data() + i * outputs;
        for (std::size_t o = 0; o < outputs; ++o) d_bias[o] += dy[o];
        for (std::size_t f = 0; f < features; ++f) {
            const double xv = input.at(i, f);
            const double* w = weights.data() + f * outputs;
            double* dw = d_weights.data() + f * outputs;
            double acc = 0.0;
            for (std::size_t o = 0; o < outputs; ++o) {
                dw[o] += xv * dy[o];
                acc += w[o] * dy[o];
            }
            grads.d_input.at(i, f) = acc;
        }
    }
    grads.d_params.emplace("weights", std::move(d_weights));
    grads.d_params.emplace("bias", std::move(d_bias));
    return grads;
}

NumericArray softmax(const NumericArray& logits) {
    require_rank(logits, 2, "softmax logits");
    if (logits.dim(1) < 2)
        throw std::invalid_argument("softmax: need at least 2 classes, got " +
                                    std::to_string(logits.dim(1)));
    require_finite(logits, "softmax logits");
    const std::size_t n = logits.dim(0), classes = logits.dim(1);
    NumericArray probs(logits.shape());
    for (std::size_t i = 0; i < n; ++i) {
        const double* z = logits.data() + i * classes;
        double* p = probs.data() + i * classes;
        const double top = *std::max_element(z, z + classes);
        double total = 0.0;
        for (std::size_t c = 0; c < classes; ++c) {
            p[c] = std::exp(z[c] - top);
            total += p[c];
        }
        for (std::size_t c = 0; c < classes; ++c) p[c] /= total;
    }
    return probs;
}

NumericArray finite_difference_gradient(const std::function<double(const NumericArray&)>& f,
                                        const NumericArray& x, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("finite_difference_gradient: step must be positive");
    NumericArray grad(x.shape());
    NumericArray probe = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        probe[i] = x[i] + h;
        const double up = f(probe);
        probe[i] = x[i] - h;
        const double down = f(probe);
        probe[i] = x[i];
        grad[i] = (up - down) / (2.0 * h);
    }
    return grad;
}

}  // namespace frostnet
