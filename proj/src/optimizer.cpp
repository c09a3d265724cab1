#include "frostnet/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace frostnet {

void TrainConfig::validate() const {
    if (epochs == 0) throw std::invalid_argument("train config: epochs must be positive");
    if (batch_size == 0) throw std::invalid_argument("train config: batch_size must be positive");
    if (!(base_lr > 0.0)) throw std::invalid_argument("train config: base_lr must be positive");
    if (!(lr_decay_factor > 0.0 && lr_decay_factor <= 1.0))
        throw std::invalid_argument("train config: lr_decay_factor must lie in (0, 1]");
    if (lr_decay_every == 0)
        throw std::invalid_argument("train config: lr_decay_every must be positive");
    if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0))
        throw std::invalid_argument("train config: Adam betas must lie in (0, 1)");
    if (!(eps_adam > 0.0)) throw std::invalid_argument("train config: eps_adam must be positive");
    if (!(c > 0.0)) throw std::invalid_argument("train config: c must be positive");
}

void adam_step(const ParameterRefs& params, const std::map<std::string, NumericArray>& grads,
               AdamState& state, double lr, const TrainConfig& hyper) {
    if (!(lr > 0.0)) throw std::invalid_argument("adam_step: learning rate must be positive");
    for (const auto& [name, param] : params) {
        auto g = grads.find(name);
        if (g == grads.end()) throw std::invalid_argument("adam_step: no gradient for '" + name + "'");
        if (g->second.shape() != param->shape())
            throw std::invalid_argument("adam_step: gradient for '" + name + "' has shape " +
                                        shape_to_string(g->second.shape()) + ", parameter is " +
                                        shape_to_string(param->shape()));
        auto m = state.moments.find(name);
        if (m != state.moments.end() && m->second.first.shape() != param->shape())
            throw std::invalid_argument("adam_step: moment shape mismatch for '" + name + "'");
    }

    state.step += 1;
    const double t = static_cast<double>(state.step);
    const double correction1 = 1.0 - std::pow(hyper.beta1, t);
    const double correction2 = 1.0 - std::pow(hyper.beta2, t);
    for (const auto& [name, param] : params) {
        const NumericArray& grad = grads.at(name);
        auto [it, fresh] = state.moments.try_emplace(name);
        if (fresh) it->second = {NumericArray(param->shape()), NumericArray(param->shape())};
        NumericArray& m = it->second.first;
        NumericArray& v = it->second.second;
        for (std::size_t i = 0; i < param->size(); ++i) {
            const double gi = grad[i];
            m[i] = hyper.beta1 * m[i] + (1.0 - hyper.beta1) * gi;
            v[i] = hyper.beta2 * v[i] + (1.0 - hyper.beta2) * gi * gi;
            const double m_hat = m[i] / correction1;
            const double v_hat = v[i] / correction2;
            (*param)[i] -= lr * m_hat / (std::sqrt(v_hat) + hyper.eps_adam);
        }
    }
}

double lr_at_epoch(const TrainConfig& config, std::size_t epoch) {
    const auto decays = static_cast<double>(epoch / config.lr_decay_every);
    return config.base_lr * std::pow(config.lr_decay_factor, decays);
}

}  // namespace frostnet
