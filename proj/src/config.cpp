#include <fstream>
#include <stdexcept>

#include "frostnet/experiment.hpp"

namespace frostnet {

using nlohmann::json;

std::string to_string(LossMode mode) {
    switch (mode) {
        case LossMode::plain_ce: return "plain_ce";
        case LossMode::alpha_only: return "alpha_only";
        case LossMode::r_only: return "r_only";
        case LossMode::full_csbl: return "full_csbl";
    }
    throw std::logic_error("unknown loss mode");
}

LossMode parse_loss_mode(const std::string& text) {
    if (text == "ce" || text == "plain_ce") return LossMode::plain_ce;
    if (text == "alpha" || text == "alpha_only") return LossMode::alpha_only;
    if (text == "r" || text == "r_only") return LossMode::r_only;
    if (text == "csbl" || text == "full_csbl") return LossMode::full_csbl;
    throw std::invalid_argument("unknown loss mode '" + text + "' (expected ce, alpha, r or csbl)");
}

std::array<LossMode, 4> ablation_modes() {
    return {LossMode::plain_ce, LossMode::alpha_only, LossMode::r_only, LossMode::full_csbl};
}

void ExperimentConfig::validate() const {
    frostnet::validate(arch);
    train.validate();
    if (!data_path) {
        synth.validate();
        if (synth.dim != arch.input_length)
            throw std::invalid_argument("synthetic dim " + std::to_string(synth.dim) +
                                        " does not match architecture input_length " +
                                        std::to_string(arch.input_length));
    }
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument("train_fraction must lie in (0, 1)");
    if (!(max_ratio >= 1.0)) throw std::invalid_argument("max_ratio must be >= 1");
    if (knn_k == 0 || knn_k % 2 == 0) throw std::invalid_argument("k must be a positive odd number");
    if (force_alpha && !(*force_alpha > 0.0)) throw std::invalid_argument("force_alpha must be positive");
    if (force_r && !(*force_r >= 0.0 && *force_r <= 1.0))
        throw std::invalid_argument("force_r must lie in [0, 1]");
}

void apply_desk_preset(ExperimentConfig& config) {
    config.preset = "desk";
    config.arch.input_length = 256;
    config.arch.conv_filters = {8, 16, 8};
    config.arch.conv_kernel = 7;
    config.arch.pool_windows = {4, 3, 2};
    config.synth.dim = 256;
    config.train.epochs = 150;
    config.train.lr_decay_every = 30;
}

json to_json(const ExperimentConfig& c) {
    json bumps = json::array();
    for (const auto& b : c.synth.bumps)
        bumps.push_back({{"center", b.center}, {"width", b.width}, {"amplitude", b.amplitude}});
    return {
        {"preset", c.preset},
        {"seed", c.train.seed},
        {"loss_mode", to_string(c.loss_mode)},
        {"data", c.data_path ? json(*c.data_path) : json(nullptr)},
        {"train_fraction", c.train_fraction},
        {"max_ratio", c.max_ratio},
        {"standardize", c.standardize},
        {"k", c.knn_k},
        {"force_alpha", c.force_alpha ? json(*c.force_alpha) : json(nullptr)},
        {"force_r", c.force_r ? json(*c.force_r) : json(nullptr)},
        {"architecture", json::parse(architecture_to_json(c.arch))},
        {"train",
         {{"epochs", c.train.epochs},
          {"batch_size", c.train.batch_size},
          {"base_lr", c.train.base_lr},
          {"lr_decay_factor", c.train.lr_decay_factor},
          {"lr_decay_every", c.train.lr_decay_every},
          {"beta1", c.train.beta1},
          {"beta2", c.train.beta2},
          {"eps_adam", c.train.eps_adam},
          {"c", c.train.c}}},
        {"synth",
         {{"n_per_class", c.synth.n_per_class},
          {"dim", c.synth.dim},
          {"bumps", bumps},
          {"noise_scale", c.synth.noise_scale},
          {"smoothness", c.synth.smoothness},
          {"gain_jitter", c.synth.gain_jitter},
          {"seed", c.synth.seed}}},
    };
}

namespace {

template <typename T>
void read_if(const json& j, const char* key, T& target) {
    if (j.contains(key) && !j.at(key).is_null()) target = j.at(key).get<T>();
}

template <typename T>
void read_optional(const json& j, const char* key, std::optional<T>& target) {
    if (!j.contains(key)) return;
    if (j.at(key).is_null())
        target.reset();
    else
        target = j.at(key).get<T>();
}

}  // namespace

ExperimentConfig config_from_json(const json& j, ExperimentConfig c) {
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
    try {
        if (j.contains("preset")) {
            const auto preset = j.at("preset").get<std::string>();
            if (preset == "desk")
                apply_desk_preset(c);
            else if (preset != "paper")
                throw std::invalid_argument("unknown preset '" + preset + "'");
        }
        read_if(j, "seed", c.train.seed);
        if (j.contains("loss_mode")) c.loss_mode = parse_loss_mode(j.at("loss_mode").get<std::string>());
        read_optional(j, "data", c.data_path);
        read_if(j, "train_fraction", c.train_fraction);
        read_if(j, "max_ratio", c.max_ratio);
        read_if(j, "standardize", c.standardize);
        read_if(j, "k", c.knn_k);
        read_optional(j, "force_alpha", c.force_alpha);
        read_optional(j, "force_r", c.force_r);
        if (j.contains("architecture")) {
            const json& a = j.at("architecture");
            read_if(a, "input_length", c.arch.input_length);
            read_if(a, "conv_filters", c.arch.conv_filters);
            read_if(a, "conv_kernel", c.arch.conv_kernel);
            read_if(a, "pool_windows", c.arch.pool_windows);
            read_if(a, "num_classes", c.arch.num_classes);
        }
        if (j.contains("train")) {
            const json& t = j.at("train");
            read_if(t, "epochs", c.train.epochs);
            read_if(t, "batch_size", c.train.batch_size);
            read_if(t, "base_lr", c.train.base_lr);
            read_if(t, "lr_decay_factor", c.train.lr_decay_factor);
            read_if(t, "lr_decay_every", c.train.lr_decay_every);
            read_if(t, "beta1", c.train.beta1);
            read_if(t, "beta2", c.train.beta2);
            read_if(t, "eps_adam", c.train.eps_adam);
            read_if(t, "c", c.train.c);
        }
        if (j.contains("synth")) {
            const json& s = j.at("synth");
            read_if(s, "n_per_class", c.synth.n_per_class);
            read_if(s, "dim", c.synth.dim);
            read_if(s, "noise_scale", c.synth.noise_scale);
            read_if(s, "smoothness", c.synth.smoothness);
            read_if(s, "gain_jitter", c.synth.gain_jitter);
            read_if(s, "seed", c.synth.seed);
            if (s.contains("bumps")) {
                c.synth.bumps.clear();
                for (const json& b : s.at("bumps"))
                    c.synth.bumps.push_back({b.at("center").get<double>(), b.at("width").get<double>(),
                                             b.at("amplitude").get<std::array<double, 2>>()});
            }
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("bad config: ") + e.what());
    }
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw std::invalid_argument("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return config_from_json(j, std::move(base));
}

}  // namespace frostnet
