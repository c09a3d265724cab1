#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "frostnet/data.hpp"
#include "frostnet/loss.hpp"
#include "frostnet/metrics.hpp"
#include "frostnet/model.hpp"
#include "frostnet/optimizer.hpp"

namespace frostnet {

/// Which parts of W = alpha * exp(R) are active.
///   plain_ce   alpha = 1, R = 0 (ordinary cross-entropy)
///   alpha_only alpha from class counts, R = 0
///   r_only     alpha = 1, R updated every epoch
///   full_csbl  both
enum class LossMode { plain_ce, alpha_only, r_only, full_csbl };

std::string to_string(LossMode mode);
/// Accepts the short CLI names (ce, alpha, r, csbl) and the long names above.
LossMode parse_loss_mode(const std::string& text);
/// Ablation row order: plain_ce, alpha_only, r_only, full_csbl.
std::array<LossMode, 4> ablation_modes();

struct ExperimentConfig {
    ArchitectureConfig arch;
    TrainConfig train;
    SynthSpec synth;
    LossMode loss_mode = LossMode::full_csbl;
    /// CSV dataset; when unset the synthetic generator is used.
    std::optional<std::string> data_path;
    double train_fraction = 0.7;
    double max_ratio = 4.0;
    bool standardize = true;
    std::size_t knn_k = 5;
    /// Pin alpha (both classes) or R_1 to a fixed value regardless of the loss mode.
    std::optional<double> force_alpha;
    std::optional<double> force_r;
    std::string preset = "paper";

    void validate() const;
};

/// Small, fast settings: 256 bands, a narrower network, 150 epochs with decay every 30.
void apply_desk_preset(ExperimentConfig& config);

nlohmann::json to_json(const ExperimentConfig& config);
/// Overlays the keys present in `j` onto `base`. A "preset": "desk" key applies the desk
/// preset before the other keys.
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});

struct MetricBlock {
    ConfusionMatrix confusion;
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

MetricBlock evaluate_metrics(std::span<const int> predicted, std::span<const int> actual);

struct EpochLog {
    std::size_t epoch = 0;
    double lr = 0.0;
    double loss = 0.0;
    /// R_1 and W in effect while training this epoch.
    double r1 = 0.0;
    double w0 = 0.0;
    double w1 = 0.0;
    ConfusionMatrix train_confusion;
};

struct ExperimentReport {
    std::string run_id;
    std::string method;  // "cnn" or "knn"
    LossMode loss_mode = LossMode::full_csbl;
    std::uint64_t seed = 0;
    nlohmann::json config;
    std::array<std::size_t, 2> train_counts{0, 0};
    std::array<std::size_t, 2> test_counts{0, 0};
    ClassPair alpha{1.0, 1.0};
    std::vector<EpochLog> epochs;
    MetricBlock test;
    double wall_clock_seconds = 0.0;
};

nlohmann::json to_json(const ExperimentReport& report);
/// Aligned plain-text rendering (percentages) of a report.
std::string render_text(const ExperimentReport& report);

/// Train/test material for one run: split, standardized, minority replicated.
struct PreparedData {
    Dataset raw_test;             // test split before standardization
    Dataset train;                // standardized
    Dataset train_replicated;     // standardized, minority replicated
    Dataset test;                 // standardized
    std::optional<Standardizer> scaler;
};

Dataset load_source(const ExperimentConfig& config);
PreparedData prepare_data(const ExperimentConfig& config);

struct TrainResult {
    ExperimentReport report;
    ModelParams model;
    PreparedData data;
};

/// Full training run; single-threaded and deterministic in config.train.seed.
TrainResult run_training(const ExperimentConfig& config, bool verbose = false);

/// Writes model.ckpt, report.json, report.txt and test.csv (the raw test split) into `dir`.
void write_training_outputs(const TrainResult& result, const std::filesystem::path& dir);

/// Evaluates a checkpoint written by write_training_outputs on a CSV dataset, applying the
/// standardizer stored in the checkpoint.
ExperimentReport evaluate_checkpoint(const std::filesystem::path& checkpoint,
                                     const std::filesystem::path& data);

/// KNN on the same split and standardization as a CNN run with the same config.
ExperimentReport run_baseline(const ExperimentConfig& config);

struct AblationRow {
    LossMode mode = LossMode::full_csbl;
    std::vector<std::uint64_t> seeds;
    std::vector<MetricBlock> per_seed;
    MetricBlock median;  // confusion left zero
};

struct AblationTable {
    std::vector<AblationRow> rows;  // in ablation_modes() order
};

/// Trains every loss mode for every seed. Cells run on up to `jobs` threads; each cell is
/// deterministic regardless of scheduling. Per-run outputs go to out_dir/<mode>-seed<seed>.
AblationTable run_ablation(const ExperimentConfig& config, const std::vector<std::uint64_t>& seeds,
                           const std::optional<std::filesystem::path>& out_dir, unsigned jobs = 1,
                           bool verbose = false);

nlohmann::json to_json(const AblationTable& table);
std::string render_text(const AblationTable& table);

double median(std::vector<double> values);

/// Keeps freed training buffers in the heap instead of returning them to the OS after every
/// batch. Only a speed knob; results do not depend on it. No-op outside glibc.
void tune_allocator();

/// Writes `text` to `path`, throwing on failure.
void write_file(const std::filesystem::path& path, const std::string& text);

}  // namespace frostnet
