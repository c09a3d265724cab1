#include "frostnet/experiment.hpp"

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include <algorithm>
#include <chrono>
#include <fstream>
#include <future>
#include <iostream>
#include <stdexcept>

#include "frostnet/knn.hpp"

namespace frostnet {
namespace {

constexpr std::size_t kEvalChunk = 256;

bool uses_alpha(LossMode mode) {
    return mode == LossMode::alpha_only || mode == LossMode::full_csbl;
}

bool uses_r(LossMode mode) { return mode == LossMode::r_only || mode == LossMode::full_csbl; }

/// Eval-mode predictions in fixed-size chunks.
std::vector<int> predict_all(const ModelParams& model, const NumericArray& features) {
    std::vector<int> out;
    out.reserve(features.dim(0));
    std::vector<std::size_t> rows;
    for (std::size_t start = 0; start < features.dim(0); start += kEvalChunk) {
        const std::size_t end = std::min(features.dim(0), start + kEvalChunk);
        rows.resize(end - start);
        for (std::size_t i = start; i < end; ++i) rows[i - start] = i;
        const auto labels = predict_labels(forward_eval(model, gather_rows(features, rows)));
        out.insert(out.end(), labels.begin(), labels.end());
    }
    return out;
}

std::string run_id_for(LossMode mode, std::uint64_t seed) {
    return to_string(mode) + "-seed" + std::to_string(seed);
}

}  // namespace

MetricBlock evaluate_metrics(std::span<const int> predicted, std::span<const int> actual) {
    MetricBlock m;
    m.confusion = confusion(predicted, actual);
    m.accuracy = accuracy(m.confusion);
    const auto prf = precision_recall_f1(m.confusion);
    m.precision = prf.precision;
    m.recall = prf.recall;
    m.f1 = prf.f1;
    return m;
}

Dataset load_source(const ExperimentConfig& config) {
    Dataset ds = config.data_path ? load_csv(*config.data_path) : synth_generate(config.synth);
    ds.validate();
    return ds;
}

PreparedData prepare_data(const ExperimentConfig& config) {
    const Dataset source = load_source(config);
    if (source.dim() != config.arch.input_length)
        throw std::invalid_argument("dataset has " + std::to_string(source.dim()) +
                                    " bands, architecture expects " +
                                    std::to_string(config.arch.input_length));
    Split split = stratified_split(source, config.train_fraction, config.train.seed);

    PreparedData data;
    data.raw_test = split.test;
    if (config.standardize) {
        data.scaler = Standardizer::fit(split.train.features);
        data.train = data.scaler->apply(split.train);
        data.test = data.scaler->apply(split.test);
    } else {
        data.train = std::move(split.train);
        data.test = std::move(split.test);
    }
    data.train_replicated = replicate_minority(data.train, config.max_ratio);
    return data;
}

TrainResult run_training(const ExperimentConfig& config, bool verbose) {
    config.validate();
    const auto started = std::chrono::steady_clock::now();

    TrainResult result;
    result.data = prepare_data(config);
    const Dataset& train = result.data.train_replicated;
    result.model = build_model(config.arch, config.train.seed);

    ClassPair alpha{1.0, 1.0};
    if (uses_alpha(config.loss_mode)) {
        const auto counts = train.class_counts();
        const auto a = compute_alpha(counts, config.train.c);
        alpha = {a[0], a[1]};
    }
    if (config.force_alpha) alpha = {*config.force_alpha, *config.force_alpha};
    ClassPair r = uses_r(config.loss_mode) ? initial_r() : ClassPair{0.0, 0.0};
    if (config.force_r) r = {0.0, *config.force_r};
    const bool adaptive_r = uses_r(config.loss_mode) && !config.force_r;
    const bool plain = config.loss_mode == LossMode::plain_ce;

    ExperimentReport& report = result.report;
    report.run_id = run_id_for(config.loss_mode, config.train.seed);
    report.method = "cnn";
    report.loss_mode = config.loss_mode;
    report.seed = config.train.seed;
    report.config = to_json(config);
    report.train_counts = train.class_counts();
    report.test_counts = result.data.test.class_counts();
    report.alpha = alpha;

    AdamState adam;
    const ParameterRefs refs = result.model.named_parameters();
    for (std::size_t epoch = 0; epoch < config.train.epochs; ++epoch) {
        const CostWeights weights = CostWeights::make(alpha, r, config.train.c);
        const double lr = lr_at_epoch(config.train, epoch);
        double loss_sum = 0.0;
        for (const auto& idx : batch_iter(train.size(), config.train.batch_size, config.train.seed, epoch)) {
            const Dataset batch = train.subset(idx);
            TrainForward fwd = forward_train(result.model, batch.features);
            const std::vector<double> p1 = positive_probabilities(fwd.probabilities);
            double loss = 0.0;
            NumericArray d_logits;
            if (plain) {
                loss = cross_entropy(p1, batch.labels);
                d_logits = cross_entropy_logit_gradient(fwd.probabilities, batch.labels);
            } else {
                loss = csbl_loss(p1, batch.labels, weights).value;
                d_logits = csbl_logit_gradient(fwd.probabilities, batch.labels, weights);
            }
            const ParamMap grads = backward(result.model, fwd.cache, d_logits);
            adam_step(refs, grads, adam, lr, config.train);
            loss_sum += loss * static_cast<double>(batch.size());
        }

        EpochLog log;
        log.epoch = epoch;
        log.lr = lr;
        log.loss = loss_sum / static_cast<double>(train.size());
        log.r1 = r[1];
        log.w0 = weights.w[0];
        log.w1 = weights.w[1];
        log.train_confusion = confusion(predict_all(result.model, result.data.train.features),
                                        result.data.train.labels);
        if (adaptive_r) r = update_r(log.train_confusion, r);
        if (verbose)
            std::cerr << report.run_id << " epoch " << epoch << " lr " << lr << " loss " << log.loss
                      << " R1 " << log.r1 << '\n';
        report.epochs.push_back(log);
    }

    report.test = evaluate_metrics(predict_all(result.model, result.data.test.features),
                                   result.data.test.labels);
    report.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return result;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_training_outputs(const TrainResult& result, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    Attachments attachments;
    if (result.data.scaler) {
        attachments["input.mean"] = result.data.scaler->mean;
        attachments["input.scale"] = result.data.scaler->scale;
    }
    save_checkpoint(result.model, dir / "model.ckpt", attachments);
    write_file(dir / "report.json", to_json(result.report).dump(2) + "\n");
    write_file(dir / "report.txt", render_text(result.report));
    save_csv(result.data.raw_test, dir / "test.csv");
}

ExperimentReport evaluate_checkpoint(const std::filesystem::path& checkpoint,
                                     const std::filesystem::path& data) {
    const auto started = std::chrono::steady_clock::now();
    const Checkpoint ckpt = read_checkpoint(checkpoint);
    Dataset ds = load_csv(data);
    if (ds.dim() != ckpt.model.config.input_length)
        throw std::invalid_argument("dataset has " + std::to_string(ds.dim()) +
                                    " bands, checkpoint expects " +
                                    std::to_string(ckpt.model.config.input_length));
    const auto mean = ckpt.attachments.find("input.mean");
    const auto scale = ckpt.attachments.find("input.scale");
    if (mean != ckpt.attachments.end() && scale != ckpt.attachments.end())
        ds = Standardizer{mean->second, scale->second}.apply(ds);

    ExperimentReport report;
    report.run_id = "eval";
    report.method = "cnn";
    report.config = {{"checkpoint", checkpoint.string()}, {"data", data.string()},
                     {"architecture", nlohmann::json::parse(architecture_to_json(ckpt.model.config))}};
    report.test_counts = ds.class_counts();
    report.test = evaluate_metrics(predict_all(ckpt.model, ds.features), ds.labels);
    report.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return report;
}

ExperimentReport run_baseline(const ExperimentConfig& config) {
    config.validate();
    const auto started = std::chrono::steady_clock::now();
    const PreparedData data = prepare_data(config);
    const KnnModel model = knn_fit(data.train, config.knn_k);

    ExperimentReport report;
    report.run_id = "knn-seed" + std::to_string(config.train.seed);
    report.method = "knn";
    report.seed = config.train.seed;
    report.config = to_json(config);
    report.train_counts = data.train.class_counts();
    report.test_counts = data.test.class_counts();
    report.test = evaluate_metrics(knn_predict(model, data.test.features), data.test.labels);
    report.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return report;
}

double median(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("median of an empty set");
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    if (values.size() % 2 == 1) return values[mid];
    return 0.5 * (values[mid - 1] + values[mid]);
}

AblationTable run_ablation(const ExperimentConfig& config, const std::vector<std::uint64_t>& seeds,
                           const std::optional<std::filesystem::path>& out_dir, unsigned jobs,
                           bool verbose) {
    if (seeds.empty()) throw std::invalid_argument("ablation needs at least one seed");
    config.validate();
    if (jobs == 0) jobs = 1;

    struct Cell {
        LossMode mode;
        std::uint64_t seed;
    };
    std::vector<Cell> cells;
    for (LossMode mode : ablation_modes())
        for (std::uint64_t seed : seeds) cells.push_back({mode, seed});

    auto run_cell = [&](const Cell& cell) {
        ExperimentConfig c = config;
        c.loss_mode = cell.mode;
        c.train.seed = cell.seed;
        TrainResult result = run_training(c, verbose);
        if (out_dir) write_training_outputs(result, *out_dir / result.report.run_id);
        if (verbose)
            std::cerr << result.report.run_id << " done: F1 " << result.report.test.f1 << '\n';
        return result.report.test;
    };

    std::vector<MetricBlock> results(cells.size());
    for (std::size_t start = 0; start < cells.size(); start += jobs) {
        const std::size_t end = std::min(cells.size(), start + jobs);
        std::vector<std::future<MetricBlock>> wave;
        for (std::size_t i = start; i < end; ++i)
            wave.push_back(std::async(jobs == 1 ? std::launch::deferred : std::launch::async,
                                      run_cell, cells[i]));
        for (std::size_t i = start; i < end; ++i) results[i] = wave[i - start].get();
    }

    AblationTable table;
    std::size_t i = 0;
    for (LossMode mode : ablation_modes()) {
        AblationRow row;
        row.mode = mode;
        row.seeds = seeds;
        std::vector<double> acc, prec, rec, f1;
        for (std::size_t s = 0; s < seeds.size(); ++s, ++i) {
            row.per_seed.push_back(results[i]);
            acc.push_back(results[i].accuracy);
            prec.push_back(results[i].precision);
            rec.push_back(results[i].recall);
            f1.push_back(results[i].f1);
        }
        row.median.accuracy = median(acc);
        row.median.precision = median(prec);
        row.median.recall = median(rec);
        row.median.f1 = median(f1);
        table.rows.push_back(std::move(row));
    }
    return table;
}

void tune_allocator() {
#if defined(__GLIBC__)
    mallopt(M_MMAP_THRESHOLD, 256 * 1024 * 1024);
    mallopt(M_TRIM_THRESHOLD, 512 * 1024 * 1024);
#endif
}

}  // namespace frostnet
