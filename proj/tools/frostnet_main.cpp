// frostnet: train, evaluate and ablate the cost-sensitive 1-D CNN frost detector.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "frostnet/experiment.hpp"

namespace fs = std::filesystem;
using namespace frostnet;

namespace {

struct RunFlags {
    std::string config_path;
    std::string data_path;
    bool synth = false;
    std::string loss_mode;
    std::optional<std::uint64_t> seed;
    std::string out = "out";
    std::string preset;
    std::optional<std::size_t> k;
    std::optional<double> max_ratio;
    std::optional<double> c;
    std::optional<std::size_t> epochs;
    std::optional<std::size_t> batch_size;
    bool verbose = false;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
    cmd->add_option("--config", f.config_path, "JSON experiment config")->check(CLI::ExistingFile);
    cmd->add_option("--data", f.data_path, "CSV dataset (bands..., label)");
    cmd->add_flag("--synth", f.synth, "Use the synthetic generator instead of --data");
    cmd->add_option("--loss-mode", f.loss_mode, "ce, alpha, r or csbl");
    cmd->add_option("--seed", f.seed, "Run seed (split, init, shuffling)");
    cmd->add_option("--out", f.out, "Output directory");
    cmd->add_option("--preset", f.preset, "paper or desk")->check(CLI::IsMember({"paper", "desk"}));
    cmd->add_option("--k", f.k, "Neighbours for the KNN baseline");
    cmd->add_option("--max-ratio", f.max_ratio, "Majority/minority ratio bound for replication");
    cmd->add_option("--c", f.c, "Class-weight hyperparameter c");
    cmd->add_option("--epochs", f.epochs, "Training epochs");
    cmd->add_option("--batch-size", f.batch_size, "Mini-batch size");
    cmd->add_flag("--verbose", f.verbose, "Per-epoch progress on stderr");
}

ExperimentConfig resolve_config(const RunFlags& f) {
    ExperimentConfig config;
    if (f.preset == "desk") apply_desk_preset(config);
    if (!f.config_path.empty()) config = load_config(f.config_path, config);
    if (f.preset == "desk" && config.preset != "desk") apply_desk_preset(config);
    if (!f.data_path.empty()) config.data_path = f.data_path;
    if (f.synth) config.data_path.reset();
    if (!f.loss_mode.empty()) config.loss_mode = parse_loss_mode(f.loss_mode);
    if (f.seed) config.train.seed = *f.seed;
    if (f.k) config.knn_k = *f.k;
    if (f.max_ratio) config.max_ratio = *f.max_ratio;
    if (f.c) config.train.c = *f.c;
    if (f.epochs) config.train.epochs = *f.epochs;
    if (f.batch_size) config.train.batch_size = *f.batch_size;
    config.validate();
    return config;
}

void emit(const ExperimentReport& report, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    write_file(out_dir / "report.json", to_json(report).dump(2) + "\n");
    const std::string text = render_text(report);
    write_file(out_dir / "report.txt", text);
    std::cout << text;
}

}  // namespace

int main(int argc, char** argv) {
    frostnet::tune_allocator();
    CLI::App app{"Cost-sensitive 1-D CNN for imbalanced spectral classification"};
    app.require_subcommand(1);

    RunFlags train_flags, ablate_flags, baseline_flags;
    auto* train = app.add_subcommand("train", "Train one model and evaluate it on the held-out split");
    add_run_flags(train, train_flags);

    auto* ablate = app.add_subcommand("ablate", "Train all four loss modes for each seed");
    add_run_flags(ablate, ablate_flags);
    std::vector<std::uint64_t> seeds{0, 1, 2};
    unsigned jobs = 1;
    ablate->add_option("--seeds", seeds, "Seeds, comma separated")->delimiter(',');
    ablate->add_option("--jobs", jobs, "Cells trained concurrently");

    auto* baseline = app.add_subcommand("baseline", "KNN on the same split and standardization");
    add_run_flags(baseline, baseline_flags);

    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a CSV dataset");
    std::string checkpoint, eval_data, eval_out = "out";
    eval->add_option("--checkpoint", checkpoint, "Checkpoint written by train")->required();
    eval->add_option("--data", eval_data, "CSV dataset")->required();
    eval->add_option("--out", eval_out, "Output directory");

    auto* synth = app.add_subcommand("synth", "Write a synthetic dataset as CSV");
    std::string synth_config, synth_preset, synth_out = "synth.csv";
    std::optional<std::size_t> n0, n1, dim;
    std::optional<double> noise;
    std::optional<std::uint64_t> synth_seed;
    synth->add_option("--config", synth_config, "JSON config whose synth block is used")
        ->check(CLI::ExistingFile);
    synth->add_option("--preset", synth_preset, "paper or desk")->check(CLI::IsMember({"paper", "desk"}));
    synth->add_option("--n0", n0, "Healthy samples");
    synth->add_option("--n1", n1, "Frosted samples");
    synth->add_option("--dim", dim, "Spectral bands");
    synth->add_option("--noise", noise, "Noise scale");
    synth->add_option("--seed", synth_seed, "Generator seed");
    synth->add_option("--out", synth_out, "Output CSV path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train) {
            const ExperimentConfig config = resolve_config(train_flags);
            const TrainResult result = run_training(config, train_flags.verbose);
            write_training_outputs(result, train_flags.out);
            std::cout << "run " << result.report.run_id << " -> " << train_flags.out << "\n"
                      << "accuracy " << result.report.test.accuracy << "  precision "
                      << result.report.test.precision << "  recall " << result.report.test.recall
                      << "  f1 " << result.report.test.f1 << "\n";
        } else if (*ablate) {
            const ExperimentConfig config = resolve_config(ablate_flags);
            const fs::path out = ablate_flags.out;
            const AblationTable table = run_ablation(config, seeds, out, jobs, ablate_flags.verbose);
            fs::create_directories(out);
            write_file(out / "ablation.json", to_json(table).dump(2) + "\n");
            const std::string text = render_text(table);
            write_file(out / "ablation.txt", text);
            std::cout << text;
        } else if (*baseline) {
            const ExperimentConfig config = resolve_config(baseline_flags);
            emit(run_baseline(config), baseline_flags.out);
        } else if (*eval) {
            emit(evaluate_checkpoint(checkpoint, eval_data), eval_out);
        } else if (*synth) {
            ExperimentConfig config;
            if (synth_preset == "desk") apply_desk_preset(config);
            if (!synth_config.empty()) config = load_config(synth_config, config);
            SynthSpec spec = config.synth;
            if (n0) spec.n_per_class[0] = *n0;
            if (n1) spec.n_per_class[1] = *n1;
            if (dim) spec.dim = *dim;
            if (noise) spec.noise_scale = *noise;
            if (synth_seed) spec.seed = *synth_seed;
            const Dataset ds = synth_generate(spec);
            save_csv(ds, synth_out);
            std::cout << "wrote " << ds.size() << " samples x " << ds.dim() << " bands to "
                      << synth_out << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
