#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "frostnet/experiment.hpp"

using namespace frostnet;
namespace fs = std::filesystem;

namespace {

// A few-second experiment: 32 bands, 100 samples, 6 epochs.
ExperimentConfig small_config(LossMode mode = LossMode::full_csbl, std::uint64_t seed = 0) {
    ExperimentConfig c;
    c.arch.input_length = 32;
    c.arch.conv_filters = {3, 4, 2};
    c.arch.conv_kernel = 3;
    c.arch.pool_windows = {2, 2, 2};
    c.synth.dim = 32;
    c.synth.n_per_class = {80, 20};
    c.train.epochs = 6;
    c.train.batch_size = 32;
    c.train.lr_decay_every = 3;
    c.train.seed = seed;
    c.loss_mode = mode;
    return c;
}

fs::path temp_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "frostnet_test_experiment" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(FROSTNET_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("loss mode names") {
    CHECK(parse_loss_mode("ce") == LossMode::plain_ce);
    CHECK(parse_loss_mode("alpha") == LossMode::alpha_only);
    CHECK(parse_loss_mode("r") == LossMode::r_only);
    CHECK(parse_loss_mode("csbl") == LossMode::full_csbl);
    for (auto m : ablation_modes()) CHECK(parse_loss_mode(to_string(m)) == m);
    CHECK_THROWS_AS(parse_loss_mode("focal"), std::invalid_argument);
}

TEST_CASE("config JSON round trip and presets") {
    auto c = small_config(LossMode::r_only, 9);
    c.force_r = 0.25;
    c.data_path = "x.csv";
    const auto back = config_from_json(to_json(c));
    CHECK(to_json(back) == to_json(c));
    CHECK(back.arch == c.arch);
    CHECK(back.loss_mode == LossMode::r_only);
    CHECK(*back.force_r == 0.25);

    const auto desk = config_from_json(nlohmann::json{{"preset", "desk"}, {"seed", 3}});
    CHECK(desk.preset == "desk");
    CHECK(desk.arch.input_length == 256);
    CHECK(desk.synth.dim == 256);
    CHECK(desk.train.epochs == 150);
    CHECK(desk.train.lr_decay_every == 30);
    CHECK(desk.train.seed == 3);
    CHECK_NOTHROW(desk.validate());
    CHECK_NOTHROW(ExperimentConfig{}.validate());

    CHECK_THROWS_AS(config_from_json(nlohmann::json{{"preset", "huge"}}), std::invalid_argument);
    CHECK_THROWS_AS(config_from_json(nlohmann::json{{"train", {{"epochs", "many"}}}}),
                    std::invalid_argument);
    auto mismatch = small_config();
    mismatch.synth.dim = 40;
    CHECK_THROWS_AS(mismatch.validate(), std::invalid_argument);
}

TEST_CASE("a small CSBL run logs R starting at 1 and staying in [0, 1]") {
    const auto result = run_training(small_config());
    const auto& r = result.report;
    REQUIRE(r.epochs.size() == 6);
    CHECK(r.epochs[0].r1 == 1.0);
    for (const auto& e : r.epochs) {
        CHECK(e.r1 >= 0.0);
        CHECK(e.r1 <= 1.0);
        CHECK(std::isfinite(e.loss));
        CHECK(e.train_confusion.total() == result.data.train.size());
    }
    // R for epoch e+1 is derived from the confusion recorded at epoch e.
    for (std::size_t e = 0; e + 1 < r.epochs.size(); ++e)
        CHECK(r.epochs[e + 1].r1 == update_r(r.epochs[e].train_confusion, {0.0, r.epochs[e].r1})[1]);
    CHECK(r.epochs[3].lr == doctest::Approx(1e-4));

    const auto counts = result.data.train_replicated.class_counts();
    const auto alpha = compute_alpha(counts, 2.0);
    CHECK(r.alpha[0] == alpha[0]);
    CHECK(r.alpha[1] == alpha[1]);
    CHECK(r.test_counts == std::array<std::size_t, 2>{24, 6});
    CHECK(r.test.confusion.total() == 30);
    CHECK(r.run_id == "full_csbl-seed0");
}

TEST_CASE("each loss mode switches the intended factors") {
    const auto ce = run_training(small_config(LossMode::plain_ce)).report;
    for (const auto& e : ce.epochs) {
        CHECK(e.w0 == 1.0);
        CHECK(e.w1 == 1.0);
        CHECK(e.r1 == 0.0);
    }
    const auto alpha = run_training(small_config(LossMode::alpha_only)).report;
    for (const auto& e : alpha.epochs) {
        CHECK(e.r1 == 0.0);
        CHECK(e.w1 == alpha.alpha[1]);
    }
    const auto r = run_training(small_config(LossMode::r_only)).report;
    CHECK(r.alpha == ClassPair{1.0, 1.0});
    CHECK(r.epochs[0].w1 == doctest::Approx(std::exp(1.0)));
}

TEST_CASE("plain cross-entropy and unit-weight CSBL train identically") {
    auto csbl = small_config(LossMode::full_csbl, 4);
    csbl.force_alpha = 1.0;
    csbl.force_r = 0.0;
    const auto a = run_training(small_config(LossMode::plain_ce, 4));
    const auto b = run_training(csbl);
    CHECK(a.model == b.model);
    REQUIRE(a.report.epochs.size() == b.report.epochs.size());
    for (std::size_t e = 0; e < a.report.epochs.size(); ++e) {
        CHECK(a.report.epochs[e].loss == b.report.epochs[e].loss);
        CHECK(a.report.epochs[e].train_confusion == b.report.epochs[e].train_confusion);
    }
    CHECK(a.report.test.confusion == b.report.test.confusion);
}

TEST_CASE("training is deterministic in the seed") {
    const auto a = run_training(small_config(LossMode::full_csbl, 2));
    const auto b = run_training(small_config(LossMode::full_csbl, 2));
    CHECK(a.model == b.model);
    auto ja = to_json(a.report), jb = to_json(b.report);
    ja.erase("wall_clock_seconds");
    jb.erase("wall_clock_seconds");
    CHECK(ja == jb);
    const auto c = run_training(small_config(LossMode::full_csbl, 3));
    CHECK_FALSE(a.model == c.model);
}

TEST_CASE("a saved checkpoint re-evaluates to the reported test metrics") {
    const auto result = run_training(small_config(LossMode::full_csbl, 1));
    const auto dir = temp_dir("outputs");
    write_training_outputs(result, dir);
    for (const char* f : {"model.ckpt", "report.json", "report.txt", "test.csv"})
        CHECK(fs::exists(dir / f));

    const auto eval = evaluate_checkpoint(dir / "model.ckpt", dir / "test.csv");
    CHECK(eval.test.confusion == result.report.test.confusion);

    const auto json = nlohmann::json::parse(slurp(dir / "report.json"));
    CHECK(json.at("run_id") == "full_csbl-seed1");
    CHECK(json.at("epochs").size() == 6);
    CHECK(json.at("test").contains("f1"));
}

TEST_CASE("KNN baseline shares the CNN split") {
    const auto cfg = small_config(LossMode::full_csbl, 5);
    const auto knn = run_baseline(cfg);
    CHECK(knn.method == "knn");
    CHECK(knn.run_id == "knn-seed5");
    CHECK(knn.test_counts == prepare_data(cfg).test.class_counts());
    CHECK(knn.test.confusion.total() == 30);
}

TEST_CASE("ablation covers every mode and seed") {
    const auto dir = temp_dir("ablation");
    const auto table = run_ablation(small_config(), {0, 1, 2}, dir, 1);
    REQUIRE(table.rows.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(table.rows[i].mode == ablation_modes()[i]);
        REQUIRE(table.rows[i].per_seed.size() == 3);
        std::vector<double> f1;
        for (const auto& m : table.rows[i].per_seed) f1.push_back(m.f1);
        CHECK(table.rows[i].median.f1 == median(f1));
    }
    CHECK(fs::exists(dir / "r_only-seed2" / "report.json"));
    const auto text = render_text(table);
    for (const char* label : {"Baseline", "+ alpha_i", "+ R_i", "CSBL"})
        CHECK(text.find(label) != std::string::npos);

    // Parallel cells give the same results as serial ones.
    const auto parallel = run_ablation(small_config(), {0, 1, 2}, std::nullopt, 3);
    CHECK(to_json(parallel) == to_json(table));
}

TEST_CASE("median") {
    CHECK(median({3.0, 1.0, 2.0}) == 2.0);
    CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
    CHECK_THROWS(median({}));
}

TEST_CASE("CLI exit codes") {
    const auto dir = temp_dir("cli");
    const auto cfg = dir / "small.json";
    std::ofstream(cfg) << to_json(small_config()).dump();

    CHECK(run_cli("train --config " + cfg.string() + " --out " + (dir / "run").string()) == 0);
    CHECK(fs::exists(dir / "run" / "model.ckpt"));
    CHECK(run_cli("eval --checkpoint " + (dir / "run" / "model.ckpt").string() + " --data " +
                  (dir / "run" / "test.csv").string() + " --out " + (dir / "eval").string()) == 0);
    CHECK(run_cli("baseline --config " + cfg.string() + " --out " + (dir / "knn").string()) == 0);
    CHECK(run_cli("synth --config " + cfg.string() + " --out " + (dir / "synth.csv").string()) == 0);
    CHECK(fs::exists(dir / "synth.csv"));

    CHECK(run_cli("train --config " + cfg.string() + " --loss-mode focal") != 0);
    CHECK(run_cli("train --config " + (dir / "missing.json").string()) != 0);
    CHECK(run_cli("train --config " + cfg.string() + " --data " + (dir / "missing.csv").string()) != 0);
    CHECK(run_cli("eval --checkpoint " + cfg.string() + " --data " +
                  (dir / "run" / "test.csv").string()) != 0);
    CHECK(run_cli("bogus") != 0);

    auto tiny_input = small_config();
    tiny_input.arch.input_length = 6;
    tiny_input.synth.dim = 6;
    const auto bad = dir / "bad.json";
    std::ofstream(bad) << to_json(tiny_input).dump();
    CHECK(run_cli("train --config " + bad.string()) != 0);
}
