#include <iomanip>
#include <sstream>

#include "frostnet/experiment.hpp"

namespace frostnet {

using nlohmann::json;

namespace {

json confusion_json(const ConfusionMatrix& cm) {
    return {{"n00", cm.n00}, {"n01", cm.n01}, {"n10", cm.n10}, {"n11", cm.n11}};
}

json metrics_json(const MetricBlock& m, bool with_confusion = true) {
    json j = {{"accuracy", m.accuracy}, {"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
    if (with_confusion) j["confusion"] = confusion_json(m.confusion);
    return j;
}

std::string pct(double v) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(1) << 100.0 * v;
    return out.str();
}

const char* row_label(LossMode mode) {
    switch (mode) {
        case LossMode::plain_ce: return "Baseline";
        case LossMode::alpha_only: return "+ alpha_i";
        case LossMode::r_only: return "+ R_i";
        case LossMode::full_csbl: return "CSBL";
    }
    return "?";
}

}  // namespace

json to_json(const ExperimentReport& r) {
    json epochs = json::array();
    for (const EpochLog& e : r.epochs)
        epochs.push_back({{"epoch", e.epoch},
                          {"lr", e.lr},
                          {"loss", e.loss},
                          {"r1", e.r1},
                          {"w0", e.w0},
                          {"w1", e.w1},
                          {"train_confusion", confusion_json(e.train_confusion)}});
    json j = {{"run_id", r.run_id},
              {"method", r.method},
              {"seed", r.seed},
              {"config", r.config},
              {"train_counts", r.train_counts},
              {"test_counts", r.test_counts},
              {"test", metrics_json(r.test)},
              {"wall_clock_seconds", r.wall_clock_seconds}};
    if (r.method == "cnn" && r.run_id != "eval") {
        j["loss_mode"] = to_string(r.loss_mode);
        j["alpha"] = r.alpha;
        j["epochs"] = std::move(epochs);
    }
    return j;
}

std::string render_text(const ExperimentReport& r) {
    std::ostringstream out;
    out << "run      " << r.run_id << "\n"
        << "method   " << r.method << "\n";
    if (r.method == "cnn" && r.run_id != "eval") {
        out << "loss     " << to_string(r.loss_mode) << "\n"
            << "seed     " << r.seed << "\n"
            << "alpha    " << r.alpha[0] << " " << r.alpha[1] << "\n";
    }
    out << "train    " << r.train_counts[0] << " healthy / " << r.train_counts[1] << " frosted\n"
        << "test     " << r.test_counts[0] << " healthy / " << r.test_counts[1] << " frosted\n\n";

    if (!r.epochs.empty()) {
        out << std::setw(6) << "epoch" << std::setw(12) << "lr" << std::setw(12) << "loss"
            << std::setw(9) << "R_1" << std::setw(10) << "W_0" << std::setw(10) << "W_1"
            << std::setw(7) << "n00" << std::setw(6) << "n01" << std::setw(6) << "n10"
            << std::setw(6) << "n11" << "\n";
        for (const EpochLog& e : r.epochs) {
            out << std::setw(6) << e.epoch << std::setw(12) << std::scientific << std::setprecision(2)
                << e.lr << std::setw(12) << std::fixed << std::setprecision(6) << e.loss
                << std::setw(9) << std::setprecision(4) << e.r1 << std::setw(10) << e.w0
                << std::setw(10) << e.w1 << std::setw(7) << e.train_confusion.n00 << std::setw(6)
                << e.train_confusion.n01 << std::setw(6) << e.train_confusion.n10 << std::setw(6)
                << e.train_confusion.n11 << "\n";
        }
        out << "\n";
    }

    const ConfusionMatrix& cm = r.test.confusion;
    out << "test confusion   n00 " << cm.n00 << "  n01 " << cm.n01 << "  n10 " << cm.n10 << "  n11 "
        << cm.n11 << "\n"
        << std::left << std::setw(12) << "Accuracy/%" << std::setw(8) << "P/%" << std::setw(8)
        << "R/%" << "F1/%\n"
        << std::setw(12) << pct(r.test.accuracy) << std::setw(8) << pct(r.test.precision)
        << std::setw(8) << pct(r.test.recall) << pct(r.test.f1) << "\n";
    return out.str();
}

json to_json(const AblationTable& table) {
    json rows = json::array();
    for (const AblationRow& row : table.rows) {
        json per_seed = json::array();
        for (std::size_t i = 0; i < row.per_seed.size(); ++i) {
            json m = metrics_json(row.per_seed[i]);
            m["seed"] = row.seeds[i];
            per_seed.push_back(std::move(m));
        }
        rows.push_back({{"mode", to_string(row.mode)},
                        {"label", row_label(row.mode)},
                        {"median", metrics_json(row.median, false)},
                        {"per_seed", std::move(per_seed)}});
    }
    return {{"rows", std::move(rows)}};
}

std::string render_text(const AblationTable& table) {
    std::ostringstream out;
    const std::size_t seeds = table.rows.empty() ? 0 : table.rows.front().seeds.size();
    out << "Ablation (median over " << seeds << " seed" << (seeds == 1 ? "" : "s") << ")\n"
        << std::left << std::setw(12) << "Method" << std::setw(12) << "Accuracy/%" << std::setw(8)
        << "P/%" << std::setw(8) << "R/%" << "F1/%\n";
    for (const AblationRow& row : table.rows)
        out << std::setw(12) << row_label(row.mode) << std::setw(12) << pct(row.median.accuracy)
            << std::setw(8) << pct(row.median.precision) << std::setw(8) << pct(row.median.recall)
            << pct(row.median.f1) << "\n";
    out << "\nPer seed\n";
    for (const AblationRow& row : table.rows)
        for (std::size_t i = 0; i < row.per_seed.size(); ++i) {
            const MetricBlock& m = row.per_seed[i];
            out << std::setw(12) << row_label(row.mode) << "seed " << std::setw(6) << row.seeds[i]
                << std::setw(8) << pct(m.accuracy) << std::setw(8) << pct(m.precision)
                << std::setw(8) << pct(m.recall) << pct(m.f1) << "\n";
        }
    return out.str();
}

}  // namespace frostnet
