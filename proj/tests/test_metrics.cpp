#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "frostnet/metrics.hpp"
#include "test_support.hpp"

using namespace frostnet;
using namespace frostnet::testing;

namespace {

// Percentages as published, rounded to one decimal.
struct Published {
    double accuracy, precision, recall, f1;
};

void check_published(const ConfusionMatrix& cm, const Published& p) {
    const auto prf = precision_recall_f1(cm);
    CHECK(std::abs(100 * accuracy(cm) - p.accuracy) <= 0.1);
    CHECK(std::abs(100 * prf.precision - p.precision) <= 0.1);
    CHECK(std::abs(100 * prf.recall - p.recall) <= 0.1);
    CHECK(std::abs(100 * prf.f1 - p.f1) <= 0.1);
}

}  // namespace

TEST_CASE("confusion tallies") {
    const std::vector<int> pred{1, 0}, actual{1, 0};
    const auto cm = confusion(pred, actual);
    CHECK(cm == ConfusionMatrix{1, 0, 0, 1});

    const std::vector<int> zeros{0, 0, 0, 0}, truth{0, 1, 1, 0};
    const auto cz = confusion(zeros, truth);
    CHECK(cz.n01 == 0);
    CHECK(cz.n11 == 0);
    CHECK(cz.n00 == 2);
    CHECK(cz.n10 == 2);

    const std::vector<int> short_pred{1};
    CHECK_THROWS_AS(confusion(short_pred, actual), std::invalid_argument);
    const std::vector<int> empty;
    CHECK_THROWS_AS(confusion(empty, empty), std::invalid_argument);
    const std::vector<int> bad{2, 0};
    CHECK_THROWS_AS(confusion(bad, actual), std::invalid_argument);
}

TEST_CASE("confusion reproduces the CSBL table from per-sample predictions") {
    std::vector<int> pred, actual;
    auto add = [&](int a, int p, int count) {
        for (int i = 0; i < count; ++i) {
            actual.push_back(a);
            pred.push_back(p);
        }
    };
    add(0, 0, 269);
    add(0, 1, 13);
    add(1, 0, 4);
    add(1, 1, 14);
    CHECK(confusion(pred, actual) == ConfusionMatrix{269, 13, 4, 14});
}

TEST_CASE("CSBL column reproduces the published metrics") {
    const ConfusionMatrix cm{269, 13, 4, 14};
    CHECK(std::abs(accuracy(cm) - 283.0 / 300.0) < 1e-15);
    const auto prf = precision_recall_f1(cm);
    CHECK(std::abs(prf.precision - 14.0 / 27.0) < 1e-15);
    CHECK(std::abs(prf.recall - 14.0 / 18.0) < 1e-15);
    CHECK(std::abs(prf.f1 - 28.0 / 45.0) < 1e-15);
    check_published(cm, {94.3, 51.9, 77.8, 62.3});
}

TEST_CASE("the other two published confusion columns match each other's rows") {
    // Column labelled Baseline reproduces the row labelled GAN, and vice versa.
    check_published({278, 4, 13, 5}, {94.3, 55.6, 27.8, 37.1});
    check_published({259, 23, 8, 10}, {89.7, 30.3, 55.6, 39.2});
}

TEST_CASE("accuracy edge cases") {
    CHECK(accuracy({5, 0, 0, 3}) == 1.0);
    CHECK(accuracy({0, 5, 3, 0}) == 0.0);
    CHECK_THROWS_AS(accuracy({}), std::invalid_argument);
}

TEST_CASE("degenerate ratios are zero") {
    const auto none = precision_recall_f1({10, 0, 0, 0});
    CHECK(none.precision == 0.0);
    CHECK(none.recall == 0.0);
    CHECK(none.f1 == 0.0);
    const auto missed = precision_recall_f1({10, 0, 4, 0});
    CHECK(missed.recall == 0.0);
    CHECK(missed.f1 == 0.0);
}

TEST_CASE("metric properties on random confusions") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 2000; ++i) {
        ConfusionMatrix cm{random_size(rng, 0, 40), random_size(rng, 0, 40),
                           random_size(rng, 0, 40), random_size(rng, 0, 40)};
        if (cm.total() == 0) continue;
        const auto prf = precision_recall_f1(cm);
        CHECK(prf.f1 >= 0.0);
        CHECK(prf.f1 <= 1.0);
        CHECK((prf.f1 == 0.0) == (prf.precision == 0.0 || prf.recall == 0.0));
        const double correct = accuracy(cm) * static_cast<double>(cm.total());
        CHECK(std::abs(correct - static_cast<double>(cm.n00 + cm.n11)) < 1e-9);
        if (prf.precision == prf.recall) CHECK(prf.f1 == doctest::Approx(prf.precision));
    }
}

TEST_CASE("predict_labels takes the argmax and breaks ties toward class 0") {
    const auto probs = NumericArray::matrix({{0.9, 0.1}, {0.2, 0.8}, {0.5, 0.5}});
    CHECK(predict_labels(probs) == std::vector<int>{0, 1, 0});
    CHECK_THROWS_AS(predict_labels(NumericArray::vector({0.5, 0.5})), std::invalid_argument);
}
