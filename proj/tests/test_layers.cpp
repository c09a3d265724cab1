#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <utility>

#include "frostnet/layers.hpp"
#include "test_support.hpp"

using namespace frostnet;
using namespace frostnet::testing;

namespace {
constexpr int kTrials = 100;
}

TEST_CASE("conv1d sliding dot product") {
    const auto out = conv1d(NumericArray::matrix({{1, 2, 3, 4}}),
                            NumericArray({1, 1, 3}, {1, 0, -1}), NumericArray::vector({0}));
    CHECK(out.shape() == Shape{1, 2});
    CHECK(out[0] == -2.0);
    CHECK(out[1] == -2.0);
}

TEST_CASE("conv1d zero kernel gives zero output") {
    std::mt19937_64 rng(3);
    const auto x = random_array({2, 20}, rng);
    const auto out = conv1d(x, NumericArray({4, 2, 5}, 0.0), NumericArray({4}, 0.0));
    for (double v : out.values()) CHECK(v == 0.0);
}

TEST_CASE("conv1d full-length band input shrinks by K-1") {
    const auto out = conv1d(NumericArray({1, 2151}, 0.5), NumericArray({2, 1, 7}, 0.1),
                            NumericArray({2}, 0.0));
    CHECK(out.shape() == Shape{2, 2145});
}

TEST_CASE("conv1d rejects bad shapes and names the dimensions") {
    CHECK_THROWS_WITH_AS(conv1d(NumericArray({1, 3}), NumericArray({1, 1, 5}), NumericArray({1})),
                         doctest::Contains("shorter than kernel width 5"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(conv1d(NumericArray({2, 8}), NumericArray({1, 3, 3}), NumericArray({1})),
                         doctest::Contains("3 input channels, input has 2"), std::invalid_argument);
}

TEST_CASE("conv1d batched input equals per-sample calls") {
    std::mt19937_64 rng(9);
    const auto x = random_array({3, 2, 11}, rng);
    const auto k = random_array({4, 2, 3}, rng);
    const auto b = random_array({4}, rng);
    const auto batched = conv1d(x, k, b);
    for (std::size_t n = 0; n < 3; ++n) {
        NumericArray sample({2, 11});
        std::copy_n(x.data() + n * 22, 22, sample.data());
        const auto single = conv1d(sample, k, b);
        for (std::size_t i = 0; i < single.size(); ++i) CHECK(batched[n * single.size() + i] == single[i]);
    }
}

TEST_CASE("conv1d is linear in input and kernels") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t c = random_size(rng, 1, 3), len = random_size(rng, 4, 16);
        const std::size_t width = random_size(rng, 1, len), out_c = random_size(rng, 1, 3);
        const auto x = random_array({c, len}, rng), y = random_array({c, len}, rng);
        const auto k = random_array({out_c, c, width}, rng), k2 = random_array({out_c, c, width}, rng);
        const NumericArray zero_bias({out_c}, 0.0);
        const double a = std::uniform_real_distribution<double>(-3, 3)(rng);

        const auto scaled = conv1d(x * a, k, zero_bias);
        const auto ref = conv1d(x, k, zero_bias);
        const auto sum = conv1d(x + y, k, zero_bias);
        const auto sum_ref = ref + conv1d(y, k, zero_bias);
        const auto ksum = conv1d(x, k + k2, zero_bias);
        const auto ksum_ref = ref + conv1d(x, k2, zero_bias);
        for (std::size_t i = 0; i < ref.size(); ++i) {
            CHECK(std::abs(scaled[i] - a * ref[i]) <= 1e-12);
            CHECK(std::abs(sum[i] - sum_ref[i]) <= 1e-12);
            CHECK(std::abs(ksum[i] - ksum_ref[i]) <= 1e-12);
        }
    }
}

TEST_CASE("maxpool1d picks window maxima") {
    const auto r = maxpool1d(NumericArray::matrix({{3, 1, 4, 1, 5, 9}}), 2);
    CHECK(r.output == NumericArray::matrix({{3, 4, 9}}));
}

TEST_CASE("maxpool1d constant input stays constant") {
    const auto r = maxpool1d(NumericArray({2, 10}, 2.5), 3);
    for (double v : r.output.values()) CHECK(v == 2.5);
}

TEST_CASE("maxpool1d drops the trailing remainder") {
    const auto r = maxpool1d(NumericArray({1, 2145}, 0.0), 9);
    CHECK(r.output.shape() == Shape{1, 238});
    CHECK_THROWS_AS(maxpool1d(NumericArray({1, 4}), 5), std::invalid_argument);
}

TEST_CASE("maxpool1d output length is floor(L/W) for every window") {
    for (std::size_t len = 1; len <= 40; ++len)
        for (std::size_t w = 1; w <= len; ++w)
            CHECK(maxpool1d(NumericArray({2, len}, 1.0), w).output.dim(1) == len / w);
}

TEST_CASE("maxpool1d routes gradient to the first maximum on ties") {
    const NumericArray x = NumericArray::matrix({{2, 2, 1, 7}});
    const auto r = maxpool1d(x, 2);
    const auto dx = maxpool1d_backward(NumericArray::matrix({{5, 6}}), r.argmax, x.shape());
    CHECK(dx == NumericArray::matrix({{5, 0, 0, 6}}));
}

TEST_CASE("batchnorm1d examples") {
    SUBCASE("constant batch normalizes to zero") {
        BatchNormStats stats;
        const auto y = batchnorm1d(NumericArray({3, 2, 4}, 7.0), NumericArray({2}, 1.0),
                                   NumericArray({2}, 0.0), stats, Mode::train);
        for (double v : y.values()) CHECK(v == 0.0);
    }
    SUBCASE("gamma zero yields beta") {
        std::mt19937_64 rng(5);
        BatchNormStats stats;
        const auto y = batchnorm1d(random_array({4, 2, 3}, rng), NumericArray({2}, 0.0),
                                   NumericArray::vector({0.25, -1.5}), stats, Mode::train);
        for (std::size_t n = 0; n < 4; ++n)
            for (std::size_t t = 0; t < 3; ++t) {
                CHECK(y.at(n, 0, t) == 0.25);
                CHECK(y.at(n, 1, t) == -1.5);
            }
    }
    SUBCASE("two-sample batch") {
        BatchNormStats stats;
        const auto y = batchnorm1d(NumericArray({2, 1, 1}, {-1.0, 1.0}), NumericArray({1}, 1.0),
                                   NumericArray({1}, 0.0), stats, Mode::train);
        const double expected = 1.0 / std::sqrt(1.0 + 1e-5);  // 0.999995000037...
        CHECK(y[0] == doctest::Approx(-expected).epsilon(1e-14));
        CHECK(y[1] == doctest::Approx(expected).epsilon(1e-14));
        CHECK(std::abs(y[1] - 0.999995) < 1e-6);
        // Running stats: mean 0.9*0 + 0.1*0, var 0.9*1 + 0.1*2 (unbiased variance of {-1, 1}).
        CHECK(stats.mean[0] == 0.0);
        CHECK(stats.var[0] == doctest::Approx(1.1).epsilon(1e-15));
    }
}

TEST_CASE("batchnorm1d eval mode") {
    const NumericArray gamma({1}, 2.0), beta({1}, 1.0);
    BatchNormStats empty;
    CHECK_THROWS_AS(batchnorm1d(NumericArray({1, 1, 3}, 1.0), gamma, beta, empty, Mode::eval),
                    std::logic_error);
    BatchNormStats stats{NumericArray({1}, 1.0), NumericArray({1}, 4.0)};
    const auto y = batchnorm1d(NumericArray({1, 1, 1}, 3.0), gamma, beta, std::as_const(stats));
    CHECK(y[0] == doctest::Approx(2.0 * 2.0 / std::sqrt(4.0 + 1e-5) + 1.0));
    CHECK(stats.var[0] == 4.0);
}

TEST_CASE("batchnorm1d train mode needs two values per channel") {
    BatchNormStats stats;
    CHECK_THROWS_AS(batchnorm1d(NumericArray({1, 2, 1}, 1.0), NumericArray({2}, 1.0),
                                NumericArray({2}, 0.0), stats, Mode::train),
                    std::invalid_argument);
}

TEST_CASE("relu and its gradient") {
    CHECK(relu(NumericArray::vector({-1, 0, 2})) == NumericArray::vector({0, 0, 2}));
    const auto negative = relu(NumericArray::vector({-3, -2, -0.5}));
    for (double v : negative.values()) CHECK(v == 0.0);
    CHECK(relu_backward(NumericArray::vector({-1, 2}), NumericArray::vector({5, 5})) ==
          NumericArray::vector({0, 5}));
    CHECK(relu_backward(NumericArray::vector({0.0}), NumericArray::vector({1.0}))[0] == 0.0);
}

TEST_CASE("dense examples") {
    CHECK(dense(NumericArray::matrix({{1, 2}}), NumericArray::matrix({{1, 0}, {0, 1}}),
                NumericArray::vector({0, 0})) == NumericArray::matrix({{1, 2}}));
    CHECK(dense(NumericArray::matrix({{1, 1}}), NumericArray::matrix({{2}, {3}}),
                NumericArray::vector({1})) == NumericArray::matrix({{6}}));
    CHECK(dense(NumericArray({3, 4}, 0.0), NumericArray({4, 2}, 0.7), NumericArray::vector({1.5, -2})) ==
          NumericArray::matrix({{1.5, -2}, {1.5, -2}, {1.5, -2}}));
    CHECK_THROWS_AS(dense(NumericArray({1, 3}), NumericArray({2, 2}), NumericArray({2})),
                    std::invalid_argument);
}

TEST_CASE("softmax examples") {
    CHECK(softmax(NumericArray::matrix({{0, 0}})) == NumericArray::matrix({{0.5, 0.5}}));
    CHECK(softmax(NumericArray::matrix({{1000, 1000}})) == NumericArray::matrix({{0.5, 0.5}}));
    const auto p = softmax(NumericArray::matrix({{0, std::log(3.0)}}));
    CHECK(p[0] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(p[1] == doctest::Approx(0.75).epsilon(1e-15));
    CHECK_THROWS_AS(softmax(NumericArray::matrix({{1}})), std::invalid_argument);
}

TEST_CASE("softmax rows sum to one for large logits") {
    std::mt19937_64 rng(21);
    const auto logits = random_array({200, 5}, rng, -1e4, 1e4);
    const auto p = softmax(logits);
    for (std::size_t i = 0; i < 200; ++i) {
        double s = 0.0;
        for (std::size_t c = 0; c < 5; ++c) {
            CHECK(p.at(i, c) >= 0.0);
            s += p.at(i, c);
        }
        CHECK(std::abs(s - 1.0) <= 1e-12);
    }
}

TEST_CASE("finite_difference_gradient examples") {
    const auto sq = [](const NumericArray& x) { return dot(x, x); };
    const auto g = finite_difference_gradient(sq, NumericArray::vector({1, 2}), 1e-5);
    CHECK(g[0] == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(g[1] == doctest::Approx(4.0).epsilon(1e-8));

    const auto constant = finite_difference_gradient([](const NumericArray&) { return 3.0; },
                                                     NumericArray::vector({1, 2, 3}));
    for (double v : constant.values()) CHECK(v == 0.0);

    const auto v = NumericArray::vector({0.5, -2, 7});
    const auto lin = finite_difference_gradient([&](const NumericArray& x) { return dot(x, v); },
                                                NumericArray::vector({1, 1, 1}));
    for (std::size_t i = 0; i < 3; ++i) CHECK(lin[i] == doctest::Approx(v[i]).epsilon(1e-8));
}

TEST_CASE("layer operations reject non-finite input") {
    NumericArray x({1, 4}, 1.0);
    x[2] = std::nan("");
    CHECK_THROWS_AS(conv1d(x, NumericArray({1, 1, 2}, 1.0), NumericArray({1})), std::domain_error);
    CHECK_THROWS_AS(relu(x), std::domain_error);
}

// Randomized gradient checks. Each layer is wrapped as f = <layer(x), G> for a random
// upstream G; the backward pass with d_output = G must match central differences.

TEST_CASE("conv1d gradients match finite differences") {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < kTrials; ++trial) {
        const std::size_t n = random_size(rng, 1, 3), c = random_size(rng, 1, 3);
        const std::size_t len = random_size(rng, 3, 16), width = random_size(rng, 1, std::min<std::size_t>(len, 5));
        const std::size_t out_c = random_size(rng, 1, 3);
        const auto x = random_array({n, c, len}, rng);
        const auto k = random_array({out_c, c, width}, rng);
        const auto b = random_array({out_c}, rng);
        const auto g = random_array({n, out_c, len - width + 1}, rng);
        const auto grads = conv1d_backward(x, k, g);

        auto fx = [&](const NumericArray& v) { return dot(conv1d(v, k, b), g); };
        auto fk = [&](const NumericArray& v) { return dot(conv1d(x, v, b), g); };
        auto fb = [&](const NumericArray& v) { return dot(conv1d(x, k, v), g); };
        const auto cx = compare_gradients(grads.d_input, finite_difference_gradient(fx, x));
        const auto ck = compare_gradients(grads.d_params.at("kernels"), finite_difference_gradient(fk, k));
        const auto cb = compare_gradients(grads.d_params.at("bias"), finite_difference_gradient(fb, b));
        CHECK_MESSAGE(cx.failures == 0, cx.first_failure);
        CHECK_MESSAGE(ck.failures == 0, ck.first_failure);
        CHECK_MESSAGE(cb.failures == 0, cb.first_failure);
    }
}

TEST_CASE("maxpool1d gradients match finite differences") {
    std::mt19937_64 rng(102);
    for (int trial = 0; trial < kTrials; ++trial) {
        const std::size_t c = random_size(rng, 1, 3), len = random_size(rng, 2, 16);
        const std::size_t w = random_size(rng, 1, len);
        const auto x = random_array({c, len}, rng);
        const auto r = maxpool1d(x, w);
        const auto g = random_array(r.output.shape(), rng);
        auto f = [&](const NumericArray& v) { return dot(maxpool1d(v, w).output, g); };
        const auto check = compare_gradients(maxpool1d_backward(g, r.argmax, x.shape()),
                                             finite_difference_gradient(f, x));
        CHECK_MESSAGE(check.failures == 0, check.first_failure);
    }
}

TEST_CASE("batchnorm1d gradients match finite differences") {
    std::mt19937_64 rng(103);
    for (int trial = 0; trial < kTrials; ++trial) {
        const std::size_t n = random_size(rng, 1, 4), c = random_size(rng, 1, 3);
        const std::size_t len = random_size(rng, n == 1 ? 2 : 1, 16);
        const auto x = random_array({n, c, len}, rng);
        const auto gamma = random_array({c}, rng, 0.5, 1.5);
        const auto beta = random_array({c}, rng);
        const auto g = random_array({n, c, len}, rng);

        BatchNormStats stats;
        BatchNormCache cache;
        batchnorm1d(x, gamma, beta, stats, Mode::train, &cache);
        const auto grads = batchnorm1d_backward(cache, gamma, g);

        auto run = [&](const NumericArray& xv, const NumericArray& gv, const NumericArray& bv) {
            BatchNormStats scratch;
            return dot(batchnorm1d(xv, gv, bv, scratch, Mode::train), g);
        };
        const auto cx = compare_gradients(
            grads.d_input, finite_difference_gradient([&](const NumericArray& v) { return run(v, gamma, beta); }, x));
        const auto cg = compare_gradients(
            grads.d_params.at("gamma"),
            finite_difference_gradient([&](const NumericArray& v) { return run(x, v, beta); }, gamma));
        const auto cb = compare_gradients(
            grads.d_params.at("beta"),
            finite_difference_gradient([&](const NumericArray& v) { return run(x, gamma, v); }, beta));
        CHECK_MESSAGE(cx.failures == 0, cx.first_failure);
        CHECK_MESSAGE(cg.failures == 0, cg.first_failure);
        CHECK_MESSAGE(cb.failures == 0, cb.first_failure);
    }
}

TEST_CASE("relu gradients match finite differences") {
    std::mt19937_64 rng(104);
    for (int trial = 0; trial < kTrials; ++trial) {
        const auto x = random_array({random_size(rng, 1, 3), random_size(rng, 1, 16)}, rng);
        const auto g = random_array(x.shape(), rng);
        auto f = [&](const NumericArray& v) { return dot(relu(v), g); };
        const auto check = compare_gradients(relu_backward(x, g), finite_difference_gradient(f, x));
        CHECK_MESSAGE(check.failures == 0, check.first_failure);
    }
}

TEST_CASE("dense gradients match finite differences") {
    std::mt19937_64 rng(105);
    for (int trial = 0; trial < kTrials; ++trial) {
        const std::size_t n = random_size(rng, 1, 4), f_in = random_size(rng, 1, 8), o = random_size(rng, 1, 4);
        const auto x = random_array({n, f_in}, rng);
        const auto w = random_array({f_in, o}, rng);
        const auto b = random_array({o}, rng);
        const auto g = random_array({n, o}, rng);
        const auto grads = dense_backward(x, w, g);
        const auto cx = compare_gradients(
            grads.d_input, finite_difference_gradient([&](const NumericArray& v) { return dot(dense(v, w, b), g); }, x));
        const auto cw = compare_gradients(
            grads.d_params.at("weights"),
            finite_difference_gradient([&](const NumericArray& v) { return dot(dense(x, v, b), g); }, w));
        const auto cb = compare_gradients(
            grads.d_params.at("bias"),
            finite_difference_gradient([&](const NumericArray& v) { return dot(dense(x, w, v), g); }, b));
        CHECK_MESSAGE(cx.failures == 0, cx.first_failure);
        CHECK_MESSAGE(cw.failures == 0, cw.first_failure);
        CHECK_MESSAGE(cb.failures == 0, cb.first_failure);
    }
}

TEST_CASE("train-mode batchnorm only touches running statistics") {
    std::mt19937_64 rng(7);
    const auto x = random_array({3, 2, 5}, rng);
    const auto x_copy = x;
    const auto gamma = random_array({2}, rng), beta = random_array({2}, rng);
    BatchNormStats stats = BatchNormStats::identity(2);
    const auto y1 = batchnorm1d(x, gamma, beta, stats, Mode::train);
    const auto y2 = batchnorm1d(x, gamma, beta, stats, Mode::train);
    CHECK(x == x_copy);
    CHECK(y1 == y2);
    CHECK_FALSE(stats.mean == NumericArray({2}, 0.0));
}
