#include "doctest.h"

#include <cmath>
#include <numeric>

#include "faceattr/layers.hpp"
#include "oracles.hpp"

using namespace faceattr;

namespace {

TensorD iota_image(std::size_t h, std::size_t w) {
    TensorD t({1, h, w});
    std::iota(t.values().begin(), t.values().end(), 1.0);
    return t;
}

} // namespace

TEST_CASE("conv2d identity kernel with same padding reproduces the input") {
    Rng rng(1);
    TensorD input = oracle::random_tensor({1, 3, 3}, rng);
    TensorD kernel({1, 1, 3, 3});
    kernel.at(0, 4) = 1.0;
    TensorD out = conv2d(input, kernel, TensorD({1}), Padding::same);
    CHECK(out == input);
}

TEST_CASE("conv2d zero kernel annihilates") {
    Rng rng(2);
    TensorD input = oracle::random_tensor({3, 5, 7}, rng);
    TensorD out = conv2d(input, TensorD({4, 3, 3, 3}), TensorD({4}), Padding::same);
    CHECK(out.shape() == Shape{4, 5, 7});
    for (double v : out.values()) CHECK(v == 0.0);
}

TEST_CASE("conv2d valid all-ones kernel over 1..16 matches direct summation") {
    TensorD input = iota_image(4, 4);
    TensorD kernel({1, 1, 3, 3}, 1.0);
    TensorD bias({1});
    TensorD out = conv2d(input, kernel, bias, Padding::valid);
    TensorD expected = oracle::conv2d(input, kernel, bias, false);
    REQUIRE(out.shape() == Shape{1, 2, 2});
    CHECK(out == expected);
    // Frozen from the oracle: window sums of 1..16.
    CHECK(out[0] == 54.0);
    CHECK(out[1] == 63.0);
    CHECK(out[2] == 90.0);
    CHECK(out[3] == 99.0);
}

TEST_CASE("conv2d agrees with the direct oracle on random multi-channel inputs") {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t cin = 1 + rng.below(3), cout = 1 + rng.below(4);
        const std::size_t h = 3 + rng.below(6), w = 3 + rng.below(6);
        const std::size_t k = rng.below(2) ? 3 : 1;
        TensorD in = oracle::random_tensor({cin, h, w}, rng);
        TensorD ker = oracle::random_tensor({cout, cin, k, k}, rng);
        TensorD b = oracle::random_tensor({cout}, rng);
        for (bool same : {true, false}) {
            TensorD got = conv2d(in, ker, b, same ? Padding::same : Padding::valid);
            TensorD want = oracle::conv2d(in, ker, b, same);
            REQUIRE(got.shape() == want.shape());
            for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("conv2d rejects mismatched channels and even kernels") {
    CHECK_THROWS_AS(conv2d(TensorD({2, 4, 4}), TensorD({1, 3, 3, 3}), TensorD({1}), Padding::same), ShapeError);
    CHECK_THROWS_AS(conv2d(TensorD({1, 4, 4}), TensorD({1, 1, 2, 2}), TensorD({1}), Padding::same), ShapeError);
    CHECK_THROWS_AS(conv2d(TensorD({1, 4, 4}), TensorD({2, 1, 3, 3}), TensorD({1}), Padding::same), ShapeError);
    try {
        conv2d(TensorD({2, 4, 4}), TensorD({1, 3, 3, 3}), TensorD({1}), Padding::same);
    } catch (const ShapeError& e) {
        CHECK(std::string(e.what()).find("3 input channels") != std::string::npos);
    }
}

TEST_CASE("conv2d is linear in its input") {
    Rng rng(4);
    TensorD x = oracle::random_tensor({2, 6, 6}, rng);
    TensorD y = oracle::random_tensor({2, 6, 6}, rng);
    TensorD k = oracle::random_tensor({3, 2, 3, 3}, rng);
    TensorD zero_bias({3});
    const double a = 1.7, b = -0.4;
    TensorD mix = x;
    for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = a * x[i] + b * y[i];
    TensorD lhs = conv2d(mix, k, zero_bias, Padding::same);
    TensorD cx = conv2d(x, k, zero_bias, Padding::same);
    TensorD cy = conv2d(y, k, zero_bias, Padding::same);
    for (std::size_t i = 0; i < lhs.size(); ++i) CHECK(std::abs(lhs[i] - (a * cx[i] + b * cy[i])) < 1e-10);
}

TEST_CASE("conv2d_backward edge cases") {
    Rng rng(5);
    TensorD in = oracle::random_tensor({1, 4, 4}, rng);
    SUBCASE("zero upstream gives zero gradients") {
        TensorD k = oracle::random_tensor({2, 1, 3, 3}, rng);
        auto g = conv2d_backward(in, k, TensorD({2, 4, 4}), Padding::same);
        for (const auto& t : g.parameter_grads)
            for (double v : t.values()) CHECK(v == 0.0);
        for (double v : g.input_grad.values()) CHECK(v == 0.0);
    }
    SUBCASE("identity kernel transports the upstream gradient") {
        TensorD k({1, 1, 3, 3});
        k[4] = 1.0;
        TensorD up = oracle::random_tensor({1, 4, 4}, rng);
        auto g = conv2d_backward(in, k, up, Padding::same);
        CHECK(g.input_grad == up);
        CHECK(g.parameter_grads[0].shape() == k.shape());
        CHECK(g.parameter_grads[1].shape() == Shape{1});
    }
    SUBCASE("upstream shape mismatch is rejected") {
        CHECK_THROWS_AS(conv2d_backward(in, TensorD({1, 1, 3, 3}), TensorD({1, 2, 2}), Padding::same), ShapeError);
    }
}

TEST_CASE("maxpool2d") {
    SUBCASE("constant input") {
        TensorD in({2, 4, 6}, 3.25);
        auto r = maxpool2d(in);
        CHECK(r.output.shape() == Shape{2, 2, 3});
        for (double v : r.output.values()) CHECK(v == 3.25);
    }
    SUBCASE("1..16 window maxima") {
        auto r = maxpool2d(iota_image(4, 4));
        // Exhaustive window scan.
        const TensorD in = iota_image(4, 4);
        for (std::size_t y = 0; y < 2; ++y)
            for (std::size_t x = 0; x < 2; ++x) {
                double m = -1e300;
                for (std::size_t i = 0; i < 2; ++i)
                    for (std::size_t j = 0; j < 2; ++j) m = std::max(m, in.at(0, 2 * y + i, 2 * x + j));
                CHECK(r.output.at(0, y, x) == m);
            }
        CHECK(r.output.values()[0] == 6.0);
        CHECK(r.output.values()[1] == 8.0);
        CHECK(r.output.values()[2] == 14.0);
        CHECK(r.output.values()[3] == 16.0);
    }
    SUBCASE("ties route to the first cell in row-major order") {
        TensorD in({1, 2, 2}, 1.0);
        auto r = maxpool2d(in);
        CHECK(r.argmax[0] == 0);
        TensorD in2({1, 2, 2}, {0.0, 5.0, 5.0, 1.0});
        CHECK(maxpool2d(in2).argmax[0] == 1);
    }
    SUBCASE("odd extents replicate the last row and column") {
        TensorD in({1, 3, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9});
        auto r = maxpool2d(in);
        REQUIRE(r.output.shape() == Shape{1, 2, 2});
        CHECK(r.output[0] == 5.0);
        CHECK(r.output[1] == 6.0);
        CHECK(r.output[2] == 8.0);
        CHECK(r.output[3] == 9.0);
        CHECK(r.argmax[3] == 8);
    }
    SUBCASE("backward routes only to argmax positions") {
        TensorD in({1, 4, 4}, {1, 9, 2, 3, 4, 5, 8, 6, 7, 0, 1, 1, 2, 3, 4, 16});
        auto r = maxpool2d(in);
        TensorD up({1, 2, 2}, {10, 20, 30, 40});
        TensorD g = maxpool2d_backward(in.shape(), r.argmax, up);
        double total = 0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            total += g[i];
            bool is_arg = std::find(r.argmax.begin(), r.argmax.end(), i) != r.argmax.end();
            if (!is_arg) CHECK(g[i] == 0.0);
        }
        CHECK(total == 100.0);
        CHECK(g[1] == 10.0);
        CHECK(g[6] == 20.0);
        CHECK(g[15] == 40.0);
    }
    SUBCASE("output bounded by input range") {
        Rng rng(6);
        for (int t = 0; t < 20; ++t) {
            TensorD in = oracle::random_tensor({2, 2 + rng.below(7), 2 + rng.below(7)}, rng, -5, 5);
            auto [lo, hi] = std::minmax_element(in.values().begin(), in.values().end());
            const auto pooled = maxpool2d(in);
            for (double v : pooled.output.values()) {
                CHECK(v <= *hi);
                CHECK(v >= *lo);
            }
        }
    }
    SUBCASE("empty input rejected") { CHECK_THROWS_AS(maxpool2d(TensorD({0, 2, 2})), ShapeError); }
}

TEST_CASE("relu forward and backward") {
    TensorD x({3}, {-1.0, 0.0, 2.0});
    CHECK(relu(x) == TensorD({3}, {0.0, 0.0, 2.0}));
    TensorD pos({3}, {0.0, 1.5, 3.0});
    CHECK(relu(pos) == pos);
    TensorD g = relu_backward(TensorD({2}, {-1.0, 2.0}), TensorD({2}, {5.0, 7.0}));
    CHECK(g == TensorD({2}, {0.0, 7.0}));
    CHECK(relu_backward(TensorD({1}, {0.0}), TensorD({1}, {3.0}))[0] == 0.0);
}

TEST_CASE("dense") {
    TensorD x({3}, {1.5, -2.0, 0.25});
    TensorD eye({3, 3});
    for (std::size_t i = 0; i < 3; ++i) eye.at(i, i) = 1.0;
    CHECK(dense(x, eye, TensorD({3})) == x);
    CHECK(dense(x, TensorD({2, 3}), TensorD({2}, {3.0, 4.0})) == TensorD({2}, {3.0, 4.0}));
    CHECK_THROWS_AS(dense(TensorD({4}), TensorD({2, 3}), TensorD({2})), ShapeError);
    CHECK_THROWS_AS(dense(x, TensorD({2, 3}), TensorD({3})), ShapeError);
}

TEST_CASE("dropout") {
    Rng rng(7);
    TensorD x({1000}, 1.0);
    SUBCASE("rate 0 is the identity in both modes") {
        CHECK(dropout(x, 0.0, rng, true).output == x);
        CHECK(dropout(x, 0.0, rng, false).output == x);
    }
    SUBCASE("inference is the identity for any rate") {
        CHECK(dropout(x, 0.9, rng, false).output == x);
        CHECK(dropout(x, 0.5, rng, false).mask.empty());
    }
    SUBCASE("rate >= 1 rejected") {
        CHECK_THROWS_AS(dropout(x, 1.0, rng, true), ArgumentError);
        CHECK_THROWS_AS(dropout(x, -0.1, rng, true), ArgumentError);
    }
    SUBCASE("mean preserved by inverted scaling") {
        TensorD big({100000}, 1.0);
        auto r = dropout(big, 0.5, rng, true);
        double mean = std::accumulate(r.output.values().begin(), r.output.values().end(), 0.0) / 100000.0;
        CHECK(mean >= 0.98);
        CHECK(mean <= 1.02);
        for (double v : r.output.values()) CHECK((v == 0.0 || v == 2.0));
    }
    SUBCASE("deterministic under a fixed seed") {
        Rng a(99), b(99);
        CHECK(dropout(x, 0.3, a, true).output == dropout(x, 0.3, b, true).output);
    }
    SUBCASE("backward applies the same mask") {
        auto r = dropout(x, 0.5, rng, true);
        TensorD up({1000}, 3.0);
        TensorD g = dropout_backward(r.mask, up);
        for (std::size_t i = 0; i < 1000; ++i) CHECK(g[i] == 3.0 * r.mask[i]);
    }
}

TEST_CASE("softmax") {
    CHECK(softmax(TensorD({2}, {0.0, 0.0})) == TensorD({2}, {0.5, 0.5}));
    for (double c : {-700.0, 0.0, 3.5, 800.0}) {
        TensorD p = softmax(TensorD({3}, {c, c, c}));
        for (double v : p.values()) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    }
    // Direct evaluation of normalized exponentials.
    const double z = std::exp(1.0) + std::exp(2.0) + std::exp(3.0);
    TensorD p = softmax(TensorD({3}, {1.0, 2.0, 3.0}));
    CHECK(p[0] == doctest::Approx(std::exp(1.0) / z).epsilon(1e-14));
    CHECK(p[1] == doctest::Approx(std::exp(2.0) / z).epsilon(1e-14));
    CHECK(p[2] == doctest::Approx(std::exp(3.0) / z).epsilon(1e-14));
    CHECK(p[0] == doctest::Approx(0.09003057317038046).epsilon(1e-14));
    CHECK(p[2] == doctest::Approx(0.6652409557748219).epsilon(1e-14));
}

TEST_CASE("softmax sums to one and is shift invariant") {
    Rng rng(8);
    for (int t = 0; t < 200; ++t) {
        TensorD z = oracle::random_tensor({2 + rng.below(10)}, rng, -50, 50);
        TensorD p = softmax(z);
        double s = 0;
        for (double v : p.values()) {
            CHECK(v > 0.0);
            CHECK(v <= 1.0);
            s += v;
        }
        CHECK(std::abs(s - 1.0) < 1e-12);
        const double shift = rng.uniform(-100, 100);
        TensorD zs = z;
        for (auto& v : zs.values()) v += shift;
        TensorD ps = softmax(zs);
        for (std::size_t i = 0; i < p.size(); ++i) CHECK(std::abs(p[i] - ps[i]) < 1e-12);
    }
}

TEST_CASE("cross_entropy") {
    CHECK(cross_entropy(TensorD({3}, {0.0, 1.0, 0.0}), 1) == 0.0);
    CHECK(cross_entropy(TensorD({2}, {0.5, 0.5}), 0) == doctest::Approx(std::log(2.0)));
    CHECK(cross_entropy(TensorD({2}, {1.0, 0.0}), 1) == doctest::Approx(-std::log(1e-12)));
    CHECK_THROWS_AS(cross_entropy(TensorD({2}, {0.5, 0.5}), 2), ArgumentError);
    TensorD g = softmax_cross_entropy_backward(TensorD({3}, {0.2, 0.3, 0.5}), 2);
    CHECK(g[0] == doctest::Approx(0.2));
    CHECK(g[2] == doctest::Approx(-0.5));
}
