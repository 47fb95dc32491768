#include "doctest.h"

#include "faceattr/gradcheck.hpp"
#include "oracles.hpp"

using namespace faceattr;

namespace {

// Dropout with a frozen mask is linear, so it can be checked like any layer.
struct FrozenDropout {
    std::vector<double> mask;
    TensorD forward(const TensorD& x) {
        TensorD y = x;
        for (std::size_t i = 0; i < y.size(); ++i) y[i] *= mask[i];
        return y;
    }
    LayerGradients<double> backward(const TensorD&, const TensorD& up) { return {{}, dropout_backward(mask, up)}; }
    std::vector<TensorD*> parameters() { return {}; }
};

// Distinct values on a 0.05 grid so no pooling window holds a near tie.
TensorD untied_image(Shape shape, Rng& rng) {
    TensorD t(std::move(shape));
    std::vector<double> levels(t.size());
    for (std::size_t i = 0; i < levels.size(); ++i) levels[i] = 0.05 * static_cast<double>(i) - 1.0;
    rng.shuffle(levels);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = levels[i];
    return t;
}

} // namespace

TEST_CASE("conv2d gradients match central differences") {
    Rng rng(11);
    ConvLayer layer{oracle::random_tensor({2, 1, 3, 3}, rng), oracle::random_tensor({2}, rng), Padding::same};
    CHECK(finite_difference_check(layer, oracle::random_tensor({1, 5, 5}, rng)) < 1e-4);
    CHECK(finite_difference_check(layer, oracle::random_tensor({1, 6, 6}, rng)) < 1e-4);
    layer.padding = Padding::valid;
    CHECK(finite_difference_check(layer, oracle::random_tensor({1, 6, 6}, rng)) < 1e-4);
}

TEST_CASE("multi-channel conv2d gradients") {
    Rng rng(12);
    ConvLayer layer{oracle::random_tensor({4, 3, 3, 3}, rng), oracle::random_tensor({4}, rng), Padding::same};
    CHECK(finite_difference_check(layer, oracle::random_tensor({3, 7, 5}, rng)) < 1e-4);
}

TEST_CASE("dense gradients match central differences") {
    Rng rng(13);
    DenseLayer small{oracle::random_tensor({2, 3}, rng), oracle::random_tensor({2}, rng)};
    CHECK(finite_difference_check(small, oracle::random_tensor({3}, rng)) < 1e-4);
    DenseLayer layer{oracle::random_tensor({3, 4}, rng), oracle::random_tensor({3}, rng)};
    CHECK(finite_difference_check(layer, oracle::random_tensor({4}, rng)) < 1e-4);
}

TEST_CASE("relu away from the kink is exact to 1e-6") {
    Rng rng(14);
    ReluLayer layer;
    CHECK(finite_difference_check(layer, oracle::random_away_from_zero({3, 4, 4}, rng, 0.1)) < 1e-6);
}

TEST_CASE("maxpool without near-ties") {
    Rng rng(15);
    MaxPoolLayer layer;
    CHECK(finite_difference_check(layer, untied_image({2, 6, 6}, rng)) < 1e-4);
    CHECK(finite_difference_check(layer, untied_image({1, 5, 7}, rng)) < 1e-4);
}

TEST_CASE("combined softmax cross-entropy gradient") {
    Rng rng(16);
    for (std::size_t cls = 0; cls < 4; ++cls) {
        SoftmaxCrossEntropyLayer layer{cls};
        CHECK(finite_difference_check(layer, oracle::random_tensor({4}, rng, -3, 3)) < 1e-4);
    }
}

TEST_CASE("frozen dropout mask") {
    Rng rng(17);
    TensorD x = oracle::random_tensor({50}, rng);
    auto r = dropout(x, 0.5, rng, true);
    FrozenDropout layer{r.mask};
    CHECK(finite_difference_check(layer, x) < 1e-6);
}

TEST_CASE("property: random layers and inputs pass the check") {
    Rng rng(18);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t cin = 1 + rng.below(3), cout = 1 + rng.below(3);
        const std::size_t h = 3 + rng.below(5), w = 3 + rng.below(5);
        ConvLayer conv{oracle::random_tensor({cout, cin, 3, 3}, rng), oracle::random_tensor({cout}, rng),
                       rng.below(2) ? Padding::same : Padding::valid};
        CHECK(finite_difference_check(conv, oracle::random_tensor({cin, h, w}, rng)) < 1e-4);

        const std::size_t n = 1 + rng.below(8), m = 1 + rng.below(8);
        DenseLayer fc{oracle::random_tensor({m, n}, rng), oracle::random_tensor({m}, rng)};
        CHECK(finite_difference_check(fc, oracle::random_tensor({n}, rng)) < 1e-4);

        ReluLayer act;
        CHECK(finite_difference_check(act, oracle::random_away_from_zero({cin, h, w}, rng, 0.01)) < 1e-4);

        MaxPoolLayer pool;
        CHECK(finite_difference_check(pool, untied_image({cin, h, w}, rng)) < 1e-4);
    }
}

TEST_CASE("the harness detects a wrong gradient") {
    struct Broken {
        TensorD forward(const TensorD& x) { return relu(x); }
        LayerGradients<double> backward(const TensorD&, const TensorD& up) { return {{}, up}; }
        std::vector<TensorD*> parameters() { return {}; }
    } layer;
    TensorD x({2}, {-0.5, 0.5});
    CHECK(finite_difference_check(layer, x) > 0.5);
}
