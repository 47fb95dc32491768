#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "faceattr/layers.hpp"
#include "faceattr/rng.hpp"
#include "faceattr/tensor.hpp"

namespace faceattr {

/// A layer the finite-difference harness can drive at 64-bit precision.
/// `backward(input, upstream)` returns gradients of <upstream, forward(input)>.
template <typename L>
concept Differentiable = requires(L& layer, const TensorD& x) {
    { layer.forward(x) } -> std::same_as<TensorD>;
    { layer.backward(x, x) } -> std::same_as<LayerGradients<double>>;
    { layer.parameters() } -> std::same_as<std::vector<TensorD*>>;
};

struct GradCheckOptions {
    double epsilon = 1e-5;
    std::uint64_t seed = 7;
    /// Coordinates probed per tensor; 0 probes every coordinate.
    std::size_t max_coords_per_tensor = 0;
    bool check_input = true;
};

inline double relative_error(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

/// Max relative error between analytic gradients and central differences of
/// the scalar L = <r, forward(x)>, where r is a fixed random projection.
template <Differentiable L>
double finite_difference_check(L& layer, TensorD input, const GradCheckOptions& options = {}) {
    Rng rng(options.seed);
    TensorD probe_out = layer.forward(input);
    TensorD projection(probe_out.shape());
    for (auto& v : projection.values()) v = rng.uniform(-1.0, 1.0);

    auto objective = [&](const TensorD& x) {
        const TensorD out = layer.forward(x);
        double total = 0.0;
        for (std::size_t i = 0; i < out.size(); ++i) total += projection[i] * out[i];
        return total;
    };

    const LayerGradients<double> analytic = layer.backward(input, projection);
    std::vector<TensorD*> params = layer.parameters();
    double worst = 0.0;

    auto coords_for = [&](std::size_t n) {
        std::vector<std::size_t> coords(n);
        for (std::size_t i = 0; i < n; ++i) coords[i] = i;
        if (options.max_coords_per_tensor && n > options.max_coords_per_tensor) {
            rng.shuffle(coords);
            coords.resize(options.max_coords_per_tensor);
            std::sort(coords.begin(), coords.end());
        }
        return coords;
    };

    for (std::size_t p = 0; p < params.size(); ++p) {
        TensorD& param = *params[p];
        for (std::size_t i : coords_for(param.size())) {
            const double saved = param[i];
            param[i] = saved + options.epsilon;
            const double up = objective(input);
            param[i] = saved - options.epsilon;
            const double down = objective(input);
            param[i] = saved;
            const double numeric = (up - down) / (2.0 * options.epsilon);
            worst = std::max(worst, relative_error(analytic.parameter_grads.at(p)[i], numeric));
        }
    }
    if (options.check_input) {
        for (std::size_t i : coords_for(input.size())) {
            const double saved = input[i];
            input[i] = saved + options.epsilon;
            const double up = objective(input);
            input[i] = saved - options.epsilon;
            const double down = objective(input);
            input[i] = saved;
            const double numeric = (up - down) / (2.0 * options.epsilon);
            worst = std::max(worst, relative_error(analytic.input_grad[i], numeric));
        }
    }
    return worst;
}

// Adapters exposing the free layer functions to the harness.

struct ConvLayer {
    TensorD kernels;
    TensorD bias;
    Padding padding = Padding::same;

    TensorD forward(const TensorD& x) { return conv2d(x, kernels, bias, padding); }
    LayerGradients<double> backward(const TensorD& x, const TensorD& up) {
        return conv2d_backward(x, kernels, up, padding);
    }
    std::vector<TensorD*> parameters() { return {&kernels, &bias}; }
};

struct DenseLayer {
    TensorD weights;
    TensorD bias;

    TensorD forward(const TensorD& x) { return dense(x, weights, bias); }
    LayerGradients<double> backward(const TensorD& x, const TensorD& up) {
        return dense_backward(x, weights, up);
    }
    std::vector<TensorD*> parameters() { return {&weights, &bias}; }
};

struct ReluLayer {
    TensorD forward(const TensorD& x) { return relu(x); }
    LayerGradients<double> backward(const TensorD& x, const TensorD& up) { return {{}, relu_backward(x, up)}; }
    std::vector<TensorD*> parameters() { return {}; }
};

struct MaxPoolLayer {
    TensorD forward(const TensorD& x) { return maxpool2d(x).output; }
    LayerGradients<double> backward(const TensorD& x, const TensorD& up) {
        return {{}, maxpool2d_backward(x.shape(), maxpool2d(x).argmax, up)};
    }
    std::vector<TensorD*> parameters() { return {}; }
};

/// logits -> [cross_entropy(softmax(logits), true_class)]
struct SoftmaxCrossEntropyLayer {
    std::size_t true_class = 0;

    TensorD forward(const TensorD& logits) {
        return TensorD({1}, {cross_entropy(softmax(logits), true_class)});
    }
    LayerGradients<double> backward(const TensorD& logits, const TensorD& up) {
        TensorD grad = softmax_cross_entropy_backward(softmax(logits), true_class);
        grad *= up[0];
        return {{}, grad};
    }
    std::vector<TensorD*> parameters() { return {}; }
};

} // namespace faceattr
