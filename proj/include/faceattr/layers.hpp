#pragma once

#include <cstddef>
#include <vector>

#include "faceattr/rng.hpp"
#include "faceattr/tensor.hpp"

namespace faceattr {

enum class Padding { same, valid };

/// Gradients of one layer: one entry per parameter (in the layer's parameter
/// order) plus the gradient with respect to the layer input.
template <typename T>
struct LayerGradients {
    std::vector<BasicTensor<T>> parameter_grads;
    BasicTensor<T> input_grad;
};

// Convolution, stride 1, odd square kernels. input [C_in,H,W], kernels
// [C_out,C_in,k,k], bias [C_out].
template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& input, const BasicTensor<T>& kernels,
                      const BasicTensor<T>& bias, Padding padding);

/// Parameter grads are {kernels, bias}.
template <typename T>
LayerGradients<T> conv2d_backward(const BasicTensor<T>& input, const BasicTensor<T>& kernels,
                                  const BasicTensor<T>& upstream, Padding padding);

/// Accumulating form used by the training loop: adds into the grad tensors,
/// writes the input gradient only when `input_grad` is non-null.
template <typename T>
void conv2d_backward_accumulate(const BasicTensor<T>& input, const BasicTensor<T>& kernels,
                                const BasicTensor<T>& upstream, Padding padding,
                                BasicTensor<T>& kernel_grad, BasicTensor<T>& bias_grad,
                                BasicTensor<T>* input_grad);

template <typename T>
struct PoolResult {
    BasicTensor<T> output;
    /// Flat input index of the maximum feeding each output cell.
    std::vector<std::size_t> argmax;
};

/// 2x2 max pooling with stride 2. Odd extents are padded by replicating the
/// last row/column. Ties go to the first cell in row-major window order.
template <typename T>
PoolResult<T> maxpool2d(const BasicTensor<T>& input);

template <typename T>
BasicTensor<T> maxpool2d_backward(const Shape& input_shape, const std::vector<std::size_t>& argmax,
                                  const BasicTensor<T>& upstream);

template <typename T>
BasicTensor<T> relu(const BasicTensor<T>& input);

/// Passes upstream where input > 0; zero at and below 0.
template <typename T>
BasicTensor<T> relu_backward(const BasicTensor<T>& input, const BasicTensor<T>& upstream);

/// Affine map weights[m,n] * input[n] + bias[m]. `input` may have any shape
/// of volume n; it is read flat.
template <typename T>
BasicTensor<T> dense(const BasicTensor<T>& input, const BasicTensor<T>& weights,
                     const BasicTensor<T>& bias);

/// Parameter grads are {weights, bias}; input_grad has the input's shape.
template <typename T>
LayerGradients<T> dense_backward(const BasicTensor<T>& input, const BasicTensor<T>& weights,
                                 const BasicTensor<T>& upstream);

template <typename T>
void dense_backward_accumulate(const BasicTensor<T>& input, const BasicTensor<T>& weights,
                               const BasicTensor<T>& upstream, BasicTensor<T>& weight_grad,
                               BasicTensor<T>& bias_grad, BasicTensor<T>* input_grad);

template <typename T>
struct DropoutResult {
    BasicTensor<T> output;
    /// Per-element multiplier applied (0 or 1/(1-rate)); empty at inference.
    std::vector<T> mask;
};

/// Inverted dropout. Inference mode (and rate 0) is the identity and draws
/// nothing from `rng`.
template <typename T>
DropoutResult<T> dropout(const BasicTensor<T>& input, double rate, Rng& rng, bool training);

template <typename T>
BasicTensor<T> dropout_backward(const std::vector<T>& mask, const BasicTensor<T>& upstream);

/// Max-shifted normalized exponential over a flat vector.
template <typename T>
BasicTensor<T> softmax(const BasicTensor<T>& logits);

inline constexpr double kProbabilityFloor = 1e-12;

/// -log(max(probs[true_class], 1e-12)).
template <typename T>
double cross_entropy(const BasicTensor<T>& probs, std::size_t true_class);

/// d(cross_entropy(softmax(z)))/dz = probs - onehot(true_class).
template <typename T>
BasicTensor<T> softmax_cross_entropy_backward(const BasicTensor<T>& probs, std::size_t true_class);

} // namespace faceattr
