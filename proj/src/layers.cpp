#include "faceattr/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace faceattr {

namespace {

struct ConvGeometry {
    std::size_t in_channels, out_channels, height, width, k, pad, out_height, out_width;
};

template <typename T>
ConvGeometry conv_geometry(const BasicTensor<T>& input, const BasicTensor<T>& kernels, Padding padding) {
    if (input.rank() != 3) {
        throw ShapeError("conv2d: input must be [C,H,W], got " + shape_string(input.shape()));
    }
    if (kernels.rank() != 4 || kernels.dim(2) != kernels.dim(3)) {
        throw ShapeError("conv2d: kernels must be [C_out,C_in,k,k], got " + shape_string(kernels.shape()));
    }
    if (kernels.dim(2) % 2 == 0) {
        throw ShapeError("conv2d: kernel size must be odd, got " + std::to_string(kernels.dim(2)));
    }
    if (kernels.dim(1) != input.dim(0)) {
        throw ShapeError("conv2d: kernels expect " + std::to_string(kernels.dim(1)) +
                         " input channels but input has " + std::to_string(input.dim(0)));
    }
    ConvGeometry g{};
    g.in_channels = input.dim(0);
    g.out_channels = kernels.dim(0);
    g.height = input.dim(1);
    g.width = input.dim(2);
    g.k = kernels.dim(2);
    g.pad = padding == Padding::same ? g.k / 2 : 0;
    if (g.height + 2 * g.pad < g.k || g.width + 2 * g.pad < g.k) {
        throw ShapeError("conv2d: input " + shape_string(input.shape()) + " smaller than kernel");
    }
    g.out_height = g.height + 2 * g.pad - g.k + 1;
    g.out_width = g.width + 2 * g.pad - g.k + 1;
    return g;
}

// Output columns x for which input column x + kx - pad lies inside [0, width).
struct Span1 {
    std::size_t begin, end;
};

Span1 valid_range(std::size_t offset, std::size_t pad, std::size_t in_extent, std::size_t out_extent) {
    // input index = out + offset - pad
    const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(offset) - static_cast<std::ptrdiff_t>(pad);
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -shift);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(out_extent),
                                                       static_cast<std::ptrdiff_t>(in_extent) - shift);
    if (hi <= lo) return {0, 0};
    return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

} // namespace

template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& input, const BasicTensor<T>& kernels,
                      const BasicTensor<T>& bias, Padding padding) {
    const ConvGeometry g = conv_geometry(input, kernels, padding);
    if (bias.size() != g.out_channels) {
        throw ShapeError("conv2d: bias length " + std::to_string(bias.size()) + " for " +
                         std::to_string(g.out_channels) + " output channels");
    }
    BasicTensor<T> out({g.out_channels, g.out_height, g.out_width});
    const T* in = input.data();
    const T* w = kernels.data();
    T* o = out.data();
    for (std::size_t co = 0; co < g.out_channels; ++co) {
        T* oc = o + co * g.out_height * g.out_width;
        std::fill(oc, oc + g.out_height * g.out_width, bias[co]);
        for (std::size_t ci = 0; ci < g.in_channels; ++ci) {
            const T* ic = in + ci * g.height * g.width;
            const T* wk = w + (co * g.in_channels + ci) * g.k * g.k;
            for (std::size_t ky = 0; ky < g.k; ++ky) {
                const Span1 ys = valid_range(ky, g.pad, g.height, g.out_height);
                for (std::size_t kx = 0; kx < g.k; ++kx) {
                    const T weight = wk[ky * g.k + kx];
                    const Span1 xs = valid_range(kx, g.pad, g.width, g.out_width);
                    for (std::size_t y = ys.begin; y < ys.end; ++y) {
                        // Unsigned wraparound cancels once x >= pad - kx is added.
                        const std::size_t irow = (y + ky - g.pad) * g.width + kx - g.pad;
                        T* orow = oc + y * g.out_width;
                        for (std::size_t x = xs.begin; x < xs.end; ++x) orow[x] += weight * ic[irow + x];
                    }
                }
            }
        }
    }
    return out;
}

template <typename T>
void conv2d_backward_accumulate(const BasicTensor<T>& input, const BasicTensor<T>& kernels,
                                const BasicTensor<T>& upstream, Padding padding,
                                BasicTensor<T>& kernel_grad, BasicTensor<T>& bias_grad,
                                BasicTensor<T>* input_grad) {
    const ConvGeometry g = conv_geometry(input, kernels, padding);
    const Shape out_shape{g.out_channels, g.out_height, g.out_width};
    if (upstream.shape() != out_shape) {
        throw ShapeError("conv2d_backward: upstream " + shape_string(upstream.shape()) +
                         ", expected " + shape_string(out_shape));
    }
    if (kernel_grad.shape() != kernels.shape() || bias_grad.size() != g.out_channels) {
        throw ShapeError("conv2d_backward: gradient buffers do not match parameters");
    }
    if (input_grad) {
        if (input_grad->shape() != input.shape()) *input_grad = BasicTensor<T>(input.shape());
        else input_grad->fill(T{});
    }
    const T* in = input.data();
    const T* w = kernels.data();
    const T* up = upstream.data();
    T* gw = kernel_grad.data();
    T* gi = input_grad ? input_grad->data() : nullptr;
    for (std::size_t co = 0; co < g.out_channels; ++co) {
        const T* uc = up + co * g.out_height * g.out_width;
        T bsum{};
        for (std::size_t i = 0; i < g.out_height * g.out_width; ++i) bsum += uc[i];
        bias_grad[co] += bsum;
        for (std::size_t ci = 0; ci < g.in_channels; ++ci) {
            const T* ic = in + ci * g.height * g.width;
            const std::size_t kbase = (co * g.in_channels + ci) * g.k * g.k;
            for (std::size_t ky = 0; ky < g.k; ++ky) {
                const Span1 ys = valid_range(ky, g.pad, g.height, g.out_height);
                for (std::size_t kx = 0; kx < g.k; ++kx) {
                    const Span1 xs = valid_range(kx, g.pad, g.width, g.out_width);
                    const T weight = w[kbase + ky * g.k + kx];
                    T acc{};
                    for (std::size_t y = ys.begin; y < ys.end; ++y) {
                        const std::size_t irow = (y + ky - g.pad) * g.width + kx - g.pad;
                        const T* urow = uc + y * g.out_width;
                        for (std::size_t x = xs.begin; x < xs.end; ++x) acc += urow[x] * ic[irow + x];
                        if (gi) {
                            T* girow = gi + ci * g.height * g.width + irow;
                            for (std::size_t x = xs.begin; x < xs.end; ++x) girow[x] += weight * urow[x];
                        }
                    }
                    gw[kbase + ky * g.k + kx] += acc;
                }
            }
        }
    }
}

template <typename T>
LayerGradients<T> conv2d_backward(const BasicTensor<T>& input, const BasicTensor<T>& kernels,
                                  const BasicTensor<T>& upstream, Padding padding) {
    LayerGradients<T> grads;
    grads.parameter_grads.emplace_back(kernels.shape());
    grads.parameter_grads.emplace_back(Shape{kernels.rank() == 4 ? kernels.dim(0) : 0});
    grads.input_grad = BasicTensor<T>(input.shape());
    conv2d_backward_accumulate(input, kernels, upstream, padding, grads.parameter_grads[0],
                               grads.parameter_grads[1], &grads.input_grad);
    return grads;
}

template <typename T>
PoolResult<T> maxpool2d(const BasicTensor<T>& input) {
    if (input.rank() != 3) {
        throw ShapeError("maxpool2d: input must be [C,H,W], got " + shape_string(input.shape()));
    }
    if (input.empty()) throw ShapeError("maxpool2d: empty input");
    const std::size_t channels = input.dim(0), height = input.dim(1), width = input.dim(2);
    const std::size_t oh = (height + 1) / 2, ow = (width + 1) / 2;
    PoolResult<T> result{BasicTensor<T>({channels, oh, ow}), std::vector<std::size_t>(channels * oh * ow)};
    const T* in = input.data();
    for (std::size_t c = 0; c < channels; ++c) {
        for (std::size_t y = 0; y < oh; ++y) {
            // Replicating the last row/column is the same as clamping the index.
            const std::size_t rows[2] = {2 * y, std::min(2 * y + 1, height - 1)};
            for (std::size_t x = 0; x < ow; ++x) {
                const std::size_t cols[2] = {2 * x, std::min(2 * x + 1, width - 1)};
                std::size_t best = (c * height + rows[0]) * width + cols[0];
                for (std::size_t r = 0; r < 2; ++r) {
                    for (std::size_t s = 0; s < 2; ++s) {
                        const std::size_t idx = (c * height + rows[r]) * width + cols[s];
                        if (in[idx] > in[best]) best = idx;
                    }
                }
                const std::size_t o = (c * oh + y) * ow + x;
                result.output[o] = in[best];
                result.argmax[o] = best;
            }
        }
    }
    return result;
}

template <typename T>
BasicTensor<T> maxpool2d_backward(const Shape& input_shape, const std::vector<std::size_t>& argmax,
                                  const BasicTensor<T>& upstream) {
    if (upstream.size() != argmax.size()) {
        throw ShapeError("maxpool2d_backward: upstream has " + std::to_string(upstream.size()) +
                         " cells, pooling produced " + std::to_string(argmax.size()));
    }
    BasicTensor<T> grad(input_shape);
    for (std::size_t i = 0; i < argmax.size(); ++i) grad[argmax[i]] += upstream[i];
    return grad;
}

template <typename T>
BasicTensor<T> relu(const BasicTensor<T>& input) {
    BasicTensor<T> out = input;
    for (auto& v : out.values()) v = v > T{} ? v : T{};
    return out;
}

template <typename T>
BasicTensor<T> relu_backward(const BasicTensor<T>& input, const BasicTensor<T>& upstream) {
    input.require_same_shape(upstream, "relu_backward");
    BasicTensor<T> grad(input.shape());
    for (std::size_t i = 0; i < input.size(); ++i) grad[i] = input[i] > T{} ? upstream[i] : T{};
    return grad;
}

namespace {

template <typename T>
void check_dense(const BasicTensor<T>& input, const BasicTensor<T>& weights, std::size_t bias_size,
                 const char* context) {
    if (weights.rank() != 2) {
        throw ShapeError(std::string(context) + ": weights must be [m,n], got " + shape_string(weights.shape()));
    }
    if (input.size() != weights.dim(1)) {
        throw ShapeError(std::string(context) + ": input has " + std::to_string(input.size()) +
                         " values, weights expect " + std::to_string(weights.dim(1)));
    }
    if (bias_size != weights.dim(0)) {
        throw ShapeError(std::string(context) + ": bias/output length " + std::to_string(bias_size) +
                         ", weights produce " + std::to_string(weights.dim(0)));
    }
}

} // namespace

template <typename T>
BasicTensor<T> dense(const BasicTensor<T>& input, const BasicTensor<T>& weights, const BasicTensor<T>& bias) {
    check_dense(input, weights, bias.size(), "dense");
    const std::size_t m = weights.dim(0), n = weights.dim(1);
    BasicTensor<T> out({m});
    const T* x = input.data();
    for (std::size_t i = 0; i < m; ++i) {
        const T* row = weights.data() + i * n;
        T acc{};
        for (std::size_t j = 0; j < n; ++j) acc += row[j] * x[j];
        out[i] = acc + bias[i];
    }
    return out;
}

template <typename T>
void dense_backward_accumulate(const BasicTensor<T>& input, const BasicTensor<T>& weights,
                               const BasicTensor<T>& upstream, BasicTensor<T>& weight_grad,
                               BasicTensor<T>& bias_grad, BasicTensor<T>* input_grad) {
    check_dense(input, weights, upstream.size(), "dense_backward");
    if (weight_grad.shape() != weights.shape() || bias_grad.size() != weights.dim(0)) {
        throw ShapeError("dense_backward: gradient buffers do not match parameters");
    }
    const std::size_t m = weights.dim(0), n = weights.dim(1);
    const T* x = input.data();
    for (std::size_t i = 0; i < m; ++i) {
        const T u = upstream[i];
        bias_grad[i] += u;
        if (u == T{}) continue;
        T* grow = weight_grad.data() + i * n;
        for (std::size_t j = 0; j < n; ++j) grow[j] += u * x[j];
    }
    if (input_grad) {
        if (input_grad->shape() != input.shape()) *input_grad = BasicTensor<T>(input.shape());
        else input_grad->fill(T{});
        T* gx = input_grad->data();
        for (std::size_t i = 0; i < m; ++i) {
            const T u = upstream[i];
            if (u == T{}) continue;
            const T* row = weights.data() + i * n;
            for (std::size_t j = 0; j < n; ++j) gx[j] += u * row[j];
        }
    }
}

template <typename T>
LayerGradients<T> dense_backward(const BasicTensor<T>& input, const BasicTensor<T>& weights,
                                 const BasicTensor<T>& upstream) {
    LayerGradients<T> grads;
    grads.parameter_grads.emplace_back(weights.shape());
    grads.parameter_grads.emplace_back(Shape{weights.rank() == 2 ? weights.dim(0) : 0});
    grads.input_grad = BasicTensor<T>(input.shape());
    dense_backward_accumulate(input, weights, upstream, grads.parameter_grads[0], grads.parameter_grads[1],
                              &grads.input_grad);
    return grads;
}

template <typename T>
DropoutResult<T> dropout(const BasicTensor<T>& input, double rate, Rng& rng, bool training) {
    if (!(rate >= 0.0 && rate < 1.0)) {
        throw ArgumentError("dropout: rate must be in [0, 1), got " + std::to_string(rate));
    }
    DropoutResult<T> result{input, {}};
    if (!training || rate == 0.0) return result;
    const T keep_scale = static_cast<T>(1.0 / (1.0 - rate));
    result.mask.resize(input.size());
    for (std::size_t i = 0; i < input.size(); ++i) {
        result.mask[i] = rng.uniform() < rate ? T{} : keep_scale;
        result.output[i] = input[i] * result.mask[i];
    }
    return result;
}

template <typename T>
BasicTensor<T> dropout_backward(const std::vector<T>& mask, const BasicTensor<T>& upstream) {
    if (mask.empty()) return upstream;
    if (mask.size() != upstream.size()) {
        throw ShapeError("dropout_backward: mask length " + std::to_string(mask.size()) + " vs upstream " +
                         std::to_string(upstream.size()));
    }
    BasicTensor<T> grad = upstream;
    for (std::size_t i = 0; i < mask.size(); ++i) grad[i] *= mask[i];
    return grad;
}

template <typename T>
BasicTensor<T> softmax(const BasicTensor<T>& logits) {
    BasicTensor<T> out = logits;
    if (out.empty()) return out;
    const T peak = *std::max_element(out.values().begin(), out.values().end());
    T total{};
    for (auto& v : out.values()) {
        v = std::exp(v - peak);
        total += v;
    }
    for (auto& v : out.values()) v /= total;
    return out;
}

template <typename T>
double cross_entropy(const BasicTensor<T>& probs, std::size_t true_class) {
    if (true_class >= probs.size()) {
        throw ArgumentError("cross_entropy: class " + std::to_string(true_class) + " out of range for " +
                            std::to_string(probs.size()) + " outputs");
    }
    return -std::log(std::max(static_cast<double>(probs[true_class]), kProbabilityFloor));
}

template <typename T>
BasicTensor<T> softmax_cross_entropy_backward(const BasicTensor<T>& probs, std::size_t true_class) {
    if (true_class >= probs.size()) {
        throw ArgumentError("softmax_cross_entropy_backward: class " + std::to_string(true_class) +
                            " out of range for " + std::to_string(probs.size()) + " outputs");
    }
    BasicTensor<T> grad = probs;
    grad[true_class] -= T{1};
    return grad;
}

#define FACEATTR_INSTANTIATE_LAYERS(T)                                                                   \
    template BasicTensor<T> conv2d(const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&,  \
                                   Padding);                                                             \
    template LayerGradients<T> conv2d_backward(const BasicTensor<T>&, const BasicTensor<T>&,             \
                                               const BasicTensor<T>&, Padding);                          \
    template void conv2d_backward_accumulate(const BasicTensor<T>&, const BasicTensor<T>&,               \
                                             const BasicTensor<T>&, Padding, BasicTensor<T>&,            \
                                             BasicTensor<T>&, BasicTensor<T>*);                          \
    template PoolResult<T> maxpool2d(const BasicTensor<T>&);                                             \
    template BasicTensor<T> maxpool2d_backward(const Shape&, const std::vector<std::size_t>&,            \
                                               const BasicTensor<T>&);                                   \
    template BasicTensor<T> relu(const BasicTensor<T>&);                                                 \
    template BasicTensor<T> relu_backward(const BasicTensor<T>&, const BasicTensor<T>&);                 \
    template BasicTensor<T> dense(const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&);  \
    template LayerGradients<T> dense_backward(const BasicTensor<T>&, const BasicTensor<T>&,              \
                                              const BasicTensor<T>&);                                    \
    template void dense_backward_accumulate(const BasicTensor<T>&, const BasicTensor<T>&,                \
                                            const BasicTensor<T>&, BasicTensor<T>&, BasicTensor<T>&,     \
                                            BasicTensor<T>*);                                            \
    template DropoutResult<T> dropout(const BasicTensor<T>&, double, Rng&, bool);                        \
    template BasicTensor<T> dropout_backward(const std::vector<T>&, const BasicTensor<T>&);              \
    template BasicTensor<T> softmax(const BasicTensor<T>&);                                              \
    template double cross_entropy(const BasicTensor<T>&, std::size_t);                                   \
    template BasicTensor<T> softmax_cross_entropy_backward(const BasicTensor<T>&, std::size_t);

FACEATTR_INSTANTIATE_LAYERS(float)
FACEATTR_INSTANTIATE_LAYERS(double)

#undef FACEATTR_INSTANTIATE_LAYERS

} // namespace faceattr
