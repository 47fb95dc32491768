#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "faceattr/evaluation.hpp"
#include "faceattr/layers.hpp"
#include "faceattr/optimizer.hpp"
#include "faceattr/rng.hpp"
#include "faceattr/tensor.hpp"

namespace faceattr {

// [conv3x3(32) -> relu -> pool] -> [conv3x3(64) -> relu -> pool]
//   -> dense(512) -> relu -> dropout -> dense(2) -> softmax
inline constexpr std::size_t kConv1Filters = 32;
inline constexpr std::size_t kConv2Filters = 64;
inline constexpr std::size_t kKernelSize = 3;
inline constexpr std::size_t kHiddenUnits = 512;
inline constexpr std::size_t kClasses = 2;
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct InputSize {
    std::size_t channels = 3, height = 32, width = 32;

    Shape shape() const { return {channels, height, width}; }
    friend bool operator==(const InputSize&, const InputSize&) = default;
};

/// Flattened length of the second pooling stage for `input`.
std::size_t flattened_features(const InputSize& input);

template <typename T>
struct BasicCnnModel {
    InputSize input;
    std::uint64_t seed = 0;
    std::uint32_t version = kCheckpointVersion;

    BasicTensor<T> conv1_kernels, conv1_bias;
    BasicTensor<T> conv2_kernels, conv2_bias;
    BasicTensor<T> dense1_weights, dense1_bias;
    BasicTensor<T> dense2_weights, dense2_bias;

    std::vector<BasicTensor<T>*> parameters() {
        return {&conv1_kernels, &conv1_bias, &conv2_kernels,  &conv2_bias,
                &dense1_weights, &dense1_bias, &dense2_weights, &dense2_bias};
    }
    std::vector<const BasicTensor<T>*> parameters() const {
        return {&conv1_kernels, &conv1_bias, &conv2_kernels,  &conv2_bias,
                &dense1_weights, &dense1_bias, &dense2_weights, &dense2_bias};
    }

    template <typename U>
    BasicCnnModel<U> cast() const {
        BasicCnnModel<U> out;
        out.input = input;
        out.seed = seed;
        out.version = version;
        auto src = parameters();
        auto dst = out.parameters();
        for (std::size_t i = 0; i < src.size(); ++i) *dst[i] = src[i]->template cast<U>();
        return out;
    }

    friend bool operator==(const BasicCnnModel&, const BasicCnnModel&) = default;
};

using CnnModel = BasicCnnModel<float>;
using CnnModelD = BasicCnnModel<double>;

/// He-style uniform init (limit sqrt(6/fan_in)), zero biases. Requires
/// H, W >= 8 so both pooling stages keep at least 2x2.
template <typename T = float>
BasicCnnModel<T> init_model(const InputSize& input, std::uint64_t seed);

/// batch [B,C,H,W] -> probabilities [B,2]. `rng` feeds dropout in training mode.
template <typename T>
BasicTensor<T> forward(const BasicCnnModel<T>& model, const BasicTensor<T>& batch, bool training, Rng& rng,
                       double dropout_rate = 0.5);

template <typename T>
struct LossAndGradients {
    double loss = 0.0;  ///< mean cross-entropy over the batch
    std::size_t correct = 0;
    std::vector<BasicTensor<T>> grads;  ///< parameters() order, of the mean loss
};

/// Mean loss over `samples` (each [C,H,W]) and its gradient. Samples are
/// accumulated in index order so the result is bit-reproducible.
template <typename T>
LossAndGradients<T> loss_and_gradients(const BasicCnnModel<T>& model, const std::vector<const BasicTensor<T>*>& samples,
                                       const std::vector<int>& classes, bool training, Rng& rng,
                                       double dropout_rate = 0.5);

struct TrainConfig {
    double learning_rate = 0.01;
    double momentum = 0.9;
    std::size_t batch_size = 64;
    std::size_t epochs = 15;
    std::uint64_t seed = 42;
    double dropout_rate = 0.5;
    std::size_t eval_every = 1;  ///< 0 disables per-epoch test evaluation

    void validate() const;
};

/// Images and 0/1 classes for one target attribute.
struct LabeledImages {
    std::vector<std::string> ids;
    std::vector<Tensor> images;
    std::vector<int> classes;

    std::size_t size() const { return images.size(); }
};

struct EpochStats {
    std::size_t epoch = 0;  ///< 1-based
    double loss = 0.0;
    double train_accuracy = 0.0;
    std::optional<double> test_accuracy;
};

struct TrainOutcome {
    CnnModel model;
    std::vector<EpochStats> history;
};

/// Minibatch SGD with momentum. Shuffling and dropout draw from the
/// "shuffle" and "dropout" substreams of config.seed. Throws TrainingError
/// naming the epoch and batch if the loss or any parameter goes non-finite.
TrainOutcome train(CnnModel model, const LabeledImages& train_set, const TrainConfig& config,
                   const LabeledImages* test_set = nullptr);

EvalResult evaluate(const CnnModel& model, const LabeledImages& test_set);

/// Little-endian: magic "FACECNN\0", u32 version, u32 C/H/W, u64 seed,
/// u32 tensor count, then per tensor u32 rank, u32 extents, f32 values.
void save_checkpoint(const CnnModel& model, const std::string& path);
CnnModel load_checkpoint(const std::string& path);

} // namespace faceattr
