#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "faceattr/attributes.hpp"
#include "faceattr/cnn.hpp"
#include "faceattr/embeddings.hpp"
#include "faceattr/evaluation.hpp"
#include "faceattr/split.hpp"
#include "faceattr/tensor.hpp"

namespace faceattr {

/// Softmax classifier over fixed embeddings. Inputs are standardized with
/// the train-split statistics stored alongside the weights.
struct LinearProbe {
    std::size_t dim = 0;
    TensorD weights;  ///< [2, dim]
    TensorD bias;     ///< [2]
    std::vector<double> feature_mean;
    std::vector<double> feature_scale;  ///< multiplies (x - mean)

    std::string attribute;
    std::size_t train_count = 0;
    std::uint64_t seed = 0;

    /// Zero weights and identity standardization.
    static LinearProbe zeros(std::size_t dim);

    std::vector<double> standardize(const std::vector<float>& raw) const;
    /// Logits [2] for a raw embedding.
    TensorD logits(const std::vector<float>& raw) const;
};

struct ProbeConfig {
    double learning_rate = 0.01;
    double momentum = 0.9;
    std::size_t batch_size = 64;  ///< 0 means full batch
    std::size_t epochs = 30;
    double l2 = 1e-4;
    std::uint64_t seed = 42;
    std::size_t eval_every = 1;

    void validate() const;
};

struct ProbeObjective {
    double loss = 0.0;  ///< mean cross-entropy + (l2/2)*|W|^2
    TensorD weight_grad;
    TensorD bias_grad;
};

/// Objective and gradient over already-standardized rows.
ProbeObjective probe_objective(const LinearProbe& probe, const std::vector<std::vector<double>>& rows,
                               const std::vector<int>& classes, double l2);

struct ProbeOutcome {
    LinearProbe probe;
    std::vector<EpochStats> history;
};

/// Minibatch momentum SGD on the split's train ids; test accuracy is
/// recorded per epoch when the split has test ids. Throws ArgumentError
/// naming the first split id missing from either table.
ProbeOutcome train_probe(const EmbeddingTable& embeddings, const AttributeTable& labels, const Split& split,
                         const ProbeConfig& config);

EvalResult evaluate_probe(const LinearProbe& probe, const EmbeddingTable& embeddings, const AttributeTable& labels,
                          const std::string& target_attribute, const std::vector<std::string>& ids);

/// First id absent from either table, or empty when all are present.
std::string first_missing_id(const EmbeddingTable& embeddings, const AttributeTable& labels,
                             const std::vector<std::string>& ids);

} // namespace faceattr
