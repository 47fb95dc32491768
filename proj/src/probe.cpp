#include "faceattr/probe.hpp"

#include <cmath>

#include "faceattr/error.hpp"
#include "faceattr/layers.hpp"
#include "faceattr/optimizer.hpp"
#include "faceattr/rng.hpp"

namespace faceattr {

LinearProbe LinearProbe::zeros(std::size_t dim) {
    LinearProbe p;
    p.dim = dim;
    p.weights = TensorD({kClasses, dim});
    p.bias = TensorD({kClasses});
    p.feature_mean.assign(dim, 0.0);
    p.feature_scale.assign(dim, 1.0);
    return p;
}

std::vector<double> LinearProbe::standardize(const std::vector<float>& raw) const {
    if (raw.size() != dim) {
        throw ShapeError("probe expects " + std::to_string(dim) + "-dim embeddings, got " + std::to_string(raw.size()));
    }
    std::vector<double> x(dim);
    for (std::size_t k = 0; k < dim; ++k) x[k] = (static_cast<double>(raw[k]) - feature_mean[k]) * feature_scale[k];
    return x;
}

namespace {

TensorD affine(const LinearProbe& p, const std::vector<double>& x) {
    TensorD z({kClasses});
    for (std::size_t c = 0; c < kClasses; ++c) {
        const double* w = p.weights.data() + c * p.dim;
        double acc = 0;
        for (std::size_t k = 0; k < p.dim; ++k) acc += w[k] * x[k];
        z[c] = acc + p.bias[c];
    }
    return z;
}

int class_for(const AttributeTable& labels, std::size_t attr, const std::string& id) {
    return class_of_label(labels.find(id)->labels[attr]);
}

} // namespace

TensorD LinearProbe::logits(const std::vector<float>& raw) const { return affine(*this, standardize(raw)); }

void ProbeConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ArgumentError("probe learning_rate must be positive");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ArgumentError("probe momentum must be in [0, 1)");
    if (!(l2 >= 0.0)) throw ArgumentError("probe l2 must be nonnegative");
}

ProbeObjective probe_objective(const LinearProbe& probe, const std::vector<std::vector<double>>& rows,
                               const std::vector<int>& classes, double l2) {
    if (rows.size() != classes.size() || rows.empty()) throw ShapeError("probe_objective: rows and classes mismatch");
    ProbeObjective out{0.0, TensorD({kClasses, probe.dim}), TensorD({kClasses})};
    const double inv_n = 1.0 / static_cast<double>(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const TensorD probs = softmax(affine(probe, rows[i]));
        const auto cls = static_cast<std::size_t>(classes[i]);
        out.loss += cross_entropy(probs, cls) * inv_n;
        const TensorD g = softmax_cross_entropy_backward(probs, cls);
        for (std::size_t c = 0; c < kClasses; ++c) {
            const double gc = g[c] * inv_n;
            out.bias_grad[c] += gc;
            double* gw = out.weight_grad.data() + c * probe.dim;
            for (std::size_t k = 0; k < probe.dim; ++k) gw[k] += gc * rows[i][k];
        }
    }
    double sq = 0;
    for (std::size_t k = 0; k < probe.weights.size(); ++k) {
        sq += probe.weights[k] * probe.weights[k];
        out.weight_grad[k] += l2 * probe.weights[k];
    }
    out.loss += 0.5 * l2 * sq;
    return out;
}

std::string first_missing_id(const EmbeddingTable& embeddings, const AttributeTable& labels,
                             const std::vector<std::string>& ids) {
    for (const auto& id : ids)
        if (embeddings.find(id) == EmbeddingTable::npos || !labels.contains(id)) return id;
    return {};
}

ProbeOutcome train_probe(const EmbeddingTable& embeddings, const AttributeTable& labels, const Split& split,
                         const ProbeConfig& config) {
    config.validate();
    if (split.train_ids.empty()) throw ArgumentError("train_probe: empty training split");
    for (const auto* ids : {&split.train_ids, &split.test_ids}) {
        const std::string missing = first_missing_id(embeddings, labels, *ids);
        if (!missing.empty()) {
            const bool in_embeddings = embeddings.find(missing) != EmbeddingTable::npos;
            throw ArgumentError("image id '" + missing + "' is missing from the " +
                                (in_embeddings ? "attribute table" : "embedding table"));
        }
    }
    const std::size_t attr = labels.attribute_index(split.target_attribute);
    const std::size_t dim = embeddings.dim();

    LinearProbe probe = LinearProbe::zeros(dim);
    probe.attribute = labels.names()[attr];
    probe.train_count = split.train_ids.size();
    probe.seed = config.seed;

    // Per-dimension mean / variance over the train split.
    const double n = static_cast<double>(split.train_ids.size());
    for (const auto& id : split.train_ids) {
        const auto& v = embeddings.vector(embeddings.find(id));
        for (std::size_t k = 0; k < dim; ++k) probe.feature_mean[k] += v[k] / n;
    }
    std::vector<double> var(dim, 0.0);
    for (const auto& id : split.train_ids) {
        const auto& v = embeddings.vector(embeddings.find(id));
        for (std::size_t k = 0; k < dim; ++k) {
            const double d = v[k] - probe.feature_mean[k];
            var[k] += d * d / n;
        }
    }
    for (std::size_t k = 0; k < dim; ++k) probe.feature_scale[k] = var[k] > 1e-12 ? 1.0 / std::sqrt(var[k]) : 1.0;

    std::vector<std::vector<double>> rows;
    std::vector<int> classes;
    for (const auto& id : split.train_ids) {
        rows.push_back(probe.standardize(embeddings.vector(embeddings.find(id))));
        classes.push_back(class_for(labels, attr, id));
    }

    Rng shuffle_rng = Rng::substream(config.seed, "probe-shuffle");
    MomentumState<double> state;
    const SgdHyper hyper{config.learning_rate, config.momentum};
    const std::size_t batch = config.batch_size ? config.batch_size : rows.size();
    std::vector<std::size_t> order(rows.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    ProbeOutcome outcome;
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        if (config.batch_size) shuffle_rng.shuffle(order);
        double loss_sum = 0;
        for (std::size_t start = 0; start < order.size(); start += batch) {
            const std::size_t end = std::min(order.size(), start + batch);
            std::vector<std::vector<double>> batch_rows;
            std::vector<int> batch_classes;
            for (std::size_t i = start; i < end; ++i) {
                batch_rows.push_back(rows[order[i]]);
                batch_classes.push_back(classes[order[i]]);
            }
            ProbeObjective obj = probe_objective(probe, batch_rows, batch_classes, config.l2);
            if (!std::isfinite(obj.loss)) {
                throw TrainingError("probe training diverged at epoch " + std::to_string(epoch));
            }
            loss_sum += obj.loss * static_cast<double>(end - start);
            optimizer_step<double>({&probe.weights, &probe.bias}, {obj.weight_grad, obj.bias_grad}, state, hyper);
        }
        EpochStats stats;
        stats.epoch = epoch;
        stats.loss = loss_sum / n;
        std::size_t correct = 0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const TensorD z = affine(probe, rows[i]);
            correct += predicted_class(z[0], z[1]) == classes[i];
        }
        stats.train_accuracy = static_cast<double>(correct) / n;
        if (!split.test_ids.empty() && config.eval_every && epoch % config.eval_every == 0) {
            stats.test_accuracy =
                evaluate_probe(probe, embeddings, labels, split.target_attribute, split.test_ids).accuracy;
        }
        outcome.history.push_back(stats);
    }
    outcome.probe = std::move(probe);
    return outcome;
}

EvalResult evaluate_probe(const LinearProbe& probe, const EmbeddingTable& embeddings, const AttributeTable& labels,
                          const std::string& target_attribute, const std::vector<std::string>& ids) {
    const std::string missing = first_missing_id(embeddings, labels, ids);
    if (!missing.empty()) throw ArgumentError("image id '" + missing + "' is missing from the embedding or attribute table");
    const std::size_t attr = labels.attribute_index(target_attribute);
    std::vector<PredictionRecord> records;
    records.reserve(ids.size());
    for (const auto& id : ids) {
        const TensorD probs = softmax(probe.logits(embeddings.vector(embeddings.find(id))));
        records.push_back({id, class_for(labels, attr, id), predicted_class(probs[0], probs[1]), probs[1]});
    }
    return summarize_predictions(std::move(records));
}

} // namespace faceattr
