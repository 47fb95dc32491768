#include "doctest.h"

#include "faceattr/error.hpp"
#include "faceattr/gradcheck.hpp"
#include "faceattr/probe.hpp"
#include "faceattr/synthetic.hpp"
#include "oracles.hpp"

using namespace faceattr;

namespace {

std::vector<std::string> head(const std::vector<std::string>& ids, std::size_t from, std::size_t n) {
    return {ids.begin() + static_cast<std::ptrdiff_t>(from), ids.begin() + static_cast<std::ptrdiff_t>(from + n)};
}

Split manual_split(const synthetic::GaussianEmbeddings& data, std::size_t n_train, std::size_t n_test) {
    Split s;
    s.target_attribute = "Target";
    s.train_ids = head(data.table.ids(), 0, n_train);
    s.test_ids = head(data.table.ids(), n_train, n_test);
    return s;
}

struct ProbeLossLayer {
    LinearProbe probe;
    std::vector<int> classes;
    double l2 = 1e-2;

    std::vector<std::vector<double>> rows(const TensorD& x) const {
        std::vector<std::vector<double>> r(x.dim(0), std::vector<double>(x.dim(1)));
        for (std::size_t i = 0; i < x.dim(0); ++i)
            for (std::size_t k = 0; k < x.dim(1); ++k) r[i][k] = x.at(i, k);
        return r;
    }
    TensorD forward(const TensorD& x) { return TensorD({1}, {probe_objective(probe, rows(x), classes, l2).loss}); }
    LayerGradients<double> backward(const TensorD& x, const TensorD& up) {
        ProbeObjective obj = probe_objective(probe, rows(x), classes, l2);
        obj.weight_grad *= up[0];
        obj.bias_grad *= up[0];
        return {{obj.weight_grad, obj.bias_grad}, TensorD(x.shape())};
    }
    std::vector<TensorD*> parameters() { return {&probe.weights, &probe.bias}; }
};

} // namespace

TEST_CASE("probe separates 6-sigma Gaussian embeddings in 2048 dims") {
    const auto data = synthetic::gaussian_embeddings(1500, 2048, 6.0, 31);
    const Split split = manual_split(data, 1000, 500);
    ProbeOutcome out = train_probe(data.table, data.labels, split, {});
    REQUIRE(out.history.size() == 30);
    const EvalResult test = evaluate_probe(out.probe, data.table, data.labels, "Target", split.test_ids);
    CHECK(test.accuracy >= 0.99);
    CHECK(*out.history.back().test_accuracy == test.accuracy);
    const EvalResult train = evaluate_probe(out.probe, data.table, data.labels, "Target", split.train_ids);
    CHECK(train.accuracy >= 0.99);
    CHECK(out.probe.attribute == "Target");
    CHECK(out.probe.train_count == 1000);
}

TEST_CASE("zero-weight probe ties to class 0") {
    const auto data = synthetic::gaussian_embeddings(100, 8, 6.0, 1);
    const EvalResult r =
        evaluate_probe(LinearProbe::zeros(8), data.table, data.labels, "Target", data.table.ids());
    CHECK(r.accuracy == 0.5);
    for (const auto& rec : r.records) {
        CHECK(rec.predicted_class == 0);
        CHECK(rec.prob_positive == 0.5);
    }
}

TEST_CASE("probe evaluation recounts") {
    const auto data = synthetic::gaussian_embeddings(400, 16, 1.5, 2);
    const Split split = manual_split(data, 300, 100);
    ProbeConfig cfg;
    cfg.epochs = 5;
    const ProbeOutcome out = train_probe(data.table, data.labels, split, cfg);
    const EvalResult r = evaluate_probe(out.probe, data.table, data.labels, "Target", split.test_ids);
    std::size_t correct = 0;
    for (const auto& rec : r.records) {
        correct += rec.true_class == rec.predicted_class;
        CHECK(rec.predicted_class == (rec.prob_positive > 0.5 ? 1 : 0));
    }
    CHECK(r.accuracy == static_cast<double>(correct) / 100.0);
    CHECK(r.true_positive + r.true_negative == correct);
}

TEST_CASE("full-batch gradient descent never increases the convex objective") {
    const auto data = synthetic::gaussian_embeddings(200, 20, 1.0, 3, 0.1);
    const std::size_t attr = data.labels.attribute_index("Target");
    std::vector<std::vector<double>> rows;
    std::vector<int> classes;
    LinearProbe probe = LinearProbe::zeros(20);
    for (std::size_t i = 0; i < data.table.size(); ++i) {
        const auto& v = data.table.vector(i);
        rows.emplace_back(v.begin(), v.end());
        classes.push_back(class_of_label(data.labels.find(data.table.ids()[i])->labels[attr]));
    }
    double previous = probe_objective(probe, rows, classes, 1e-4).loss;
    for (int step = 0; step < 300; ++step) {
        ProbeObjective obj = probe_objective(probe, rows, classes, 1e-4);
        for (std::size_t k = 0; k < probe.weights.size(); ++k) probe.weights[k] -= 1e-3 * obj.weight_grad[k];
        for (std::size_t c = 0; c < 2; ++c) probe.bias[c] -= 1e-3 * obj.bias_grad[c];
        const double now = probe_objective(probe, rows, classes, 1e-4).loss;
        CHECK(now <= previous);
        previous = now;
    }
}

TEST_CASE("probe gradient passes the finite-difference check at 1e-6") {
    Rng rng(41);
    ProbeLossLayer layer{LinearProbe::zeros(6), {0, 1, 1, 0, 1}};
    layer.probe.weights = oracle::random_tensor({2, 6}, rng);
    layer.probe.bias = oracle::random_tensor({2}, rng);
    GradCheckOptions opts;
    opts.check_input = false;
    CHECK(finite_difference_check(layer, oracle::random_tensor({5, 6}, rng, -2, 2), opts) < 1e-6);
}

TEST_CASE("rescaling embeddings by c and weights by 1/c preserves predictions") {
    const auto data = synthetic::gaussian_embeddings(200, 12, 2.0, 5);
    const Split split = manual_split(data, 150, 50);
    ProbeConfig cfg;
    cfg.epochs = 5;
    const LinearProbe trained = train_probe(data.table, data.labels, split, cfg).probe;
    // Fold the standardization into raw-space weights.
    LinearProbe raw = LinearProbe::zeros(12);
    for (std::size_t c = 0; c < 2; ++c) {
        double b = trained.bias[c];
        for (std::size_t k = 0; k < 12; ++k) {
            raw.weights.at(c, k) = trained.weights.at(c, k) * trained.feature_scale[k];
            b -= raw.weights.at(c, k) * trained.feature_mean[k];
        }
        raw.bias[c] = b;
    }
    for (double c : {0.001, 0.5, 7.0, 1000.0}) {
        EmbeddingTable scaled(12);
        for (std::size_t i = 0; i < data.table.size(); ++i) {
            std::vector<float> v = data.table.vector(i);
            for (auto& x : v) x = static_cast<float>(x * c);
            scaled.add(data.table.ids()[i], v);
        }
        LinearProbe shrunk = raw;
        shrunk.weights *= 1.0 / c;
        const EvalResult a = evaluate_probe(raw, data.table, data.labels, "Target", split.test_ids);
        const EvalResult b = evaluate_probe(shrunk, scaled, data.labels, "Target", split.test_ids);
        for (std::size_t i = 0; i < a.records.size(); ++i)
            CHECK(a.records[i].predicted_class == b.records[i].predicted_class);
    }
}

TEST_CASE("missing ids are named") {
    const auto data = synthetic::gaussian_embeddings(20, 4, 6.0, 6);
    Split split = manual_split(data, 10, 5);
    split.test_ids.push_back("ghost.jpg");
    try {
        train_probe(data.table, data.labels, split, {});
        FAIL("expected an error");
    } catch (const ArgumentError& e) {
        CHECK(std::string(e.what()).find("ghost.jpg") != std::string::npos);
    }
    CHECK(first_missing_id(data.table, data.labels, split.train_ids).empty());
    CHECK_THROWS_AS(evaluate_probe(LinearProbe::zeros(4), data.table, data.labels, "Target", {"nope"}),
                    ArgumentError);
    CHECK_THROWS_AS(evaluate_probe(LinearProbe::zeros(5), data.table, data.labels, "Target", split.train_ids),
                    ShapeError);
}
