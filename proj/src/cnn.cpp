#include "faceattr/cnn.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "faceattr/error.hpp"

namespace faceattr {

namespace {

std::size_t pooled(std::size_t extent) { return (extent + 1) / 2; }

template <typename T>
void fill_uniform(BasicTensor<T>& t, double limit, Rng& rng) {
    for (auto& v : t.values()) v = static_cast<T>(rng.uniform(-limit, limit));
}

template <typename T>
struct SampleTrace {
    BasicTensor<T> conv1_out, relu1_out;
    PoolResult<T> pool1;
    BasicTensor<T> conv2_out, relu2_out;
    PoolResult<T> pool2;
    BasicTensor<T> hidden_pre, hidden;
    DropoutResult<T> dropped;
    BasicTensor<T> probs;
};

template <typename T>
void check_sample(const BasicCnnModel<T>& model, const BasicTensor<T>& x) {
    if (x.shape() != model.input.shape()) {
        throw ShapeError("cnn: sample shape " + shape_string(x.shape()) + " does not match model input " +
                         shape_string(model.input.shape()));
    }
}

template <typename T>
SampleTrace<T> forward_sample(const BasicCnnModel<T>& m, const BasicTensor<T>& x, bool training, Rng& rng,
                              double dropout_rate) {
    check_sample(m, x);
    SampleTrace<T> t;
    t.conv1_out = conv2d(x, m.conv1_kernels, m.conv1_bias, Padding::same);
    t.relu1_out = relu(t.conv1_out);
    t.pool1 = maxpool2d(t.relu1_out);
    t.conv2_out = conv2d(t.pool1.output, m.conv2_kernels, m.conv2_bias, Padding::same);
    t.relu2_out = relu(t.conv2_out);
    t.pool2 = maxpool2d(t.relu2_out);
    t.hidden_pre = dense(t.pool2.output, m.dense1_weights, m.dense1_bias);
    t.hidden = relu(t.hidden_pre);
    t.dropped = dropout(t.hidden, dropout_rate, rng, training);
    t.probs = softmax(dense(t.dropped.output, m.dense2_weights, m.dense2_bias));
    return t;
}

// Accumulates d(loss)/d(params) * scale into grads (parameters() order).
template <typename T>
void backward_sample(const BasicCnnModel<T>& m, const BasicTensor<T>& x, const SampleTrace<T>& t, int cls,
                     T scale, std::vector<BasicTensor<T>>& grads) {
    BasicTensor<T> up = softmax_cross_entropy_backward(t.probs, static_cast<std::size_t>(cls));
    up *= scale;
    BasicTensor<T> g_dropped;
    dense_backward_accumulate(t.dropped.output, m.dense2_weights, up, grads[6], grads[7], &g_dropped);
    BasicTensor<T> g_hidden = relu_backward(t.hidden_pre, dropout_backward(t.dropped.mask, g_dropped));
    BasicTensor<T> g_pool2;
    dense_backward_accumulate(t.pool2.output, m.dense1_weights, g_hidden, grads[4], grads[5], &g_pool2);
    BasicTensor<T> g_conv2 =
        relu_backward(t.conv2_out, maxpool2d_backward(t.relu2_out.shape(), t.pool2.argmax, g_pool2));
    BasicTensor<T> g_pool1;
    conv2d_backward_accumulate(t.pool1.output, m.conv2_kernels, g_conv2, Padding::same, grads[2], grads[3],
                               &g_pool1);
    BasicTensor<T> g_conv1 =
        relu_backward(t.conv1_out, maxpool2d_backward(t.relu1_out.shape(), t.pool1.argmax, g_pool1));
    conv2d_backward_accumulate<T>(x, m.conv1_kernels, g_conv1, Padding::same, grads[0], grads[1], nullptr);
}

bool finite_model(const CnnModel& model) {
    for (const auto* p : model.parameters())
        if (!p->all_finite()) return false;
    return true;
}

} // namespace

std::size_t flattened_features(const InputSize& input) {
    return kConv2Filters * pooled(pooled(input.height)) * pooled(pooled(input.width));
}

template <typename T>
BasicCnnModel<T> init_model(const InputSize& input, std::uint64_t seed) {
    if (input.channels == 0) throw ArgumentError("init_model: input needs at least one channel");
    if (input.height < 8 || input.width < 8) {
        throw ArgumentError("init_model: input " + shape_string(input.shape()) +
                            " too small for two pooling stages (need H, W >= 8)");
    }
    BasicCnnModel<T> m;
    m.input = input;
    m.seed = seed;
    Rng rng = Rng::substream(seed, "init");
    const std::size_t k2 = kKernelSize * kKernelSize;
    const std::size_t flat = flattened_features(input);

    m.conv1_kernels = BasicTensor<T>({kConv1Filters, input.channels, kKernelSize, kKernelSize});
    m.conv1_bias = BasicTensor<T>({kConv1Filters});
    m.conv2_kernels = BasicTensor<T>({kConv2Filters, kConv1Filters, kKernelSize, kKernelSize});
    m.conv2_bias = BasicTensor<T>({kConv2Filters});
    m.dense1_weights = BasicTensor<T>({kHiddenUnits, flat});
    m.dense1_bias = BasicTensor<T>({kHiddenUnits});
    m.dense2_weights = BasicTensor<T>({kClasses, kHiddenUnits});
    m.dense2_bias = BasicTensor<T>({kClasses});

    fill_uniform(m.conv1_kernels, std::sqrt(6.0 / static_cast<double>(input.channels * k2)), rng);
    fill_uniform(m.conv2_kernels, std::sqrt(6.0 / static_cast<double>(kConv1Filters * k2)), rng);
    fill_uniform(m.dense1_weights, std::sqrt(6.0 / static_cast<double>(flat)), rng);
    fill_uniform(m.dense2_weights, std::sqrt(6.0 / static_cast<double>(kHiddenUnits)), rng);
    return m;
}

template <typename T>
BasicTensor<T> forward(const BasicCnnModel<T>& model, const BasicTensor<T>& batch, bool training, Rng& rng,
                       double dropout_rate) {
    Shape expected{0};
    const Shape in = model.input.shape();
    expected.insert(expected.end(), in.begin(), in.end());
    if (batch.rank() != 4 || !std::equal(in.begin(), in.end(), batch.shape().begin() + 1)) {
        expected[0] = batch.rank() ? batch.dim(0) : 0;
        throw ShapeError("cnn forward: batch " + shape_string(batch.shape()) + ", expected " +
                         shape_string(expected));
    }
    const std::size_t n = batch.dim(0);
    BasicTensor<T> probs({n, kClasses});
    for (std::size_t b = 0; b < n; ++b) {
        const SampleTrace<T> t = forward_sample(model, batch.slice(b), training, rng, dropout_rate);
        for (std::size_t c = 0; c < kClasses; ++c) probs.at(b, c) = t.probs[c];
    }
    return probs;
}

template <typename T>
LossAndGradients<T> loss_and_gradients(const BasicCnnModel<T>& model,
                                       const std::vector<const BasicTensor<T>*>& samples,
                                       const std::vector<int>& classes, bool training, Rng& rng,
                                       double dropout_rate) {
    if (samples.size() != classes.size()) {
        throw ShapeError("loss_and_gradients: " + std::to_string(samples.size()) + " samples but " +
                         std::to_string(classes.size()) + " labels");
    }
    if (samples.empty()) throw ArgumentError("loss_and_gradients: empty batch");
    LossAndGradients<T> out;
    for (const auto* p : model.parameters()) out.grads.emplace_back(p->shape());
    const T scale = static_cast<T>(1.0 / static_cast<double>(samples.size()));
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (classes[i] != 0 && classes[i] != 1) throw ArgumentError("loss_and_gradients: class must be 0 or 1");
        const SampleTrace<T> t = forward_sample(model, *samples[i], training, rng, dropout_rate);
        out.loss += cross_entropy(t.probs, static_cast<std::size_t>(classes[i]));
        out.correct += predicted_class(t.probs[0], t.probs[1]) == classes[i];
        backward_sample(model, *samples[i], t, classes[i], scale, out.grads);
    }
    out.loss /= static_cast<double>(samples.size());
    return out;
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ArgumentError("learning_rate must be positive");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ArgumentError("momentum must be in [0, 1)");
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw ArgumentError("dropout_rate must be in [0, 1)");
    if (batch_size == 0) throw ArgumentError("batch_size must be positive");
}

TrainOutcome train(CnnModel model, const LabeledImages& train_set, const TrainConfig& config,
                   const LabeledImages* test_set) {
    config.validate();
    if (train_set.size() == 0) throw ArgumentError("train: training set is empty");
    if (train_set.classes.size() != train_set.size()) throw ShapeError("train: images and labels differ in count");
    for (int c : train_set.classes)
        if (c != 0 && c != 1) throw ArgumentError("train: labels must be binary (0/1)");

    Rng shuffle_rng = Rng::substream(config.seed, "shuffle");
    Rng dropout_rng = Rng::substream(config.seed, "dropout");
    MomentumState<float> state;
    const SgdHyper hyper{config.learning_rate, config.momentum};
    std::vector<std::size_t> order(train_set.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    TrainOutcome outcome;
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        double loss_sum = 0.0;
        std::size_t correct = 0, batch_index = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_index) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            std::vector<const Tensor*> samples;
            std::vector<int> classes;
            for (std::size_t i = start; i < end; ++i) {
                samples.push_back(&train_set.images[order[i]]);
                classes.push_back(train_set.classes[order[i]]);
            }
            LossAndGradients<float> lg =
                loss_and_gradients(model, samples, classes, true, dropout_rng, config.dropout_rate);
            if (!std::isfinite(lg.loss)) {
                throw TrainingError("training diverged: non-finite loss at epoch " + std::to_string(epoch) +
                                    ", batch " + std::to_string(batch_index + 1));
            }
            optimizer_step(model.parameters(), lg.grads, state, hyper);
            if (!finite_model(model)) {
                throw TrainingError("training diverged: non-finite parameters after epoch " +
                                    std::to_string(epoch) + ", batch " + std::to_string(batch_index + 1));
            }
            loss_sum += lg.loss * static_cast<double>(end - start);
            correct += lg.correct;
        }
        EpochStats stats;
        stats.epoch = epoch;
        stats.loss = loss_sum / static_cast<double>(order.size());
        stats.train_accuracy = static_cast<double>(correct) / static_cast<double>(order.size());
        if (test_set && test_set->size() && config.eval_every && epoch % config.eval_every == 0) {
            stats.test_accuracy = evaluate(model, *test_set).accuracy;
        }
        outcome.history.push_back(stats);
    }
    outcome.model = std::move(model);
    return outcome;
}

EvalResult evaluate(const CnnModel& model, const LabeledImages& test_set) {
    if (test_set.size() == 0) throw ArgumentError("evaluate: test set is empty");
    if (test_set.classes.size() != test_set.size() || test_set.ids.size() != test_set.size()) {
        throw ShapeError("evaluate: ids, images and labels differ in count");
    }
    Rng unused(0);
    std::vector<PredictionRecord> records;
    records.reserve(test_set.size());
    for (std::size_t i = 0; i < test_set.size(); ++i) {
        const SampleTrace<float> t = forward_sample(model, test_set.images[i], false, unused, 0.0);
        records.push_back({test_set.ids[i], test_set.classes[i], predicted_class(t.probs[0], t.probs[1]),
                           static_cast<double>(t.probs[1])});
    }
    return summarize_predictions(std::move(records));
}

namespace {

constexpr std::array<char, 8> kMagic = {'F', 'A', 'C', 'E', 'C', 'N', 'N', '\0'};

void put_u32(std::vector<char>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::vector<char>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

class ByteReader {
public:
    ByteReader(const std::vector<char>& bytes, const std::string& path) : bytes_(bytes), path_(path) {}

    std::uint64_t unsigned_le(int width) {
        if (pos_ + static_cast<std::size_t>(width) > bytes_.size()) throw IoError(path_, "truncated checkpoint");
        std::uint64_t v = 0;
        for (int i = 0; i < width; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        pos_ += static_cast<std::size_t>(width);
        return v;
    }
    std::uint32_t u32() { return static_cast<std::uint32_t>(unsigned_le(4)); }
    std::uint64_t u64() { return unsigned_le(8); }
    bool at_end() const { return pos_ == bytes_.size(); }

private:
    const std::vector<char>& bytes_;
    const std::string& path_;
    std::size_t pos_ = 0;
};

} // namespace

void save_checkpoint(const CnnModel& model, const std::string& path) {
    std::vector<char> out(kMagic.begin(), kMagic.end());
    put_u32(out, model.version);
    put_u32(out, static_cast<std::uint32_t>(model.input.channels));
    put_u32(out, static_cast<std::uint32_t>(model.input.height));
    put_u32(out, static_cast<std::uint32_t>(model.input.width));
    put_u64(out, model.seed);
    const auto params = model.parameters();
    put_u32(out, static_cast<std::uint32_t>(params.size()));
    for (const auto* p : params) {
        put_u32(out, static_cast<std::uint32_t>(p->rank()));
        for (std::size_t d : p->shape()) put_u32(out, static_cast<std::uint32_t>(d));
    }
    for (const auto* p : params) {
        for (float v : p->values()) {
            std::uint32_t bits;
            std::memcpy(&bits, &v, sizeof bits);
            put_u32(out, bits);
        }
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw IoError(path, "cannot create checkpoint");
    file.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!file) throw IoError(path, "checkpoint write failed");
}

CnnModel load_checkpoint(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw IoError(path, "cannot open checkpoint");
    const std::vector<char> bytes{std::istreambuf_iterator<char>(file), std::istreambuf_iterator<char>()};
    if (bytes.size() < kMagic.size() || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
        throw IoError(path, "not a checkpoint (bad magic bytes)");
    }
    std::vector<char> body(bytes.begin() + kMagic.size(), bytes.end());
    ByteReader r(body, path);
    const std::uint32_t version = r.u32();
    if (version != kCheckpointVersion) {
        throw IoError(path, "checkpoint version " + std::to_string(version) + " is not supported (expected version " +
                                std::to_string(kCheckpointVersion) + ")");
    }
    InputSize input;
    input.channels = r.u32();
    input.height = r.u32();
    input.width = r.u32();
    const std::uint64_t seed = r.u64();
    CnnModel model;
    try {
        model = init_model<float>(input, seed);
    } catch (const Error& e) {
        throw IoError(path, std::string("invalid checkpoint header: ") + e.what());
    }
    auto params = model.parameters();
    if (r.u32() != params.size()) throw IoError(path, "checkpoint tensor count mismatch");
    for (auto* p : params) {
        const std::uint32_t rank = r.u32();
        Shape shape;
        for (std::uint32_t i = 0; i < rank; ++i) shape.push_back(r.u32());
        if (shape != p->shape()) {
            throw IoError(path, "checkpoint tensor shape " + shape_string(shape) + " does not match " +
                                    shape_string(p->shape()));
        }
    }
    for (auto* p : params) {
        for (auto& v : p->values()) {
            const std::uint32_t bits = r.u32();
            std::memcpy(&v, &bits, sizeof v);
        }
    }
    if (!r.at_end()) throw IoError(path, "trailing bytes after checkpoint data");
    return model;
}

template BasicCnnModel<float> init_model<float>(const InputSize&, std::uint64_t);
template BasicCnnModel<double> init_model<double>(const InputSize&, std::uint64_t);
template BasicTensor<float> forward(const BasicCnnModel<float>&, const BasicTensor<float>&, bool, Rng&, double);
template BasicTensor<double> forward(const BasicCnnModel<double>&, const BasicTensor<double>&, bool, Rng&, double);
template LossAndGradients<float> loss_and_gradients(const BasicCnnModel<float>&,
                                                    const std::vector<const BasicTensor<float>*>&,
                                                    const std::vector<int>&, bool, Rng&, double);
template LossAndGradients<double> loss_and_gradients(const BasicCnnModel<double>&,
                                                     const std::vector<const BasicTensor<double>*>&,
                                                     const std::vector<int>&, bool, Rng&, double);

} // namespace faceattr
