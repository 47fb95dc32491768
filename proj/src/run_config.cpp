#include "faceattr/run_config.hpp"

#include <fstream>
#include <istream>
#include <limits>
#include <stdexcept>

#include "faceattr/error.hpp"
#include "faceattr/text.hpp"

namespace faceattr {

const std::vector<ConfigKey>& config_keys() {
    static const std::vector<ConfigKey> keys{
        {"attributes", "", "attribute list file (list_attr_celeba.txt layout)"},
        {"images", "", "directory holding the image files"},
        {"embeddings", "", "embedding table (header 'count dim', then 'id v1 .. vD')"},
        {"eval", "", "per-image evaluation CSV (input to audit confusion/noise)"},
        {"out", "out", "output directory"},
        {"attr", "Eyeglasses", "target attribute"},
        {"train-n", "5000", "training images"},
        {"test-n", "5000", "test images"},
        {"balance", "both", "balanced partitions: none, train or both"},
        {"seed", "42", "seed for every random stream"},
        {"img-size", "32", "square input size in pixels"},
        {"channels", "3", "input channels (1 or 3)"},
        {"epochs", "", "training epochs (default 15 for the CNN, 30 for the probe)"},
        {"batch-size", "64", "minibatch size (probe: 0 = full batch)"},
        {"lr", "0.01", "learning rate"},
        {"momentum", "0.9", "momentum coefficient"},
        {"dropout", "0.5", "dropout rate before the output layer"},
        {"l2", "0.0001", "probe weight decay"},
        {"eval-every", "1", "evaluate the test split every N epochs (0 = never)"},
        {"restrict", "false", "probe: keep only attribute records present in the embedding table"},
        {"threshold", "0.5", "positive-class probability threshold"},
        {"top-k", "50", "label-noise candidates to report"},
        {"metric", "jaccard", "co-occurrence metric: jaccard or conditional"},
        {"heatmap-cell", "8", "heatmap pixels per matrix cell"},
        {"max-depth", "5", "decision-tree depth limit"},
        {"min-leaf", "1", "minimum records per tree leaf"},
        {"tree-n", "0", "records sampled for the tree (0 = all)"},
        {"n-images", "202599", "workload: images in the dataset"},
        {"n-features", "40", "workload: attributes per image"},
        {"n-workers", "50", "workload: annotators"},
        {"days", "90", "workload: calendar days"},
        {"hours-per-day", "8", "workload: working hours per day"},
        {"redundancy", "1", "workload: labels collected per image"},
        {"images-per-hour", "", "workload: given labelling rate (switches to rate mode)"},
    };
    return keys;
}

namespace {

const ConfigKey* find_key(const std::string& name) {
    for (const auto& k : config_keys())
        if (name == k.name) return &k;
    return nullptr;
}

} // namespace

RunConfig::RunConfig() {
    for (const auto& k : config_keys()) values_[k.name] = k.default_value;
}

std::string RunConfig::normalize(std::string_view key) {
    std::string out(trim(key));
    for (auto& c : out)
        if (c == '_') c = '-';
    return out;
}

void RunConfig::merge_text(std::istream& in, const std::string& origin) {
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string_view body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(origin + ": line " + std::to_string(number) + ": expected 'key = value'");
        const std::string key = normalize(body.substr(0, eq));
        if (!find_key(key))
            throw ConfigError(origin + ": line " + std::to_string(number) + ": unknown key '" + key + "'");
        values_[key] = std::string(trim(body.substr(eq + 1)));
    }
}

void RunConfig::merge_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path, "cannot open config file");
    merge_text(in, path);
}

void RunConfig::set(std::string_view key, std::string value) {
    const std::string k = normalize(key);
    if (!find_key(k)) throw ConfigError("unknown key '" + k + "'");
    values_[k] = std::move(value);
}

void RunConfig::set_default(std::string_view key, std::string value) {
    if (!has(key)) set(key, std::move(value));
}

bool RunConfig::has(std::string_view key) const { return !get(key).empty(); }

const std::string& RunConfig::get(std::string_view key) const {
    const auto it = values_.find(normalize(key));
    if (it == values_.end()) throw ConfigError("unknown key '" + std::string(key) + "'");
    return it->second;
}

std::string RunConfig::require_path(std::string_view key) const {
    if (!has(key)) throw ConfigError("missing required setting '" + std::string(key) + "'");
    return get(key);
}

std::uint64_t RunConfig::get_u64(std::string_view key) const {
    const std::string& v = get(key);
    try {
        const long long n = parse_integer(v);
        if (n < 0) throw std::invalid_argument("negative");
        return static_cast<std::uint64_t>(n);
    } catch (const std::exception&) {
        throw ConfigError("setting '" + std::string(key) + "' must be a non-negative integer, got '" + v + "'");
    }
}

std::size_t RunConfig::get_size(std::string_view key) const { return static_cast<std::size_t>(get_u64(key)); }

double RunConfig::get_real(std::string_view key) const {
    const std::string& v = get(key);
    try {
        return parse_real(v);
    } catch (const std::exception&) {
        throw ConfigError("setting '" + std::string(key) + "' must be a number, got '" + v + "'");
    }
}

bool RunConfig::get_bool(std::string_view key) const {
    const std::string v = to_lower(get(key));
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off" || v.empty()) return false;
    throw ConfigError("setting '" + std::string(key) + "' must be true or false, got '" + get(key) + "'");
}

} // namespace faceattr
