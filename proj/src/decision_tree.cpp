#include "faceattr/decision_tree.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>

#include "faceattr/error.hpp"

namespace faceattr::audit {

namespace {

constexpr double kGainTolerance = 1e-12;

double entropy(const std::array<std::size_t, 2>& c) {
    const double n = static_cast<double>(c[0] + c[1]);
    if (n == 0.0) return 0.0;
    double h = 0.0;
    for (auto k : c) {
        if (k == 0) continue;
        const double p = static_cast<double>(k) / n;
        h -= p * std::log2(p);
    }
    return h;
}

struct Fitter {
    const AttributeTable& table;
    std::size_t target;
    std::size_t max_depth;
    std::size_t min_leaf;
    DecisionTree& tree;

    int cls(std::size_t r) const { return table.records()[r].labels[target] == 1 ? 1 : 0; }
    bool has(std::size_t r, std::size_t f) const { return table.records()[r].labels[f] == 1; }

    std::array<std::size_t, 2> count(const std::vector<std::size_t>& rows) const {
        std::array<std::size_t, 2> c{};
        for (auto r : rows) ++c[static_cast<std::size_t>(cls(r))];
        return c;
    }

    struct Candidate {
        std::size_t feature;
        double gain;
        std::array<std::size_t, 2> absent, present;
    };

    // Valid splits of `rows`, in feature order.
    std::vector<Candidate> candidates(const std::vector<std::size_t>& rows) const {
        std::vector<Candidate> out;
        const std::size_t need = std::max<std::size_t>(min_leaf, 1);
        for (std::size_t f = 0; f < table.attribute_count(); ++f) {
            if (f == target) continue;
            Candidate c{f, 0.0, {}, {}};
            for (auto r : rows) ++(has(r, f) ? c.present : c.absent)[static_cast<std::size_t>(cls(r))];
            if (c.absent[0] + c.absent[1] < need || c.present[0] + c.present[1] < need) continue;
            c.gain = information_gain(c.absent, c.present);
            out.push_back(c);
        }
        return out;
    }

    void partition(const std::vector<std::size_t>& rows, std::size_t f, std::vector<std::size_t>& absent,
                   std::vector<std::size_t>& present) const {
        for (auto r : rows) (has(r, f) ? present : absent).push_back(r);
    }

    double best_gain(const std::vector<std::size_t>& rows) const {
        double best = 0.0;
        for (const auto& c : candidates(rows)) best = std::max(best, c.gain);
        return best;
    }

    std::optional<std::size_t> choose(const std::vector<std::size_t>& rows, std::size_t remaining) const {
        const auto cands = candidates(rows);
        const Candidate* best = nullptr;
        for (const auto& c : cands)
            if (!best || c.gain > best->gain + kGainTolerance) best = &c;
        if (best && best->gain > kGainTolerance) return best->feature;
        if (remaining < 2) return std::nullopt;

        // Lookahead: split gain plus the weighted best gain one level down.
        const double n = static_cast<double>(rows.size());
        std::optional<std::size_t> pick;
        double pick_gain = kGainTolerance;
        for (const auto& c : cands) {
            std::vector<std::size_t> a, p;
            partition(rows, c.feature, a, p);
            const double g = c.gain + static_cast<double>(a.size()) / n * best_gain(a) +
                             static_cast<double>(p.size()) / n * best_gain(p);
            if (g > pick_gain + (pick ? kGainTolerance : 0.0)) {
                pick = c.feature;
                pick_gain = g;
            }
        }
        return pick;
    }

    int grow(const std::vector<std::size_t>& rows, std::size_t depth) {
        const int index = static_cast<int>(tree.nodes.size());
        TreeNode node;
        node.counts = count(rows);
        node.predicted = node.counts[1] > node.counts[0] ? 1 : 0;
        node.depth = depth;
        tree.nodes.push_back(node);

        const bool pure = node.counts[0] == 0 || node.counts[1] == 0;
        if (pure || depth >= max_depth) return index;
        const auto f = choose(rows, max_depth - depth);
        if (!f) return index;

        std::vector<std::size_t> a, p;
        partition(rows, *f, a, p);
        const int left = grow(a, depth + 1);
        const int right = grow(p, depth + 1);
        auto& n = tree.nodes[static_cast<std::size_t>(index)];
        n.leaf = false;
        n.feature = *f;
        n.absent = left;
        n.present = right;
        return index;
    }
};

} // namespace

double information_gain(const std::array<std::size_t, 2>& absent, const std::array<std::size_t, 2>& present) {
    const std::array<std::size_t, 2> parent{absent[0] + present[0], absent[1] + present[1]};
    const double n = static_cast<double>(parent[0] + parent[1]);
    if (n == 0.0) return 0.0;
    const double na = static_cast<double>(absent[0] + absent[1]);
    const double np = static_cast<double>(present[0] + present[1]);
    return entropy(parent) - na / n * entropy(absent) - np / n * entropy(present);
}

std::size_t DecisionTree::depth() const {
    std::size_t d = 0;
    for (const auto& n : nodes)
        if (n.leaf) d = std::max(d, n.depth);
    return d;
}

DecisionTree fit_tree(const AttributeTable& table, const std::string& target_attribute, std::size_t max_depth,
                      std::size_t min_leaf) {
    if (table.empty()) throw ArgumentError("fit_tree: table has no records");
    DecisionTree tree;
    tree.attribute_names = table.names();
    tree.target = table.attribute_index(target_attribute);
    tree.max_depth = max_depth;
    std::vector<std::size_t> rows(table.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    Fitter fitter{table, tree.target, max_depth, min_leaf, tree};
    fitter.grow(rows, 0);
    return tree;
}

TreePrediction tree_predict(const DecisionTree& tree, std::span<const Label> labels) {
    if (labels.size() != tree.attribute_names.size())
        throw ArgumentError("tree_predict: expected " + std::to_string(tree.attribute_names.size()) + " labels, got " +
                            std::to_string(labels.size()));
    TreePrediction out;
    std::size_t i = 0;
    while (!tree.nodes[i].leaf) {
        const auto& n = tree.nodes[i];
        const bool present = labels[n.feature] == 1;
        out.path.push_back({n.feature, present});
        i = static_cast<std::size_t>(present ? n.present : n.absent);
    }
    out.predicted = tree.nodes[i].predicted;
    return out;
}

double tree_accuracy(const DecisionTree& tree, const AttributeTable& table) {
    if (table.empty()) throw ArgumentError("tree_accuracy: table has no records");
    std::size_t correct = 0;
    for (const auto& rec : table.records()) {
        const int truth = rec.labels[tree.target] == 1 ? 1 : 0;
        if (tree_predict(tree, rec.labels).predicted == truth) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(table.size());
}

std::string format_tree(const DecisionTree& tree) {
    std::string out;
    const std::string& target = tree.attribute_names[tree.target];
    std::function<void(std::size_t, std::size_t)> emit = [&](std::size_t i, std::size_t indent) {
        const auto& n = tree.nodes[i];
        const std::string pad(indent * 2, ' ');
        if (n.leaf) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "predict %s=%s (negative %zu, positive %zu)\n", target.c_str(),
                          n.predicted ? "+1" : "-1", n.counts[0], n.counts[1]);
            out += pad + buf;
            return;
        }
        const std::string& name = tree.attribute_names[n.feature];
        out += pad + "if " + name + " = +1:\n";
        emit(static_cast<std::size_t>(n.present), indent + 1);
        out += pad + "else:  # " + name + " = -1\n";
        emit(static_cast<std::size_t>(n.absent), indent + 1);
    };
    emit(0, 0);
    return out;
}

} // namespace faceattr::audit
