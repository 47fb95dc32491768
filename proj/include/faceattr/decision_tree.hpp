#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "faceattr/attributes.hpp"

namespace faceattr::audit {

struct TreeNode {
    bool leaf = true;
    int predicted = 0;                     ///< majority class, ties to 0
    std::array<std::size_t, 2> counts{};   ///< {negative, positive}
    std::size_t feature = 0;               ///< attribute column, splits only
    int absent = -1, present = -1;         ///< child node indices
    std::size_t depth = 0;
};

/// Binary tree over +-1 attribute columns. nodes[0] is the root.
struct DecisionTree {
    std::vector<TreeNode> nodes;
    std::vector<std::string> attribute_names;
    std::size_t target = 0;
    std::size_t max_depth = 0;

    /// Longest root-to-leaf path, in splits.
    std::size_t depth() const;
};

/// Entropy reduction (bits) of splitting `counts` into `absent`/`present`.
double information_gain(const std::array<std::size_t, 2>& absent, const std::array<std::size_t, 2>& present);

/// Greedy top-down induction on information gain. Candidate features are all
/// columns except the target; gains within 1e-12 tie to the lowest index.
/// A node stays a leaf when pure, at max_depth, when no split leaves
/// min_leaf records on both sides, or when no split gains information and a
/// two-level lookahead (only with >= 2 levels left) finds none either.
DecisionTree fit_tree(const AttributeTable& table, const std::string& target_attribute, std::size_t max_depth,
                      std::size_t min_leaf = 1);

struct TreeStep {
    std::size_t feature;
    bool present;
};

struct TreePrediction {
    int predicted = 0;
    std::vector<TreeStep> path;
};

/// `labels` is a full record (all F columns).
TreePrediction tree_predict(const DecisionTree& tree, std::span<const Label> labels);

/// Fraction of records whose target class the tree reproduces.
double tree_accuracy(const DecisionTree& tree, const AttributeTable& table);

/// Indented if/else rules, one line per branch and leaf.
std::string format_tree(const DecisionTree& tree);

} // namespace faceattr::audit
