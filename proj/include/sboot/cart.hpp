#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "sboot/dataset.hpp"

namespace sboot {

enum class Impurity { Gini, Variance };

/// CART settings shared by every tree in every experiment.
///
/// Defaults: split nodes holding at least 10 (weighted) rows, keep at least
/// 5 rows per leaf, unlimited depth, no pruning. Impurity follows the task
/// (Gini for classification, within-node variance for regression) unless set.
struct TreeHyperparams {
    std::size_t min_samples_split = 10;
    std::size_t min_samples_leaf = 5;
    std::optional<std::size_t> max_depth;
    std::optional<Impurity> impurity;

    /// Throws InvalidArgument unless min_samples_leaf >= 1 and
    /// min_samples_split >= 2 * min_samples_leaf.
    void validate() const;
};

using NodeId = std::uint32_t;

struct SplitNode {
    std::size_t feature = 0;
    double threshold = 0.0;
    NodeId left = 0;
    NodeId right = 0;

    friend bool operator==(const SplitNode&, const SplitNode&) = default;
};

/// In-bag statistics of a terminal node.
struct LeafNode {
    /// Class proportions (classification) or the single in-bag mean (regression).
    std::vector<double> value;
    /// Multiplicity-weighted in-bag count per class; empty for regression.
    std::vector<std::uint64_t> class_counts;

    double mean() const noexcept { return value.front(); }

    friend bool operator==(const LeafNode&, const LeafNode&) = default;
};

struct Node {
    std::uint64_t count = 0; ///< in-bag rows reaching the node, with multiplicity
    std::size_t depth = 0;
    std::variant<SplitNode, LeafNode> payload;

    bool is_leaf() const noexcept { return std::holds_alternative<LeafNode>(payload); }
    const SplitNode& split() const { return std::get<SplitNode>(payload); }
    const LeafNode& leaf() const { return std::get<LeafNode>(payload); }

    friend bool operator==(const Node&, const Node&) = default;
};

/// A fitted, immutable CART tree stored as a node arena rooted at node 0.
class Tree {
public:
    Tree(Task task, std::size_t num_features, std::vector<Node> nodes);

    const Task& task() const noexcept { return task_; }
    std::size_t num_features() const noexcept { return num_features_; }
    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    static constexpr NodeId root() noexcept { return 0; }

    /// Leaf reached by x. x[feature] <= threshold goes left.
    NodeId apply(std::span<const double> x) const;

    /// Leaf statistic for x: class proportions or a one-element mean.
    std::span<const double> predict(std::span<const double> x) const;

    /// Throws InvalidArgument if `id` is not a leaf.
    const LeafNode& leaf_stats(NodeId id) const;

    std::size_t leaf_count() const noexcept;

    friend bool operator==(const Tree&, const Tree&) = default;

private:
    Task task_;
    std::size_t num_features_;
    std::vector<Node> nodes_;
};

/// Greedy binary CART on the rows of `data` weighted by `weights` (one entry
/// per row; a resample's multiplicities). Rows with weight 0 are ignored.
///
/// At each node the (feature, threshold) minimizing weighted child impurity
/// is chosen over midpoints between consecutive distinct values, ties going
/// to the lowest feature and then the lowest threshold. A node becomes a leaf
/// if it holds fewer than min_samples_split rows, is pure, sits at max_depth,
/// or no split strictly reduces impurity while leaving min_samples_leaf rows
/// on both sides.
Tree fit_tree(const Dataset& data, std::span<const std::uint32_t> weights, const TreeHyperparams& hp);

/// Unit weights on every row.
Tree fit_tree(const Dataset& data, const TreeHyperparams& hp);

} // namespace sboot
