#include "sboot/cart.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sboot/error.hpp"

namespace sboot {

void TreeHyperparams::validate() const
{
    if (min_samples_leaf < 1) {
        throw InvalidArgument("min_samples_leaf must be at least 1");
    }
    if (min_samples_split < 2 * min_samples_leaf) {
        throw InvalidArgument("min_samples_split must be at least 2 * min_samples_leaf");
    }
}

Tree::Tree(Task task, std::size_t num_features, std::vector<Node> nodes)
    : task_(task), num_features_(num_features), nodes_(std::move(nodes))
{
    if (nodes_.empty()) {
        throw InvalidArgument("tree needs at least a root node");
    }
}

NodeId Tree::apply(std::span<const double> x) const
{
    if (x.size() != num_features_) {
        throw InvalidArgument("feature vector has dimension " + std::to_string(x.size()) +
                              ", tree expects " + std::to_string(num_features_));
    }
    NodeId id = root();
    while (!nodes_[id].is_leaf()) {
        const auto& s = nodes_[id].split();
        id = x[s.feature] <= s.threshold ? s.left : s.right;
    }
    return id;
}

std::span<const double> Tree::predict(std::span<const double> x) const
{
    return nodes_[apply(x)].leaf().value;
}

const LeafNode& Tree::leaf_stats(NodeId id) const
{
    if (id >= nodes_.size() || !nodes_[id].is_leaf()) {
        throw InvalidArgument("node " + std::to_string(id) + " is not a leaf");
    }
    return nodes_[id].leaf();
}

std::size_t Tree::leaf_count() const noexcept
{
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.is_leaf(); }));
}

namespace {

struct SplitChoice {
    std::size_t feature = 0;
    double threshold = 0.0;
    double score = -std::numeric_limits<double>::infinity();
    bool found = false;
};

/// Node fitting over presorted per-feature row orders. Each node owns the
/// range [begin, end) of every feature's order array; splitting stably
/// partitions that range so children stay sorted.
class TreeBuilder {
public:
    TreeBuilder(const Dataset& data, std::span<const std::uint32_t> weights, const TreeHyperparams& hp)
        : data_(data), weights_(weights), hp_(hp), classify_(data.task().is_classification()),
          num_classes_(data.task().num_classes), p_(data.num_features())
    {
        for (std::uint32_t i = 0; i < data.size(); ++i) {
            if (weights[i] > 0) {
                active_.push_back(i);
            }
        }
        order_.resize(p_ * active_.size());
        for (std::size_t j = 0; j < p_; ++j) {
            auto first = order_.begin() + static_cast<std::ptrdiff_t>(j * active_.size());
            std::copy(active_.begin(), active_.end(), first);
            std::stable_sort(first, first + static_cast<std::ptrdiff_t>(active_.size()),
                             [&](std::uint32_t a, std::uint32_t b) {
                                 return data.feature(a, j) < data.feature(b, j);
                             });
        }
        goes_left_.assign(data.size(), false);
        scratch_.resize(active_.size());
        left_counts_.resize(num_classes_);
        total_counts_.resize(num_classes_);
    }

    std::size_t active_rows() const noexcept { return active_.size(); }

    std::vector<Node> build()
    {
        grow(0, active_.size(), 0);
        return std::move(nodes_);
    }

private:
    std::span<std::uint32_t> rows(std::size_t feature, std::size_t begin, std::size_t end)
    {
        return {order_.data() + feature * active_.size() + begin, end - begin};
    }

    NodeId grow(std::size_t begin, std::size_t end, std::size_t depth)
    {
        const auto id = static_cast<NodeId>(nodes_.size());
        nodes_.emplace_back();

        // Node totals, accumulated in feature-0 order.
        double weight = 0.0;
        double sum = 0.0;
        double sum_sq = 0.0;
        double y_min = std::numeric_limits<double>::infinity();
        double y_max = -y_min;
        std::fill(total_counts_.begin(), total_counts_.end(), 0.0);
        for (auto i : rows(0, begin, end)) {
            const double w = weights_[i];
            const double y = data_.target(i);
            weight += w;
            if (classify_) {
                total_counts_[data_.label(i)] += w;
            } else {
                sum += w * y;
                sum_sq += w * y * y;
                y_min = std::min(y_min, y);
                y_max = std::max(y_max, y);
            }
        }

        nodes_[id].count = static_cast<std::uint64_t>(weight);
        nodes_[id].depth = depth;

        const bool pure = classify_ ? std::count_if(total_counts_.begin(), total_counts_.end(),
                                                    [](double c) { return c > 0.0; }) <= 1
                                    : y_max <= y_min;
        const bool depth_reached = hp_.max_depth && depth >= *hp_.max_depth;
        if (pure || depth_reached || weight < static_cast<double>(hp_.min_samples_split)) {
            make_leaf(id, weight, sum);
            return id;
        }

        double parent_score = 0.0;
        if (classify_) {
            for (double c : total_counts_) {
                parent_score += c * c;
            }
            parent_score /= weight;
        } else {
            parent_score = sum * sum / weight;
        }

        const SplitChoice best = find_split(begin, end, weight, sum);
        const double scale = classify_ ? weight : std::max(1.0, sum_sq);
        if (!best.found || !(best.score - parent_score > 1e-12 * scale)) {
            make_leaf(id, weight, sum);
            return id;
        }

        const std::size_t mid = partition(begin, end, best);
        const NodeId left = grow(begin, mid, depth + 1);
        const NodeId right = grow(mid, end, depth + 1);
        nodes_[id].payload = SplitNode{best.feature, best.threshold, left, right};
        return id;
    }

    void make_leaf(NodeId id, double weight, double sum)
    {
        LeafNode leaf;
        if (classify_) {
            leaf.value.resize(num_classes_);
            leaf.class_counts.resize(num_classes_);
            for (std::size_t c = 0; c < num_classes_; ++c) {
                leaf.class_counts[c] = static_cast<std::uint64_t>(total_counts_[c]);
                leaf.value[c] = total_counts_[c] / weight;
            }
        } else {
            leaf.value = {sum / weight};
        }
        nodes_[id].payload = std::move(leaf);
    }

    /// Score is the impurity-reduction proxy to maximize:
    /// sum_k c_k^2 / W per child (Gini) or sum^2 / W per child (variance).
    SplitChoice find_split(std::size_t begin, std::size_t end, double weight, double sum)
    {
        SplitChoice best;
        const double min_leaf = static_cast<double>(hp_.min_samples_leaf);
        for (std::size_t j = 0; j < p_; ++j) {
            const auto sorted = rows(j, begin, end);
            double left_weight = 0.0;
            double left_sum = 0.0;
            double left_sq = 0.0;  // sum_k left_k^2
            double right_sq = 0.0; // sum_k right_k^2
            if (classify_) {
                std::fill(left_counts_.begin(), left_counts_.end(), 0.0);
                for (double c : total_counts_) {
                    right_sq += c * c;
                }
            }
            for (std::size_t pos = 0; pos + 1 < sorted.size(); ++pos) {
                const auto i = sorted[pos];
                const double w = weights_[i];
                left_weight += w;
                if (classify_) {
                    const auto k = data_.label(i);
                    const double lc = left_counts_[k];
                    const double rc = total_counts_[k] - lc;
                    left_sq += 2.0 * lc * w + w * w;
                    right_sq += -2.0 * rc * w + w * w;
                    left_counts_[k] = lc + w;
                } else {
                    left_sum += w * data_.target(i);
                }

                const double here = data_.feature(i, j);
                const double next = data_.feature(sorted[pos + 1], j);
                if (!(here < next)) {
                    continue;
                }
                const double right_weight = weight - left_weight;
                if (left_weight < min_leaf) {
                    continue;
                }
                if (right_weight < min_leaf) {
                    break;
                }
                double score = 0.0;
                if (classify_) {
                    score = left_sq / left_weight + right_sq / right_weight;
                } else {
                    const double right_sum = sum - left_sum;
                    score = left_sum * left_sum / left_weight + right_sum * right_sum / right_weight;
                }
                if (score > best.score) {
                    double threshold = here + (next - here) / 2.0;
                    if (!(threshold < next)) {
                        threshold = here;
                    }
                    best = {j, threshold, score, true};
                }
            }
        }
        return best;
    }

    std::size_t partition(std::size_t begin, std::size_t end, const SplitChoice& split)
    {
        for (auto i : rows(0, begin, end)) {
            goes_left_[i] = data_.feature(i, split.feature) <= split.threshold;
        }
        std::size_t mid = begin;
        for (std::size_t j = 0; j < p_; ++j) {
            auto segment = rows(j, begin, end);
            std::size_t left = 0;
            std::size_t right = 0;
            const std::size_t left_total =
                static_cast<std::size_t>(std::count_if(segment.begin(), segment.end(),
                                                       [&](std::uint32_t i) { return goes_left_[i]; }));
            for (auto i : segment) {
                if (goes_left_[i]) {
                    scratch_[left++] = i;
                } else {
                    scratch_[left_total + right++] = i;
                }
            }
            std::copy(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(segment.size()),
                      segment.begin());
            mid = begin + left_total;
        }
        return mid;
    }

    const Dataset& data_;
    std::span<const std::uint32_t> weights_;
    const TreeHyperparams& hp_;
    bool classify_;
    std::size_t num_classes_;
    std::size_t p_;
    std::vector<std::uint32_t> active_;
    std::vector<std::uint32_t> order_;
    std::vector<bool> goes_left_;
    std::vector<std::uint32_t> scratch_;
    std::vector<double> left_counts_;
    std::vector<double> total_counts_;
    std::vector<Node> nodes_;
};

} // namespace

Tree fit_tree(const Dataset& data, std::span<const std::uint32_t> weights, const TreeHyperparams& hp)
{
    hp.validate();
    if (weights.size() != data.size()) {
        throw InvalidArgument("weight vector length does not match dataset size");
    }
    const Impurity expected = data.task().is_classification() ? Impurity::Gini : Impurity::Variance;
    if (hp.impurity && *hp.impurity != expected) {
        throw InvalidArgument("impurity does not match the dataset task");
    }
    TreeBuilder builder(data, weights, hp);
    if (builder.active_rows() == 0) {
        throw InvalidArgument("fit_tree: no rows with positive weight");
    }
    return Tree(data.task(), data.num_features(), builder.build());
}

Tree fit_tree(const Dataset& data, const TreeHyperparams& hp)
{
    const std::vector<std::uint32_t> ones(data.size(), 1);
    return fit_tree(data, ones, hp);
}

} // namespace sboot
