#include "sboot/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include "sboot/error.hpp"
#include "sboot/random.hpp"

namespace sboot {

Dataset::Dataset(std::string name, Task task, std::size_t num_features, std::vector<double> features,
                 std::vector<double> targets, std::vector<std::string> feature_names,
                 std::vector<std::string> class_names)
    : name_(std::move(name)), task_(task), num_features_(num_features),
      features_(std::move(features)), targets_(std::move(targets)),
      feature_names_(std::move(feature_names)), class_names_(std::move(class_names))
{
    if (num_features_ == 0) {
        throw DataError(name_ + ": dataset needs at least one feature");
    }
    if (features_.size() != targets_.size() * num_features_) {
        throw DataError(name_ + ": feature matrix size does not match row count");
    }
    if (!feature_names_.empty() && feature_names_.size() != num_features_) {
        throw DataError(name_ + ": feature name count does not match feature count");
    }
    for (std::size_t k = 0; k < features_.size(); ++k) {
        if (!std::isfinite(features_[k])) {
            throw DataError(name_ + ": non-finite feature at row " +
                            std::to_string(k / num_features_) + ", column " +
                            std::to_string(k % num_features_));
        }
    }
    for (std::size_t i = 0; i < targets_.size(); ++i) {
        const double y = targets_[i];
        if (!std::isfinite(y)) {
            throw DataError(name_ + ": non-finite target at row " + std::to_string(i));
        }
        if (task_.is_classification() &&
            (y < 0.0 || y != std::floor(y) || y >= static_cast<double>(task_.num_classes))) {
            throw DataError(name_ + ": class label out of range at row " + std::to_string(i));
        }
    }
    if (task_.is_classification() && task_.num_classes < 1) {
        throw DataError(name_ + ": classification task needs at least one class");
    }
    if (!class_names_.empty() && class_names_.size() != task_.num_classes) {
        throw DataError(name_ + ": label dictionary size does not match class count");
    }
}

Dataset Dataset::subset(std::span<const std::size_t> rows, std::string name) const
{
    std::vector<double> features;
    std::vector<double> targets;
    features.reserve(rows.size() * num_features_);
    targets.reserve(rows.size());
    for (auto i : rows) {
        const auto r = row(i);
        features.insert(features.end(), r.begin(), r.end());
        targets.push_back(targets_[i]);
    }
    return Dataset(std::move(name), task_, num_features_, std::move(features), std::move(targets),
                   feature_names_, class_names_);
}

Dataset Dataset::with_extra_feature(std::span<const double> column, std::string column_name) const
{
    if (column.size() != size()) {
        throw InvalidArgument("extra feature column has " + std::to_string(column.size()) +
                              " entries, dataset has " + std::to_string(size()) + " rows");
    }
    std::vector<double> features;
    features.reserve(size() * (num_features_ + 1));
    for (std::size_t i = 0; i < size(); ++i) {
        const auto r = row(i);
        features.insert(features.end(), r.begin(), r.end());
        features.push_back(column[i]);
    }
    std::vector<std::string> names;
    if (!feature_names_.empty()) {
        names = feature_names_;
        names.push_back(std::move(column_name));
    }
    return Dataset(name_, task_, num_features_ + 1, std::move(features), targets_, std::move(names),
                   class_names_);
}

std::uint64_t fnv1a(std::span<const unsigned char> bytes, std::uint64_t hash) noexcept
{
    for (auto b : bytes) {
        hash ^= b;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

namespace {

template <typename T>
std::uint64_t hash_values(std::span<const T> values, std::uint64_t hash) noexcept
{
    return fnv1a({reinterpret_cast<const unsigned char*>(values.data()), values.size_bytes()}, hash);
}

} // namespace

std::uint64_t Dataset::content_hash() const noexcept
{
    const std::uint64_t shape[] = {size(), num_features_, task_.num_classes};
    auto hash = hash_values<std::uint64_t>(shape, 0xcbf29ce484222325ULL);
    hash = hash_values<double>(features_, hash);
    return hash_values<double>(targets_, hash);
}

TrainTestSplit fixed_split(std::size_t n, std::uint64_t split_seed)
{
    if (n < 3) {
        throw InvalidArgument("fixed_split: need at least 3 rows, got " + std::to_string(n));
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto stream = Stream::derive(split_seed, {stream_tag::kSplit});
    for (std::size_t i = n - 1; i > 0; --i) {
        std::swap(order[i], order[stream.below(i + 1)]);
    }
    // round(2n/3) in integer arithmetic
    const std::size_t train_size = (4 * n + 3) / 6;
    TrainTestSplit split;
    split.split_seed = split_seed;
    split.train_indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(train_size));
    split.test_indices.assign(order.begin() + static_cast<std::ptrdiff_t>(train_size), order.end());
    std::sort(split.train_indices.begin(), split.train_indices.end());
    std::sort(split.test_indices.begin(), split.test_indices.end());
    return split;
}

TrainTestSplit fixed_split(const Dataset& d, std::uint64_t split_seed)
{
    return fixed_split(d.size(), split_seed);
}

DataPair apply_split(const Dataset& d, const TrainTestSplit& split)
{
    return {d.subset(split.train_indices, d.name()), d.subset(split.test_indices, d.name())};
}

} // namespace sboot
