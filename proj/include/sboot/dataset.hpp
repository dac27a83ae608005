#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sboot {

enum class TaskKind { Classification, Regression };

struct Task {
    TaskKind kind = TaskKind::Regression;
    std::size_t num_classes = 0;

    static Task classification(std::size_t num_classes) { return {TaskKind::Classification, num_classes}; }
    static Task regression() { return {TaskKind::Regression, 0}; }

    bool is_classification() const noexcept { return kind == TaskKind::Classification; }

    /// Length of a prediction vector: C class proportions, or a single mean.
    std::size_t output_width() const noexcept { return is_classification() ? num_classes : 1; }

    friend bool operator==(const Task&, const Task&) = default;
};

/// Feature matrix (row-major, all finite) with a class-label or real response.
///
/// Classification labels are stored as doubles holding integers in [0, C).
class Dataset {
public:
    Dataset() = default;

    /// Validates and takes ownership. Throws DataError on non-finite values,
    /// labels outside [0, C) or shape mismatch.
    Dataset(std::string name, Task task, std::size_t num_features, std::vector<double> features,
            std::vector<double> targets, std::vector<std::string> feature_names = {},
            std::vector<std::string> class_names = {});

    const std::string& name() const noexcept { return name_; }
    const Task& task() const noexcept { return task_; }
    std::size_t size() const noexcept { return targets_.size(); }
    std::size_t num_features() const noexcept { return num_features_; }

    std::span<const double> row(std::size_t i) const noexcept
    {
        return {features_.data() + i * num_features_, num_features_};
    }
    double feature(std::size_t i, std::size_t j) const noexcept { return features_[i * num_features_ + j]; }
    double target(std::size_t i) const noexcept { return targets_[i]; }
    std::size_t label(std::size_t i) const noexcept { return static_cast<std::size_t>(targets_[i]); }

    const std::vector<double>& features() const noexcept { return features_; }
    const std::vector<double>& targets() const noexcept { return targets_; }
    const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }
    /// Optional label dictionary; entry c names class c.
    const std::vector<std::string>& class_names() const noexcept { return class_names_; }

    /// Rows selected by `rows`, in that order.
    Dataset subset(std::span<const std::size_t> rows, std::string name) const;

    /// Same rows with one extra feature column appended.
    Dataset with_extra_feature(std::span<const double> column, std::string column_name) const;

    /// FNV-1a hash over shape, features and targets.
    std::uint64_t content_hash() const noexcept;

private:
    std::string name_;
    Task task_;
    std::size_t num_features_ = 0;
    std::vector<double> features_;
    std::vector<double> targets_;
    std::vector<std::string> feature_names_;
    std::vector<std::string> class_names_;
};

/// Fixed train/test partition. Both index lists are ascending.
struct TrainTestSplit {
    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> test_indices;
    std::uint64_t split_seed = 0;

    friend bool operator==(const TrainTestSplit&, const TrainTestSplit&) = default;
};

/// round(2n/3) training rows, chosen by a permutation driven by split_seed only.
TrainTestSplit fixed_split(std::size_t n, std::uint64_t split_seed);
TrainTestSplit fixed_split(const Dataset& d, std::uint64_t split_seed);

/// Train and test datasets for one benchmark.
struct DataPair {
    Dataset train;
    Dataset test;
};

DataPair apply_split(const Dataset& d, const TrainTestSplit& split);

std::uint64_t fnv1a(std::span<const unsigned char> bytes,
                    std::uint64_t hash = 0xcbf29ce484222325ULL) noexcept;

} // namespace sboot
