#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sboot/cart.hpp"
#include "sboot/dataset.hpp"
#include "sboot/resampling.hpp"

namespace sboot {

/// B trees, each fit on the multiset given by the matching resample.
struct BaggedEnsemble {
    std::vector<Tree> trees;
    std::vector<IndexResample> resamples;
    SchemeConfig scheme;
    Task task;
    std::size_t train_size = 0;

    std::size_t size() const noexcept { return trees.size(); }
};

/// Draws `scheme.replicate_count` replicates (replicate b from
/// replicate_stream(scheme.seed, b)) and fits one tree per replicate.
/// The result does not depend on `workers`.
BaggedEnsemble fit_bagged(const Dataset& train, const SchemeConfig& scheme,
                          const TreeHyperparams& hp, std::size_t workers = 1);

/// Fits one tree per supplied resample. This is the scheme-agnostic half of
/// fit_bagged; `scheme` is recorded but not consulted.
BaggedEnsemble fit_bagged_on(const Dataset& train, std::vector<IndexResample> resamples,
                             const SchemeConfig& scheme, const TreeHyperparams& hp,
                             std::size_t workers = 1);

/// Out-of-bag membership: replicates[i] lists (ascending) the b with
/// i not in resamples[b]; covered lists the i with at least one such b.
struct OobSets {
    std::vector<std::vector<std::uint32_t>> replicates;
    std::vector<std::size_t> covered;

    bool is_covered(std::size_t i) const noexcept { return !replicates[i].empty(); }
    /// Number of observations out-of-bag for replicate b.
    std::size_t oob_count(std::uint32_t b) const noexcept;
};

OobSets oob_sets(const BaggedEnsemble& e);

/// Unweighted mean of the outputs of trees[b] at x over the listed b.
/// Every ensemble prediction goes through here.
std::vector<double> average_outputs(std::span<const Tree> trees, std::span<const std::uint32_t> which,
                                    std::span<const double> x);

/// Argmax of a class-proportion vector; ties go to the lowest class.
std::size_t predicted_label(std::span<const double> proportions) noexcept;

/// 0-1 loss on the predicted label, or squared error.
double loss(const Task& task, double y, std::span<const double> prediction) noexcept;

/// Average over the trees for which observation i is out-of-bag.
/// Throws NotCovered if there are none.
std::vector<double> oob_predict(const BaggedEnsemble& e, const OobSets& sets, const Dataset& train,
                                std::size_t i);

struct OobReport {
    /// Per-observation OOB prediction; empty for uncovered observations.
    std::vector<std::optional<std::vector<double>>> predictions;
    /// Misclassification rate or mean squared error over covered observations.
    double error = 0.0;
    std::size_t covered = 0;
    std::size_t excluded = 0;
};

/// Throws EstimateUndefined if no observation is covered.
OobReport oob_error(const BaggedEnsemble& e, const OobSets& sets, const Dataset& train);

/// Average over all B trees.
std::vector<double> ensemble_predict(const BaggedEnsemble& e, std::span<const double> x);

/// Mean loss of the full ensemble on `test`.
double test_error(const BaggedEnsemble& e, const Dataset& test);

} // namespace sboot
