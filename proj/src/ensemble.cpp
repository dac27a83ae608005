#include "sboot/ensemble.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "sboot/error.hpp"
#include "sboot/parallel.hpp"

namespace sboot {

BaggedEnsemble fit_bagged(const Dataset& train, const SchemeConfig& scheme,
                          const TreeHyperparams& hp, std::size_t workers)
{
    scheme.validate();
    if (train.size() == 0) {
        throw InvalidArgument("fit_bagged: training set is empty");
    }
    std::vector<std::optional<IndexResample>> drawn(scheme.replicate_count);
    parallel_for(scheme.replicate_count, workers, [&](std::size_t b) {
        auto stream = replicate_stream(scheme.seed, b);
        drawn[b] = draw_replicate(scheme, train.size(), stream);
    });
    std::vector<IndexResample> resamples;
    resamples.reserve(drawn.size());
    for (auto& r : drawn) {
        resamples.push_back(std::move(*r));
    }
    return fit_bagged_on(train, std::move(resamples), scheme, hp, workers);
}

BaggedEnsemble fit_bagged_on(const Dataset& train, std::vector<IndexResample> resamples,
                             const SchemeConfig& scheme, const TreeHyperparams& hp,
                             std::size_t workers)
{
    if (train.size() == 0) {
        throw InvalidArgument("fit_bagged: training set is empty");
    }
    std::vector<std::optional<Tree>> fitted(resamples.size());
    parallel_for(resamples.size(), workers, [&](std::size_t b) {
        const auto weights = resamples[b].multiplicities(train.size());
        fitted[b] = fit_tree(train, weights, hp);
    });
    BaggedEnsemble e;
    e.trees.reserve(fitted.size());
    for (auto& t : fitted) {
        e.trees.push_back(std::move(*t));
    }
    e.resamples = std::move(resamples);
    e.scheme = scheme;
    e.task = train.task();
    e.train_size = train.size();
    return e;
}

std::size_t OobSets::oob_count(std::uint32_t b) const noexcept
{
    std::size_t count = 0;
    for (const auto& list : replicates) {
        count += std::binary_search(list.begin(), list.end(), b) ? 1 : 0;
    }
    return count;
}

OobSets oob_sets(const BaggedEnsemble& e)
{
    OobSets sets;
    sets.replicates.resize(e.train_size);
    std::vector<bool> in_bag(e.train_size);
    for (std::uint32_t b = 0; b < e.resamples.size(); ++b) {
        std::fill(in_bag.begin(), in_bag.end(), false);
        for (auto i : e.resamples[b].distinct()) {
            in_bag[i] = true;
        }
        for (std::size_t i = 0; i < e.train_size; ++i) {
            if (!in_bag[i]) {
                sets.replicates[i].push_back(b);
            }
        }
    }
    for (std::size_t i = 0; i < e.train_size; ++i) {
        if (!sets.replicates[i].empty()) {
            sets.covered.push_back(i);
        }
    }
    return sets;
}

std::vector<double> average_outputs(std::span<const Tree> trees, std::span<const std::uint32_t> which,
                                    std::span<const double> x)
{
    if (which.empty()) {
        throw InvalidArgument("average_outputs: no trees selected");
    }
    std::vector<double> total(trees[which.front()].task().output_width(), 0.0);
    for (auto b : which) {
        const auto out = trees[b].predict(x);
        for (std::size_t c = 0; c < total.size(); ++c) {
            total[c] += out[c];
        }
    }
    const double count = static_cast<double>(which.size());
    for (auto& v : total) {
        v /= count;
    }
    return total;
}

std::size_t predicted_label(std::span<const double> proportions) noexcept
{
    std::size_t best = 0;
    for (std::size_t c = 1; c < proportions.size(); ++c) {
        if (proportions[c] > proportions[best]) {
            best = c;
        }
    }
    return best;
}

double loss(const Task& task, double y, std::span<const double> prediction) noexcept
{
    if (task.is_classification()) {
        return predicted_label(prediction) == static_cast<std::size_t>(y) ? 0.0 : 1.0;
    }
    const double r = y - prediction.front();
    return r * r;
}

std::vector<double> oob_predict(const BaggedEnsemble& e, const OobSets& sets, const Dataset& train,
                                std::size_t i)
{
    if (i >= sets.replicates.size() || !sets.is_covered(i)) {
        throw NotCovered("observation " + std::to_string(i) + " is not out-of-bag for any replicate");
    }
    return average_outputs(e.trees, sets.replicates[i], train.row(i));
}

OobReport oob_error(const BaggedEnsemble& e, const OobSets& sets, const Dataset& train)
{
    if (sets.covered.empty()) {
        throw EstimateUndefined("OOB error undefined: no observation is out-of-bag");
    }
    OobReport report;
    report.predictions.resize(train.size());
    double total = 0.0;
    for (auto i : sets.covered) {
        auto prediction = oob_predict(e, sets, train, i);
        total += loss(e.task, train.target(i), prediction);
        report.predictions[i] = std::move(prediction);
    }
    report.covered = sets.covered.size();
    report.excluded = train.size() - report.covered;
    report.error = total / static_cast<double>(report.covered);
    return report;
}

std::vector<double> ensemble_predict(const BaggedEnsemble& e, std::span<const double> x)
{
    std::vector<std::uint32_t> all(e.trees.size());
    std::iota(all.begin(), all.end(), 0U);
    return average_outputs(e.trees, all, x);
}

double test_error(const BaggedEnsemble& e, const Dataset& test)
{
    if (test.size() == 0) {
        throw EstimateUndefined("test error undefined: empty test set");
    }
    std::vector<std::uint32_t> all(e.trees.size());
    std::iota(all.begin(), all.end(), 0U);
    double total = 0.0;
    for (std::size_t i = 0; i < test.size(); ++i) {
        total += loss(e.task, test.target(i), average_outputs(e.trees, all, test.row(i)));
    }
    return total / static_cast<double>(test.size());
}

} // namespace sboot
