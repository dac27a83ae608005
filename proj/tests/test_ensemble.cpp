#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "sboot/datagen.hpp"
#include "sboot/ensemble.hpp"
#include "sboot/error.hpp"

using namespace sboot;

namespace {

/// A tree that is a single leaf with the given statistic.
Tree leaf_tree(Task task, std::size_t p, std::vector<double> value)
{
    Node node;
    node.count = 1;
    LeafNode leaf;
    leaf.value = std::move(value);
    if (task.is_classification()) {
        leaf.class_counts.assign(task.num_classes, 0);
    }
    node.payload = std::move(leaf);
    return Tree(task, p, {node});
}

Dataset line_data(std::size_t n, Task task)
{
    std::vector<double> x(n);
    std::vector<double> y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = static_cast<double>(i);
    }
    return Dataset("line", task, 1, std::move(x), std::move(y));
}

BaggedEnsemble hand_ensemble(Task task, std::vector<Tree> trees, std::vector<IndexResample> resamples, std::size_t n)
{
    BaggedEnsemble e;
    e.trees = std::move(trees);
    e.resamples = std::move(resamples);
    e.task = task;
    e.train_size = n;
    return e;
}

IndexResample from_indices(std::vector<std::uint32_t> indices)
{
    auto distinct = indices;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    return IndexResample(Scheme::Classical, std::move(indices), std::move(distinct), std::nullopt);
}

/// Membership recomputed from the raw draw sequences.
std::vector<std::vector<std::uint32_t>> scan_oob(const BaggedEnsemble& e)
{
    std::vector<std::vector<std::uint32_t>> oob(e.train_size);
    for (std::size_t i = 0; i < e.train_size; ++i) {
        for (std::uint32_t b = 0; b < e.resamples.size(); ++b) {
            const auto& draws = e.resamples[b].indices();
            if (std::find(draws.begin(), draws.end(), i) == draws.end()) {
                oob[i].push_back(b);
            }
        }
    }
    return oob;
}

} // namespace

TEST_CASE("B=1, n=1 classical leaves nothing out-of-bag", "[ensemble]")
{
    const auto d = line_data(1, Task::regression());
    const auto e = fit_bagged(d, {Scheme::Classical, 0.632, 1, 1}, TreeHyperparams{});
    REQUIRE(e.resamples.front().indices() == std::vector<std::uint32_t>{0});
    const auto sets = oob_sets(e);
    REQUIRE(sets.covered.empty());
    REQUIRE_THROWS_AS(oob_error(e, sets, d), EstimateUndefined);
    REQUIRE_THROWS_AS(oob_predict(e, sets, d, 0), NotCovered);
}

TEST_CASE("Sequential replicates leave exactly n - k out-of-bag", "[ensemble]")
{
    const auto data = generate(SyntheticSpec{Generator::Twonorm, 100, 10, 3, true}).train;
    const auto e = fit_bagged(data, {Scheme::Sequential, 0.632, 9, 25}, TreeHyperparams{});
    const auto sets = oob_sets(e);
    for (std::uint32_t b = 0; b < e.size(); ++b) {
        REQUIRE(distinct_count(e.resamples[b]) == 63);
        REQUIRE(sets.oob_count(b) == 37);
    }

    const auto small = line_data(10, Task::regression());
    const auto one = fit_bagged(small, {Scheme::Sequential, 0.6, 2, 1}, TreeHyperparams{});
    REQUIRE(oob_sets(one).covered.size() == 4);
}

TEST_CASE("Classical mean OOB-set size", "[ensemble]")
{
    const auto data = generate(SyntheticSpec{Generator::Twonorm, 300, 10, 4, true}).train;
    const auto e = fit_bagged(data, {Scheme::Classical, 0.632, 5, 100}, TreeHyperparams{});
    const auto sets = oob_sets(e);
    double total = 0.0;
    for (const auto& list : sets.replicates) {
        total += static_cast<double>(list.size());
    }
    const double expected = 100.0 * std::pow(1.0 - 1.0 / 300.0, 300);
    REQUIRE(std::abs(total / 300.0 - expected) < 2.0);
    REQUIRE(sets.covered.size() == 300);
}

TEST_CASE("oob_sets matches a brute-force scan", "[ensemble][oracle]")
{
    Stream s(77);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + s.below(20);
        const std::size_t b_count = 1 + s.below(10);
        const auto data = line_data(n, Task::regression());
        const Scheme scheme = trial % 2 ? Scheme::Sequential : Scheme::Classical;
        const auto e = fit_bagged(data, {scheme, 0.5, static_cast<std::uint64_t>(trial), b_count}, TreeHyperparams{});
        const auto sets = oob_sets(e);
        REQUIRE(sets.replicates == scan_oob(e));
        for (std::size_t i = 0; i < n; ++i) {
            const bool listed = std::find(sets.covered.begin(), sets.covered.end(), i) != sets.covered.end();
            REQUIRE(listed == !sets.replicates[i].empty());
        }
    }
}

TEST_CASE("oob_predict only averages trees that did not see the observation", "[ensemble]")
{
    // Tree b predicts one-hot(b), so the prediction reveals which trees were used.
    Stream s(5);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 12;
        const std::size_t b_count = 6;
        const Task task = Task::classification(b_count);
        std::vector<Tree> trees;
        std::vector<IndexResample> resamples;
        for (std::size_t b = 0; b < b_count; ++b) {
            std::vector<double> onehot(b_count, 0.0);
            onehot[b] = 1.0;
            trees.push_back(leaf_tree(task, 1, onehot));
            resamples.push_back(trial % 2 ? multinomial_resample(n, s) : sequential_resample(n, 7, s));
        }
        const auto e = hand_ensemble(task, trees, resamples, n);
        const auto sets = oob_sets(e);
        const auto truth = scan_oob(e);
        const auto d = line_data(n, task);
        for (auto i : sets.covered) {
            const auto pred = oob_predict(e, sets, d, i);
            for (std::uint32_t b = 0; b < b_count; ++b) {
                const bool used = std::find(truth[i].begin(), truth[i].end(), b) != truth[i].end();
                REQUIRE((pred[b] > 0.0) == used);
                if (used) {
                    REQUIRE(pred[b] == Catch::Approx(1.0 / static_cast<double>(truth[i].size())));
                }
            }
        }
    }
}

TEST_CASE("oob_predict and ensemble_predict arithmetic", "[ensemble]")
{
    const Task task = Task::classification(2);
    const auto d = line_data(3, task);
    const double x[] = {0.0};

    SECTION("a single OOB tree is returned as is")
    {
        auto e = hand_ensemble(task, {leaf_tree(task, 1, {0.3, 0.7}), leaf_tree(task, 1, {1.0, 0.0})},
                               {from_indices({1, 2, 1}), from_indices({0, 1, 2})}, 3);
        const auto sets = oob_sets(e);
        REQUIRE(sets.covered == std::vector<std::size_t>{0});
        REQUIRE(oob_predict(e, sets, d, 0) == std::vector<double>{0.3, 0.7});
    }
    SECTION("tied average resolves to the lowest class")
    {
        auto e = hand_ensemble(task, {leaf_tree(task, 1, {1.0, 0.0}), leaf_tree(task, 1, {0.0, 1.0})},
                               {from_indices({1, 1, 2}), from_indices({2, 1, 1})}, 3);
        const auto sets = oob_sets(e);
        const auto pred = oob_predict(e, sets, d, 0);
        REQUIRE(pred == std::vector<double>{0.5, 0.5});
        REQUIRE(predicted_label(pred) == 0);
        REQUIRE(ensemble_predict(e, x) == std::vector<double>{0.5, 0.5});
    }
    SECTION("three-tree regression average by hand")
    {
        const Task reg = Task::regression();
        auto e = hand_ensemble(reg,
                               {leaf_tree(reg, 1, {2.0}), leaf_tree(reg, 1, {5.0}), leaf_tree(reg, 1, {11.0})},
                               {from_indices({1, 2, 2}), from_indices({1, 1, 1}), from_indices({0, 0, 2})}, 3);
        const auto rd = line_data(3, reg);
        const auto sets = oob_sets(e);
        // obs 0 out of trees 0,1: (2+5)/2; obs 1 out of tree 2: 11; obs 2 out of tree 1: 5
        REQUIRE(oob_predict(e, sets, rd, 0)[0] == 3.5);
        REQUIRE(oob_predict(e, sets, rd, 1)[0] == 11.0);
        REQUIRE(oob_predict(e, sets, rd, 2)[0] == 5.0);
        REQUIRE(ensemble_predict(e, x)[0] == 6.0);
        // every target is 0, so the error is the mean of squared predictions
        REQUIRE(oob_error(e, sets, rd).error == Catch::Approx((3.5 * 3.5 + 121.0 + 25.0) / 3.0));
    }
    SECTION("identical trees reproduce the tree")
    {
        auto e = hand_ensemble(task, {leaf_tree(task, 1, {0.25, 0.75}), leaf_tree(task, 1, {0.25, 0.75})},
                               {from_indices({0}), from_indices({1})}, 3);
        REQUIRE(ensemble_predict(e, x) == std::vector<double>{0.25, 0.75});
    }
    SECTION("dimension mismatch")
    {
        auto e = hand_ensemble(task, {leaf_tree(task, 1, {0.25, 0.75})}, {from_indices({0})}, 3);
        const double bad[] = {1.0, 2.0};
        REQUIRE_THROWS_AS(ensemble_predict(e, bad), InvalidArgument);
    }
}

TEST_CASE("oob_error edge values", "[ensemble]")
{
    SECTION("all OOB predictions correct")
    {
        const Task task = Task::classification(2);
        const auto d = line_data(4, task); // all labels 0
        auto e = hand_ensemble(task, {leaf_tree(task, 1, {0.9, 0.1}), leaf_tree(task, 1, {0.6, 0.4})},
                               {from_indices({0, 0, 1, 1}), from_indices({2, 3, 3, 2})}, 4);
        const auto report = oob_error(e, oob_sets(e), d);
        REQUIRE(report.error == 0.0);
        REQUIRE(report.covered == 4);
        REQUIRE(report.excluded == 0);
    }
    SECTION("regression off by one everywhere")
    {
        const Task task = Task::regression();
        const auto d = line_data(4, task); // all targets 0
        auto e = hand_ensemble(task, {leaf_tree(task, 1, {1.0}), leaf_tree(task, 1, {1.0})},
                               {from_indices({0, 0, 1, 1}), from_indices({2, 3, 3, 2})}, 4);
        const auto report = oob_error(e, oob_sets(e), d);
        REQUIRE(report.error == 1.0);
        REQUIRE(report.covered == 4);
    }
    SECTION("uncovered observations are excluded and counted")
    {
        const Task task = Task::regression();
        const auto d = line_data(4, task);
        auto e = hand_ensemble(task, {leaf_tree(task, 1, {2.0})}, {from_indices({0, 1, 1, 0})}, 4);
        const auto report = oob_error(e, oob_sets(e), d);
        REQUIRE(report.covered == 2);
        REQUIRE(report.excluded == 2);
        REQUIRE_FALSE(report.predictions[0]);
        REQUIRE(report.predictions[2]);
        REQUIRE(report.error == 4.0);
    }
}

TEST_CASE("fit_bagged is independent of the worker count", "[ensemble]")
{
    const auto data = generate(SyntheticSpec{Generator::Friedman1, 150, 10, 6, true}).train;
    const SchemeConfig scheme{Scheme::Sequential, 0.632, 12, 16};
    const auto serial = fit_bagged(data, scheme, TreeHyperparams{}, 1);
    const auto threaded = fit_bagged(data, scheme, TreeHyperparams{}, 4);
    REQUIRE(serial.trees == threaded.trees);
    REQUIRE(serial.resamples == threaded.resamples);
}

TEST_CASE("schemes share everything downstream of replicate generation", "[ensemble][isolation]")
{
    // Replaying the Sequential replicates through the Classical-tagged path
    // must reproduce the Sequential ensemble and its OOB estimate exactly.
    const auto data = generate(SyntheticSpec{Generator::Waveform, 200, 10, 8, true}).train;
    const SchemeConfig classical{Scheme::Classical, 0.632, 21, 20};
    SchemeConfig sequential = classical;
    sequential.scheme = Scheme::Sequential;
    const auto seq = fit_bagged(data, sequential, TreeHyperparams{});
    const auto replay = fit_bagged_on(data, seq.resamples, classical, TreeHyperparams{});
    REQUIRE(replay.trees == seq.trees);
    const auto a = oob_error(seq, oob_sets(seq), data);
    const auto b = oob_error(replay, oob_sets(replay), data);
    REQUIRE(a.error == b.error);
    REQUIRE(a.predictions == b.predictions);
}
