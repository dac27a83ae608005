#include "sboot/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>

#include "sboot/error.hpp"
#include "sboot/random.hpp"

namespace sboot {

MetricRecords diff_records(std::span<const SchemeValue> classical, std::span<const SchemeValue> sequential)
{
    if (classical.size() != sequential.size()) {
        throw InvalidArgument("diff_records: record counts differ");
    }
    MetricRecords merged;
    merged.reserve(classical.size());
    for (const auto& c : classical) {
        const auto it = std::find_if(sequential.begin(), sequential.end(), [&](const SchemeValue& s) {
            return s.dataset == c.dataset && s.metric == c.metric;
        });
        if (it == sequential.end()) {
            throw InvalidArgument("diff_records: no sequential record for (" + c.dataset + ", " + c.metric + ")");
        }
        merged.push_back({c.dataset, c.type, c.metric, c.value, it->value, it->value - c.value});
    }
    return merged;
}

EnsemblePair fit_pair(const Dataset& train, const EnsembleSettings& settings)
{
    return {fit_bagged(train, settings.scheme_config(Scheme::Classical), settings.hp, settings.workers),
            fit_bagged(train, settings.scheme_config(Scheme::Sequential), settings.hp, settings.workers)};
}

namespace {

using MetricFn = std::function<std::vector<std::pair<std::string, double>>(const BaggedEnsemble&)>;

/// Evaluates `metrics` on both ensembles in the same way and differences them.
MetricRecords paired(const std::string& dataset, const std::string& type, const EnsemblePair& ensembles,
                     const MetricFn& metrics)
{
    auto collect = [&](const BaggedEnsemble& e) {
        std::vector<SchemeValue> values;
        for (auto& [name, value] : metrics(e)) {
            values.push_back({dataset, type, name, value});
        }
        return values;
    };
    const auto classical = collect(ensembles.classical);
    const auto sequential = collect(ensembles.sequential);
    return diff_records(classical, sequential);
}

void require_task(const Dataset& d, TaskKind kind, const char* experiment)
{
    if (d.task().kind != kind) {
        throw InvalidArgument(std::string(experiment) + " requires a " +
                              (kind == TaskKind::Classification ? "classification" : "regression") + " task");
    }
}

} // namespace

NodeClassError node_class_error(const BaggedEnsemble& e, const Dataset& test)
{
    const std::size_t num_classes = e.task.num_classes;
    double weight = 0.0;
    double e1_sum = 0.0;
    double e2_sum = 0.0;
    for (const auto& tree : e.trees) {
        std::vector<std::vector<std::int64_t>> test_counts(tree.nodes().size());
        for (std::size_t i = 0; i < test.size(); ++i) {
            auto& counts = test_counts[tree.apply(test.row(i))];
            if (counts.empty()) {
                counts.assign(num_classes, 0);
            }
            ++counts[test.label(i)];
        }
        for (NodeId id = 0; id < tree.nodes().size(); ++id) {
            const auto& counts = test_counts[id];
            if (counts.empty()) {
                continue;
            }
            const auto& leaf = tree.leaf_stats(id);
            const auto in_bag = static_cast<std::int64_t>(tree.nodes()[id].count);
            const auto routed = std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
            // |q_c - p_c| = |N_c m - t_c N| / (N m)
            std::int64_t total_gap = 0;
            std::vector<std::int64_t> gap(num_classes);
            for (std::size_t c = 0; c < num_classes; ++c) {
                gap[c] = std::llabs(static_cast<std::int64_t>(leaf.class_counts[c]) * routed - counts[c] * in_bag);
                total_gap += gap[c];
            }
            const auto c_star = predicted_label(leaf.value);
            const double m = static_cast<double>(routed);
            const double e1 = static_cast<double>(gap[c_star]) / static_cast<double>(in_bag * routed);
            const double e2 = static_cast<double>(total_gap) /
                              static_cast<double>(static_cast<std::int64_t>(num_classes) * in_bag * routed);
            e1_sum += m * e1;
            e2_sum += m * e2;
            weight += m;
        }
    }
    if (weight == 0.0) {
        throw EstimateUndefined("EXP1: no leaf receives test data");
    }
    return {e1_sum / weight, e2_sum / weight};
}

MetricRecords run_exp1(const Dataset& train, const Dataset& test, const EnsemblePair& ensembles,
                       const std::string& type)
{
    require_task(train, TaskKind::Classification, "EXP1");
    return paired(train.name(), type, ensembles, [&](const BaggedEnsemble& e) {
        const auto err = node_class_error(e, test);
        return std::vector<std::pair<std::string, double>>{{"E1_B", err.e1}, {"E2_B", err.e2}};
    });
}

namespace {

struct LeafAccumulator {
    double sum = 0.0;
    double count = 0.0;
};

/// Count-weighted mean squared gap between leaf means and reference means.
void accumulate_gaps(const Tree& tree, const std::vector<LeafAccumulator>& reference, double& weighted,
                     double& weight)
{
    for (NodeId id = 0; id < reference.size(); ++id) {
        const auto& ref = reference[id];
        if (ref.count == 0.0) {
            continue;
        }
        const double gap = tree.leaf_stats(id).mean() - ref.sum / ref.count;
        weighted += ref.count * gap * gap;
        weight += ref.count;
    }
}

} // namespace

NodeMeanError node_mean_error(const BaggedEnsemble& e, const Dataset& train, const Dataset& test)
{
    double oob_weighted = 0.0;
    double oob_weight = 0.0;
    double test_weighted = 0.0;
    double test_weight = 0.0;
    for (std::size_t b = 0; b < e.trees.size(); ++b) {
        const auto& tree = e.trees[b];
        const auto& resample = e.resamples[b];
        std::vector<LeafAccumulator> oob(tree.nodes().size());
        std::vector<LeafAccumulator> held_out(tree.nodes().size());
        for (std::size_t i = 0; i < train.size(); ++i) {
            if (resample.contains(static_cast<std::uint32_t>(i))) {
                continue;
            }
            auto& acc = oob[tree.apply(train.row(i))];
            acc.sum += train.target(i);
            acc.count += 1.0;
        }
        for (std::size_t i = 0; i < test.size(); ++i) {
            auto& acc = held_out[tree.apply(test.row(i))];
            acc.sum += test.target(i);
            acc.count += 1.0;
        }
        accumulate_gaps(tree, oob, oob_weighted, oob_weight);
        accumulate_gaps(tree, held_out, test_weighted, test_weight);
    }
    if (oob_weight == 0.0 || test_weight == 0.0) {
        throw EstimateUndefined("EXP2: every leaf lacks reference observations");
    }
    return {oob_weighted / oob_weight, test_weighted / test_weight};
}

MetricRecords run_exp2(const Dataset& train, const Dataset& test, const EnsemblePair& ensembles,
                       const std::string& type)
{
    require_task(train, TaskKind::Regression, "EXP2");
    return paired(train.name(), type, ensembles, [&](const BaggedEnsemble& e) {
        const auto err = node_mean_error(e, train, test);
        return std::vector<std::pair<std::string, double>>{{"EB1", err.eb1}, {"EB2", err.eb2}};
    });
}

NodeVariability node_variability(const BaggedEnsemble& e, const Dataset& test)
{
    if (test.size() == 0) {
        throw EstimateUndefined("EXP3: empty test set");
    }
    const std::size_t width = e.task.output_width();
    const std::size_t n = test.size();
    const std::size_t trees = e.trees.size();
    const double b_count = static_cast<double>(trees);

    // Pass 1: leaf of every test row under every tree, and s*(x).
    std::vector<NodeId> leaf_of(trees * n);
    std::vector<double> reference(n * width, 0.0);
    double leaves = 0.0;
    for (std::size_t b = 0; b < trees; ++b) {
        const auto& tree = e.trees[b];
        leaves += static_cast<double>(tree.leaf_count());
        std::vector<std::vector<double>> leaf_ref(tree.nodes().size());
        std::vector<double> routed(tree.nodes().size(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const NodeId id = tree.apply(test.row(i));
            leaf_of[b * n + i] = id;
            auto& ref = leaf_ref[id];
            if (ref.empty()) {
                ref.assign(width, 0.0);
            }
            if (e.task.is_classification()) {
                ref[test.label(i)] += 1.0;
            } else {
                ref[0] += test.target(i);
            }
            routed[id] += 1.0;
        }
        for (std::size_t i = 0; i < n; ++i) {
            const NodeId id = leaf_of[b * n + i];
            for (std::size_t c = 0; c < width; ++c) {
                reference[i * width + c] += leaf_ref[id][c] / routed[id];
            }
        }
    }
    for (auto& r : reference) {
        r /= b_count;
    }

    // Pass 2: per-point total and bias.
    double r1_total = 0.0;
    double r2_total = 0.0;
    double t_total = 0.0;
    std::vector<double> mean_stat(width);
    for (std::size_t i = 0; i < n; ++i) {
        std::fill(mean_stat.begin(), mean_stat.end(), 0.0);
        double total = 0.0;
        for (std::size_t b = 0; b < trees; ++b) {
            const auto& stat = e.trees[b].leaf_stats(leaf_of[b * n + i]).value;
            for (std::size_t c = 0; c < width; ++c) {
                const double d = stat[c] - reference[i * width + c];
                total += d * d;
                mean_stat[c] += stat[c];
            }
        }
        total /= b_count;
        double bias = 0.0;
        for (std::size_t c = 0; c < width; ++c) {
            const double d = mean_stat[c] / b_count - reference[i * width + c];
            bias += d * d;
        }
        r1_total += bias;
        r2_total += total - bias;
        t_total += total;
    }
    const double count = static_cast<double>(n);
    return {r1_total / count, r2_total / count, t_total / count, leaves / b_count};
}

MetricRecords run_exp3(const Dataset& train, const Dataset& test, const EnsemblePair& ensembles,
                       const std::string& type)
{
    return paired(train.name(), type, ensembles, [&](const BaggedEnsemble& e) {
        const auto v = node_variability(e, test);
        return std::vector<std::pair<std::string, double>>{
            {"R1", v.r1}, {"R2", v.r2}, {"R3", v.r3}, {"R4", v.r4}};
    });
}

OobTestAlignment summarize_alignment(std::span<const RepetitionErrors> repetitions)
{
    const std::size_t m = repetitions.size();
    if (m < 2) {
        throw InvalidArgument("EXP4 needs at least two repetitions");
    }
    OobTestAlignment out;
    for (const auto& r : repetitions) {
        out.eob += r.oob;
        out.ets += r.test;
        out.absdiff += std::abs(r.oob - r.test);
    }
    const double count = static_cast<double>(m);
    out.eob /= count;
    out.ets /= count;
    out.absdiff /= count;
    double ss = 0.0;
    for (const auto& r : repetitions) {
        ss += (r.test - out.ets) * (r.test - out.ets);
    }
    const double sd = std::sqrt(ss / (count - 1.0));
    if (sd > 0.0) {
        out.ratio = out.absdiff / sd;
    } else if (out.absdiff > 0.0) {
        throw EstimateUndefined("EXP4 ratio undefined: test error has zero spread across repetitions");
    }
    return out;
}

std::uint64_t repetition_seed(std::uint64_t seed, std::size_t repetition) noexcept
{
    return mix64(mix64(seed ^ 0x4558503452455053ULL) + mix64(stream_tag::kRepetition + repetition));
}

MetricRecords run_exp4(const std::string& dataset, const std::string& type, const RepetitionData& data,
                       const Exp4Config& config)
{
    std::vector<RepetitionErrors> classical;
    std::vector<RepetitionErrors> sequential;
    for (std::size_t r = 0; r < config.repetitions; ++r) {
        const auto pair = data(r);
        auto settings = config.ensemble;
        settings.seed = repetition_seed(config.ensemble.seed, r);
        const auto ensembles = fit_pair(pair.train, settings);
        auto errors = [&](const BaggedEnsemble& e) {
            const auto report = oob_error(e, oob_sets(e), pair.train);
            return RepetitionErrors{report.error, test_error(e, pair.test)};
        };
        classical.push_back(errors(ensembles.classical));
        sequential.push_back(errors(ensembles.sequential));
    }
    auto values = [&](const std::vector<RepetitionErrors>& reps) {
        const auto s = summarize_alignment(reps);
        return std::vector<SchemeValue>{{dataset, type, "absdiff", s.absdiff},
                                        {dataset, type, "eOB", s.eob},
                                        {dataset, type, "eTS", s.ets},
                                        {dataset, type, "ratio", s.ratio}};
    };
    return diff_records(values(classical), values(sequential));
}

namespace {

double mse(const Tree& tree, const Dataset& test)
{
    double total = 0.0;
    for (std::size_t i = 0; i < test.size(); ++i) {
        const double r = test.target(i) - tree.predict(test.row(i)).front();
        total += r * r;
    }
    return total / static_cast<double>(test.size());
}

} // namespace

double meta_prediction_mse(const BaggedEnsemble& e, const Dataset& train, const Dataset& test,
                           const TreeHyperparams& hp)
{
    require_task(train, TaskKind::Regression, "EXP5");
    const auto sets = oob_sets(e);
    if (sets.covered.size() < hp.min_samples_split) {
        throw EstimateUndefined("EXP5: only " + std::to_string(sets.covered.size()) +
                                " training rows are out-of-bag somewhere");
    }
    std::vector<double> oob_column;
    oob_column.reserve(sets.covered.size());
    for (auto i : sets.covered) {
        oob_column.push_back(oob_predict(e, sets, train, i).front());
    }
    const auto meta_train = train.subset(sets.covered, train.name()).with_extra_feature(oob_column, "oob");
    std::vector<double> test_column(test.size());
    for (std::size_t i = 0; i < test.size(); ++i) {
        test_column[i] = ensemble_predict(e, test.row(i)).front();
    }
    const auto meta_test = test.with_extra_feature(test_column, "oob");
    return mse(fit_tree(meta_train, hp), meta_test);
}

double single_tree_mse(const Dataset& train, const Dataset& test, const TreeHyperparams& hp)
{
    return mse(fit_tree(train, hp), test);
}

MetricRecords run_exp5(const Dataset& train, const Dataset& test, const EnsemblePair& ensembles,
                       const TreeHyperparams& hp, const std::string& type)
{
    require_task(train, TaskKind::Regression, "EXP5");
    const double original = single_tree_mse(train, test, hp);
    return paired(train.name(), type, ensembles, [&](const BaggedEnsemble& e) {
        return std::vector<std::pair<std::string, double>>{
            {"mse_oob_outputs", meta_prediction_mse(e, train, test, hp)}, {"mse_original", original}};
    });
}

VarianceDecomposition variance_decomposition(std::span<const ThetaSample> samples)
{
    if (samples.size() < 2) {
        throw InvalidArgument("variance_decomposition needs at least two samples");
    }
    struct Group {
        double sum = 0.0;
        std::size_t count = 0;
    };
    std::map<std::size_t, Group> groups;
    double sum = 0.0;
    for (const auto& s : samples) {
        sum += s.theta;
        auto& g = groups[s.distinct];
        g.sum += s.theta;
        ++g.count;
    }
    const double n = static_cast<double>(samples.size());
    const double mean = sum / n;
    VarianceDecomposition out;
    std::map<std::size_t, double> group_ss;
    for (const auto& s : samples) {
        const double d = s.theta - mean;
        out.total += d * d;
        const auto& g = groups[s.distinct];
        const double dg = s.theta - g.sum / static_cast<double>(g.count);
        group_ss[s.distinct] += dg * dg;
    }
    out.total /= n;
    for (const auto& [u, g] : groups) {
        const double w = static_cast<double>(g.count) / n;
        const double gap = g.sum / static_cast<double>(g.count) - mean;
        out.within += w * (group_ss[u] / static_cast<double>(g.count));
        out.between += w * gap * gap;
        out.group_sizes[u] = g.count;
    }
    return out;
}

std::string_view to_string(ReplicateStatistic s) noexcept
{
    switch (s) {
    case ReplicateStatistic::OobError: return "oob_error";
    case ReplicateStatistic::LeafCount: return "leaf_count";
    case ReplicateStatistic::ProbePrediction: return "probe_prediction";
    }
    return "unknown";
}

std::optional<ReplicateStatistic> parse_statistic(std::string_view name) noexcept
{
    for (auto s : {ReplicateStatistic::OobError, ReplicateStatistic::LeafCount,
                   ReplicateStatistic::ProbePrediction}) {
        if (to_string(s) == name) {
            return s;
        }
    }
    return std::nullopt;
}

std::vector<ThetaSample> replicate_statistics(const BaggedEnsemble& e, const Dataset& train,
                                              const Dataset& test, ReplicateStatistic statistic)
{
    std::vector<ThetaSample> samples;
    for (std::size_t b = 0; b < e.trees.size(); ++b) {
        const auto& tree = e.trees[b];
        const auto& resample = e.resamples[b];
        const std::size_t u = distinct_count(resample);
        switch (statistic) {
        case ReplicateStatistic::OobError: {
            double total = 0.0;
            std::size_t count = 0;
            for (std::size_t i = 0; i < train.size(); ++i) {
                if (!resample.contains(static_cast<std::uint32_t>(i))) {
                    total += loss(e.task, train.target(i), tree.predict(train.row(i)));
                    ++count;
                }
            }
            if (count > 0) {
                samples.push_back({total / static_cast<double>(count), u});
            }
            break;
        }
        case ReplicateStatistic::LeafCount:
            samples.push_back({static_cast<double>(tree.leaf_count()), u});
            break;
        case ReplicateStatistic::ProbePrediction:
            if (test.size() == 0) {
                throw EstimateUndefined("probe prediction needs a test row");
            }
            samples.push_back({tree.predict(test.row(0)).front(), u});
            break;
        }
    }
    return samples;
}

MetricRecords run_vardecomp(const Dataset& train, const Dataset& test, const EnsemblePair& ensembles,
                            ReplicateStatistic statistic, const std::string& type)
{
    return paired(train.name(), type, ensembles, [&](const BaggedEnsemble& e) {
        const auto d = variance_decomposition(replicate_statistics(e, train, test, statistic));
        return std::vector<std::pair<std::string, double>>{
            {"var_between", d.between}, {"var_total", d.total}, {"var_within", d.within}};
    });
}

} // namespace sboot
