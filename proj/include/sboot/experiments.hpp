#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sboot/cart.hpp"
#include "sboot/dataset.hpp"
#include "sboot/ensemble.hpp"

namespace sboot {

/// One metric under a single scheme.
struct SchemeValue {
    std::string dataset;
    std::string type;
    std::string metric;
    double value = 0.0;
};

/// One table row: the metric under both schemes and diff = SB-OOB - OOB.
struct MetricRecord {
    std::string dataset;
    std::string type;
    std::string metric;
    double oob_value = 0.0;
    double sb_oob_value = 0.0;
    double diff = 0.0;

    friend bool operator==(const MetricRecord&, const MetricRecord&) = default;
};

using MetricRecords = std::vector<MetricRecord>;

/// Merges per-scheme values by (dataset, metric) in the order of `classical`.
/// Positive diff means the metric is higher under the Sequential scheme.
/// Throws InvalidArgument if the key sets differ.
MetricRecords diff_records(std::span<const SchemeValue> classical, std::span<const SchemeValue> sequential);

/// Classical and Sequential ensembles on the same training set and seed.
struct EnsemblePair {
    BaggedEnsemble classical;
    BaggedEnsemble sequential;
};

struct EnsembleSettings {
    std::uint64_t seed = 1;
    std::size_t replicates = kDefaultReplicates;
    double rho = kDefaultRho;
    TreeHyperparams hp;
    std::size_t workers = 1;

    SchemeConfig scheme_config(Scheme scheme) const { return {scheme, rho, seed, replicates}; }
};

/// Both ensembles through fit_bagged; the SchemeConfigs differ only in `scheme`.
EnsemblePair fit_pair(const Dataset& train, const EnsembleSettings& settings);

// ---------------------------------------------------------------------------
// EXP1: node class-proportion accuracy (classification).
//
// For every tree and every leaf t receiving m_t >= 1 test rows, compare the
// in-bag proportions q with the test proportions p at t. E1_B averages
// |q_c* - p_c*| for the leaf's predicted class c*, E2_B averages
// (1/C) sum_c |q_c - p_c|; both weight leaves by m_t. Deviations are formed
// from integer counts, so E1_B == E2_B holds exactly when C == 2.

struct NodeClassError {
    double e1 = 0.0;
    double e2 = 0.0;
};

/// Throws EstimateUndefined if no leaf receives test data.
NodeClassError node_class_error(const BaggedEnsemble& e, const Dataset& test);

MetricRecords run_exp1(const Dataset& train, const Dataset& test, const EnsemblePair& ensembles,
                       const std::string& type);

// ---------------------------------------------------------------------------
// EXP2: node conditional-mean accuracy (regression).
//
// For every tree and leaf, the squared gap between the in-bag mean and the
// mean of the reference rows routed there, weighted by the reference count.
// EB1 uses the tree's own out-of-bag training rows, EB2 the test rows.
// Leaves without reference rows are skipped.

struct NodeMeanError {
    double eb1 = 0.0;
    double eb2 = 0.0;
};

/// Throws EstimateUndefined if every leaf is skipped for either reference.
NodeMeanError node_mean_error(const BaggedEnsemble& e, const Dataset& train, const Dataset& test);

MetricRecords run_exp2(const Dataset& train, const Dataset& test, const EnsemblePair& ensembles,
                       const std::string& type);

// ---------------------------------------------------------------------------
// EXP3: node statistic variability across replicates.
//
// For test point x, s_b(x) is tree b's leaf statistic at x (class-proportion
// vector or mean) and r_b(x) the test-set statistic of the same leaf. The
// reference is s*(x) = mean_b r_b(x). Per point:
//   T(x)  = mean_b |s_b(x) - s*(x)|^2
//   R1(x) = |mean_b s_b(x) - s*(x)|^2
//   R2(x) = T(x) - R1(x)   (the replicate spread of s_b(x))
// R1, R2, R3 are test-set means of R1(x), R2(x), T(x); R4 is the mean leaf
// count per tree.

struct NodeVariability {
    double r1 = 0.0;
    double r2 = 0.0;
    double r3 = 0.0;
    double r4 = 0.0;
};

NodeVariability node_variability(const BaggedEnsemble& e, const Dataset& test);

MetricRecords run_exp3(const Dataset& train, const Dataset& test, const EnsemblePair& ensembles,
                       const std::string& type);

// ---------------------------------------------------------------------------
// EXP4: OOB versus test error over M repetitions.

struct RepetitionErrors {
    double oob = 0.0;
    double test = 0.0;
};

struct OobTestAlignment {
    double absdiff = 0.0; ///< mean_r |eOB_r - eTS_r|
    double eob = 0.0;     ///< mean_r eOB_r
    double ets = 0.0;     ///< mean_r eTS_r
    double ratio = 0.0;   ///< absdiff / sample stddev of eTS_r
};

/// Throws InvalidArgument for fewer than two repetitions and
/// EstimateUndefined when eTS_r has zero spread but absdiff > 0
/// (ratio is 0 when both are zero).
OobTestAlignment summarize_alignment(std::span<const RepetitionErrors> repetitions);

/// Supplies the train/test data of repetition r.
using RepetitionData = std::function<DataPair(std::size_t repetition)>;

struct Exp4Config {
    EnsembleSettings ensemble;
    std::size_t repetitions = 10;
};

/// Ensemble seed for repetition r of an experiment seeded with `seed`.
std::uint64_t repetition_seed(std::uint64_t seed, std::size_t repetition) noexcept;

/// Runs `config.repetitions` repetitions per scheme; both schemes see the same
/// data and the same per-repetition seed.
MetricRecords run_exp4(const std::string& dataset, const std::string& type, const RepetitionData& data,
                       const Exp4Config& config);

// ---------------------------------------------------------------------------
// EXP5: second-level prediction from OOB outputs (regression).
//
// A single CART tree is fit on the covered training rows with the OOB
// prediction appended as a feature; test rows get the full-ensemble
// prediction appended. mse_oob_outputs is its test MSE. mse_original is the
// same learner on the original features and does not depend on the scheme.

/// Throws EstimateUndefined if fewer than min_samples_split rows are covered.
double meta_prediction_mse(const BaggedEnsemble& e, const Dataset& train, const Dataset& test,
                           const TreeHyperparams& hp);

double single_tree_mse(const Dataset& train, const Dataset& test, const TreeHyperparams& hp);

MetricRecords run_exp5(const Dataset& train, const Dataset& test, const EnsemblePair& ensembles,
                       const TreeHyperparams& hp, const std::string& type);

// ---------------------------------------------------------------------------
// Law-of-total-variance decomposition grouped by distinct count.

struct ThetaSample {
    double theta = 0.0;
    std::size_t distinct = 0;
};

struct VarianceDecomposition {
    double total = 0.0;   ///< mean of (theta - mean)^2
    double within = 0.0;  ///< sum_u w_u Var_u(theta)
    double between = 0.0; ///< sum_u w_u (mean_u - mean)^2
    std::map<std::size_t, std::size_t> group_sizes;
};

/// Population-style grouped decomposition with w_u the group frequency.
/// Throws InvalidArgument for fewer than two samples.
VarianceDecomposition variance_decomposition(std::span<const ThetaSample> samples);

enum class ReplicateStatistic {
    OobError,        ///< loss of tree b averaged over its own OOB rows
    LeafCount,       ///< number of leaves of tree b
    ProbePrediction, ///< first output component of tree b at the first test row
};

std::string_view to_string(ReplicateStatistic s) noexcept;
std::optional<ReplicateStatistic> parse_statistic(std::string_view name) noexcept;

/// theta_b paired with U_b for every replicate (replicates without OOB rows
/// are dropped for OobError).
std::vector<ThetaSample> replicate_statistics(const BaggedEnsemble& e, const Dataset& train,
                                              const Dataset& test, ReplicateStatistic statistic);

/// var_total, var_within, var_between under both schemes.
MetricRecords run_vardecomp(const Dataset& train, const Dataset& test, const EnsemblePair& ensembles,
                            ReplicateStatistic statistic, const std::string& type);

} // namespace sboot
