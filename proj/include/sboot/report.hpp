#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "sboot/cart.hpp"
#include "sboot/experiments.hpp"
#include "sboot/resampling.hpp"

namespace sboot {

enum class Experiment { Exp1, Exp2, Exp3, Exp4, Exp5, VarDecomp };

std::string_view to_string(Experiment e) noexcept;
std::optional<Experiment> parse_experiment(std::string_view name) noexcept;

enum class OutputFormat { Csv, Markdown };

/// Environment variable naming the default manifest directory.
inline constexpr const char* kManifestDirEnv = "SBOOT_MANIFEST_DIR";

inline constexpr std::string_view kCsvHeader = "dataset,type,metric,OOB,SB_OOB,diff";

struct RunConfig {
    std::vector<Experiment> experiments = {Experiment::Exp1, Experiment::Exp2, Experiment::Exp3,
                                           Experiment::Exp4, Experiment::Exp5};
    std::vector<std::uint64_t> seeds = {1, 25, 50};
    std::size_t replicates = kDefaultReplicates;
    double rho = kDefaultRho;
    std::vector<std::string> datasets;
    std::filesystem::path manifest_dir;
    std::size_t repetitions = 10;
    std::filesystem::path output = "results";
    OutputFormat format = OutputFormat::Csv;
    std::size_t workers = 1;
    std::uint64_t split_seed = 0;
    ReplicateStatistic statistic = ReplicateStatistic::OobError;
    TreeHyperparams hp;
    /// Synthetic sample-size overrides; generator defaults when unset.
    std::optional<std::size_t> n_train;
    std::optional<std::size_t> n_test;

    /// Throws InvalidArgument on an empty seed or dataset list, B < 1,
    /// rho outside (0, 1) or fewer than two EXP4 repetitions.
    void validate() const;
};

struct RunResult {
    /// Records per (experiment, seed), rows in dataset input order.
    std::map<std::pair<Experiment, std::uint64_t>, MetricRecords> tables;
    std::vector<std::string> errors;
    std::vector<std::filesystem::path> files;

    /// 0 when every cell succeeded, 2 when some failed.
    int exit_code() const noexcept { return errors.empty() ? 0 : 2; }
};

/// Runs every requested experiment for every (dataset, seed) cell and
/// writes expK_seedS.csv files (plus .md tables for the Markdown format).
/// Failed cells are listed in errors.txt; the others are still written.
/// Throws InvalidArgument for configuration errors (unknown dataset, bad
/// values) before any work starts.
RunResult run_suite(const RunConfig& config);

/// Same as run_suite but returns the tables without touching the disk.
RunResult compute_suite(const RunConfig& config);

/// 3 significant figures in fixed notation ("0.0252", "41.7", "27200").
std::string format_sig3(double value);
/// 3 significant figures in scientific notation ("-7.15e-04").
std::string format_diff(double value);

std::string records_to_csv(const MetricRecords& records);
std::string records_to_markdown(const MetricRecords& records);

/// Parses a results CSV; throws DataError on a header mismatch.
MetricRecords read_records_csv(const std::filesystem::path& path);

struct SignCounts {
    std::size_t negative = 0;
    std::size_t zero = 0;
    std::size_t positive = 0;

    std::size_t seeds() const noexcept { return negative + zero + positive; }
    std::size_t dominant() const noexcept;
};

/// Per-experiment tables plus a cross-seed sign-consistency table built from
/// the expK_seedS.csv files in `dir`. Throws DataError if none exist.
std::string build_report(const std::filesystem::path& dir);

/// Sign counts keyed by (experiment, dataset, metric).
std::map<std::tuple<std::string, std::string, std::string>, SignCounts>
sign_consistency(const std::filesystem::path& dir);

struct DatasetListing {
    std::string name;
    std::string kind; ///< "synthetic" or "manifest"
    std::string detail;
    bool ok = true;
};

/// The seven synthetic generators followed by every manifest in `manifest_dir`.
/// Unreadable manifests are listed with ok == false.
std::vector<DatasetListing> list_datasets(const std::filesystem::path& manifest_dir);

} // namespace sboot
