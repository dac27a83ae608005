// Command-line entry point: run experiment suites, dump synthetic data,
// list datasets and summarize result directories.

#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "sboot/datagen.hpp"
#include "sboot/error.hpp"
#include "sboot/ingest.hpp"
#include "sboot/report.hpp"

namespace {

constexpr int kConfigError = 1;

int cmd_run(sboot::RunConfig config, const std::vector<std::string>& experiments, const std::string& format,
            const std::string& statistic)
{
    config.experiments.clear();
    for (const auto& name : experiments) {
        const auto e = sboot::parse_experiment(name);
        if (!e) {
            std::cerr << "error: unknown experiment '" << name << "'\n";
            return kConfigError;
        }
        config.experiments.push_back(*e);
    }
    if (format == "markdown") {
        config.format = sboot::OutputFormat::Markdown;
    } else if (format != "csv") {
        std::cerr << "error: --format must be csv or markdown\n";
        return kConfigError;
    }
    const auto stat = sboot::parse_statistic(statistic);
    if (!stat) {
        std::cerr << "error: unknown statistic '" << statistic << "'\n";
        return kConfigError;
    }
    config.statistic = *stat;
    if (config.manifest_dir.empty()) {
        if (const char* env = std::getenv(sboot::kManifestDirEnv)) {
            config.manifest_dir = env;
        }
    }

    sboot::RunResult result;
    try {
        result = sboot::run_suite(config);
    } catch (const sboot::InvalidArgument& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return kConfigError;
    } catch (const sboot::DataError& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return kConfigError;
    }
    for (const auto& file : result.files) {
        std::cout << "wrote " << file.string() << '\n';
    }
    for (const auto& error : result.errors) {
        std::cerr << "failed: " << error << '\n';
    }
    return result.exit_code();
}

int cmd_gen(const std::string& name, std::size_t n, std::uint64_t seed, bool no_noise, const std::string& out)
{
    const auto g = sboot::parse_generator(name);
    if (!g) {
        std::cerr << "error: unknown generator '" << name << "'\n";
        return kConfigError;
    }
    if (n < 1) {
        std::cerr << "error: --n must be at least 1\n";
        return kConfigError;
    }
    auto stream = sboot::Stream::derive(seed, {sboot::stream_tag::kTrainData});
    const auto data = sboot::generate_sample(*g, n, !no_noise, stream);
    if (out.empty() || out == "-") {
        std::cout << sboot::to_csv(data);
    } else {
        sboot::dump_csv(data, out);
    }
    return 0;
}

int cmd_datasets_list(std::string manifest_dir)
{
    if (manifest_dir.empty()) {
        if (const char* env = std::getenv(sboot::kManifestDirEnv)) {
            manifest_dir = env;
        }
    }
    for (const auto& entry : sboot::list_datasets(manifest_dir)) {
        std::cout << entry.name << '\t' << entry.kind << '\t' << entry.detail << '\n';
    }
    return 0;
}

int cmd_report(const std::string& dir)
{
    try {
        const auto text = sboot::build_report(dir);
        std::cout << text;
        std::ofstream(std::filesystem::path(dir) / "report.md", std::ios::binary) << text;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return kConfigError;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Classical vs Sequential Bootstrap out-of-bag experiments"};
    app.require_subcommand(1);

    sboot::RunConfig config;
    config.datasets = {"waveform", "twonorm", "threenorm", "ringnorm", "friedman1", "friedman2", "friedman3"};
    std::vector<std::string> experiments = {"exp1", "exp2", "exp3", "exp4", "exp5"};
    std::string format = "csv";
    std::string statistic = "oob_error";
    std::string manifest_dir;
    std::string output = "results";
    std::size_t n_train = 0;
    std::size_t n_test = 0;

    auto* run = app.add_subcommand("run", "Run experiments for every (dataset, seed) and write CSV tables");
    run->add_option("--exp", experiments, "Experiments: exp1..exp5, vardecomp")->delimiter(',');
    run->add_option("--seeds", config.seeds, "Experiment seeds")->delimiter(',');
    run->add_option("--B", config.replicates, "Bootstrap replicates per ensemble");
    run->add_option("--rho", config.rho, "Sequential target distinct proportion");
    run->add_option("--datasets", config.datasets, "Generator or manifest names")->delimiter(',');
    run->add_option("--manifest-dir", manifest_dir, "Directory of *.manifest files");
    run->add_option("--M", config.repetitions, "EXP4 repetitions");
    run->add_option("--out", output, "Output directory");
    run->add_option("--format", format, "csv or markdown");
    run->add_option("--workers", config.workers, "Worker threads");
    run->add_option("--split-seed", config.split_seed, "Seed of the fixed train/test split and synthetic data");
    run->add_option("--statistic", statistic, "vardecomp statistic: oob_error, leaf_count, probe_prediction");
    run->add_option("--n-train", n_train, "Synthetic training size override");
    run->add_option("--n-test", n_test, "Synthetic test size override");

    std::string gen_name;
    std::size_t gen_n = 0;
    std::uint64_t gen_seed = 0;
    bool no_noise = false;
    std::string gen_out;
    auto* gen = app.add_subcommand("gen", "Write a synthetic dataset as CSV");
    gen->add_option("generator", gen_name, "waveform, twonorm, threenorm, ringnorm, friedman1..3")->required();
    gen->add_option("--n", gen_n, "Rows")->required();
    gen->add_option("--seed", gen_seed, "Seed");
    gen->add_flag("--no-noise", no_noise, "Omit the regression noise term");
    gen->add_option("--out", gen_out, "Output file (default stdout)");

    auto* datasets = app.add_subcommand("datasets", "Dataset registry");
    datasets->require_subcommand(1);
    auto* list = datasets->add_subcommand("list", "List generators and manifests");
    list->add_option("--manifest-dir", manifest_dir, "Directory of *.manifest files");

    std::string report_dir;
    auto* report = app.add_subcommand("report", "Summarize a result directory as Markdown");
    report->add_option("dir", report_dir, "Result directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigError;
    }

    if (run->parsed()) {
        config.manifest_dir = manifest_dir;
        config.output = output;
        if (n_train > 0) {
            config.n_train = n_train;
        }
        if (n_test > 0) {
            config.n_test = n_test;
        }
        return cmd_run(config, experiments, format, statistic);
    }
    if (gen->parsed()) {
        return cmd_gen(gen_name, gen_n, gen_seed, no_noise, gen_out);
    }
    if (list->parsed()) {
        return cmd_datasets_list(manifest_dir);
    }
    if (report->parsed()) {
        return cmd_report(report_dir);
    }
    return kConfigError;
}
