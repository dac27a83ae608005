#include "sboot/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <regex>
#include <sstream>

#include "sboot/datagen.hpp"
#include "sboot/error.hpp"
#include "sboot/ingest.hpp"
#include "sboot/parallel.hpp"

namespace sboot {

std::string_view to_string(Experiment e) noexcept
{
    switch (e) {
    case Experiment::Exp1: return "exp1";
    case Experiment::Exp2: return "exp2";
    case Experiment::Exp3: return "exp3";
    case Experiment::Exp4: return "exp4";
    case Experiment::Exp5: return "exp5";
    case Experiment::VarDecomp: return "vardecomp";
    }
    return "unknown";
}

std::optional<Experiment> parse_experiment(std::string_view name) noexcept
{
    for (auto e : {Experiment::Exp1, Experiment::Exp2, Experiment::Exp3, Experiment::Exp4, Experiment::Exp5,
                   Experiment::VarDecomp}) {
        if (to_string(e) == name) {
            return e;
        }
    }
    return std::nullopt;
}

void RunConfig::validate() const
{
    if (seeds.empty()) {
        throw InvalidArgument("at least one seed is required");
    }
    if (datasets.empty()) {
        throw InvalidArgument("at least one dataset is required");
    }
    if (experiments.empty()) {
        throw InvalidArgument("at least one experiment is required");
    }
    SchemeConfig{Scheme::Sequential, rho, 0, replicates}.validate();
    hp.validate();
    if (std::find(experiments.begin(), experiments.end(), Experiment::Exp4) != experiments.end() &&
        repetitions < 2) {
        throw InvalidArgument("EXP4 needs at least two repetitions");
    }
    if ((n_train && *n_train < 1) || (n_test && *n_test < 1)) {
        throw InvalidArgument("synthetic sample sizes must be at least 1");
    }
}

// ---------------------------------------------------------------------------
// Formatting

std::string format_sig3(double value)
{
    if (!std::isfinite(value)) {
        return std::isnan(value) ? "nan" : (value > 0 ? "inf" : "-inf");
    }
    if (value == 0.0) {
        return "0";
    }
    char sci[32];
    std::snprintf(sci, sizeof(sci), "%.2e", value);
    const double rounded = std::strtod(sci, nullptr);
    const int exponent = std::atoi(std::strchr(sci, 'e') + 1);
    const int decimals = std::max(0, 2 - exponent);
    char out[64];
    std::snprintf(out, sizeof(out), "%.*f", decimals, rounded);
    return out;
}

std::string format_diff(double value)
{
    if (value == 0.0) {
        value = 0.0; // drop the sign of -0
    }
    char out[32];
    std::snprintf(out, sizeof(out), "%.2e", value);
    return out;
}

std::string records_to_csv(const MetricRecords& records)
{
    std::string out(kCsvHeader);
    out += '\n';
    for (const auto& r : records) {
        out += r.dataset + ',' + r.type + ',' + r.metric + ',' + format_sig3(r.oob_value) + ',' +
               format_sig3(r.sb_oob_value) + ',' + format_diff(r.diff) + '\n';
    }
    return out;
}

std::string records_to_markdown(const MetricRecords& records)
{
    std::string out = "| dataset | type | metric | OOB | SB_OOB | diff |\n"
                      "|---|---|---|---:|---:|---:|\n";
    for (const auto& r : records) {
        out += "| " + r.dataset + " | " + r.type + " | " + r.metric + " | " + format_sig3(r.oob_value) + " | " +
               format_sig3(r.sb_oob_value) + " | " + format_diff(r.diff) + " |\n";
    }
    return out;
}

namespace {

std::string slurp(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out << text;
}

double parse_cell(const std::string& text, const std::filesystem::path& path)
{
    char* end = nullptr;
    const double value = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size()) {
        throw DataError(path.string() + ": bad numeric cell '" + text + "'");
    }
    return value;
}

} // namespace

MetricRecords read_records_csv(const std::filesystem::path& path)
{
    std::istringstream in(slurp(path));
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) {
        throw DataError(path.string() + ": header must be '" + std::string(kCsvHeader) + "'");
    }
    MetricRecords records;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const auto cells = split_csv_line(line);
        if (cells.size() != 6) {
            throw DataError(path.string() + ": expected 6 cells in '" + line + "'");
        }
        records.push_back({cells[0], cells[1], cells[2], parse_cell(cells[3], path), parse_cell(cells[4], path),
                           parse_cell(cells[5], path)});
    }
    return records;
}

// ---------------------------------------------------------------------------
// Suite execution

namespace {

struct ResolvedDataset {
    std::string name;
    std::optional<Generator> generator;
    std::optional<DatasetManifest> manifest;

    bool synthetic() const noexcept { return generator.has_value(); }
};

std::vector<ResolvedDataset> resolve(const RunConfig& config)
{
    std::vector<std::pair<std::filesystem::path, std::optional<DatasetManifest>>> manifests;
    for (const auto& path : discover_manifests(config.manifest_dir)) {
        try {
            manifests.emplace_back(path, load_manifest(path));
        } catch (const DataError&) {
            manifests.emplace_back(path, std::nullopt);
        }
    }
    std::vector<ResolvedDataset> resolved;
    for (const auto& name : config.datasets) {
        if (const auto g = parse_generator(name)) {
            resolved.push_back({std::string(to_string(*g)), g, std::nullopt});
            continue;
        }
        const auto it = std::find_if(manifests.begin(), manifests.end(), [&](const auto& entry) {
            return entry.second ? entry.second->name == name : entry.first.stem() == name;
        });
        if (it == manifests.end()) {
            throw InvalidArgument("unknown dataset '" + name + "' (not a generator and no manifest in '" +
                                  config.manifest_dir.string() + "')");
        }
        if (!it->second) {
            load_manifest(it->first); // rethrows the parse error
        }
        resolved.push_back({name, std::nullopt, *it->second});
    }
    return resolved;
}

SyntheticSpec synthetic_spec(const RunConfig& config, Generator g, std::uint64_t data_seed)
{
    auto spec = SyntheticSpec::defaults(g, data_seed);
    spec.n_train = config.n_train.value_or(spec.n_train);
    spec.n_test = config.n_test.value_or(spec.n_test);
    return spec;
}

bool applicable(Experiment e, const Task& task)
{
    switch (e) {
    case Experiment::Exp1: return task.is_classification();
    case Experiment::Exp2:
    case Experiment::Exp5: return !task.is_classification();
    default: return true;
    }
}

std::string table_type(Experiment e, bool synthetic, const Task& task)
{
    if (e == Experiment::Exp4 || e == Experiment::Exp5) {
        return task.is_classification() ? "class" : "reg";
    }
    return synthetic ? "synthetic" : "real";
}

struct CellOutput {
    std::map<Experiment, MetricRecords> records;
    std::vector<std::string> errors;
};

CellOutput run_cell(const RunConfig& config, const ResolvedDataset& dataset, const DataPair& data,
                    std::uint64_t seed, std::size_t workers)
{
    CellOutput out;
    const auto& train = data.train;
    const auto& test = data.test;
    const Task task = train.task();
    EnsembleSettings settings{seed, config.replicates, config.rho, config.hp, workers};
    auto fail = [&](Experiment e, const std::exception& ex) {
        out.errors.push_back(dataset.name + " seed " + std::to_string(seed) + " " + std::string(to_string(e)) +
                             ": " + ex.what());
    };

    std::optional<EnsemblePair> ensembles;
    for (auto e : config.experiments) {
        if (!applicable(e, task)) {
            continue;
        }
        const auto type = table_type(e, dataset.synthetic(), task);
        try {
            if (e == Experiment::Exp4) {
                RepetitionData source;
                if (dataset.synthetic()) {
                    const auto g = *dataset.generator;
                    source = [&config, g](std::size_t r) {
                        return generate(synthetic_spec(config, g, repetition_seed(config.split_seed, r)));
                    };
                } else {
                    source = [&data](std::size_t) { return data; };
                }
                out.records[e] = run_exp4(dataset.name, type, source, {settings, config.repetitions});
                continue;
            }
            if (!ensembles) {
                ensembles = fit_pair(train, settings);
            }
            switch (e) {
            case Experiment::Exp1: out.records[e] = run_exp1(train, test, *ensembles, type); break;
            case Experiment::Exp2: out.records[e] = run_exp2(train, test, *ensembles, type); break;
            case Experiment::Exp3: out.records[e] = run_exp3(train, test, *ensembles, type); break;
            case Experiment::Exp5: out.records[e] = run_exp5(train, test, *ensembles, config.hp, type); break;
            case Experiment::VarDecomp:
                out.records[e] = run_vardecomp(train, test, *ensembles, config.statistic, type);
                break;
            case Experiment::Exp4: break;
            }
        } catch (const std::exception& ex) {
            fail(e, ex);
        }
    }
    return out;
}

std::string hex(std::uint64_t value)
{
    char out[24];
    std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(value));
    return out;
}

} // namespace

RunResult compute_suite(const RunConfig& config)
{
    config.validate();
    const auto datasets = resolve(config);

    RunResult result;
    std::vector<std::optional<DataPair>> data(datasets.size());
    for (std::size_t d = 0; d < datasets.size(); ++d) {
        try {
            data[d] = datasets[d].synthetic()
                          ? generate(synthetic_spec(config, *datasets[d].generator, config.split_seed))
                          : prepare(*datasets[d].manifest, config.split_seed);
        } catch (const std::exception& ex) {
            result.errors.push_back(datasets[d].name + ": " + ex.what());
        }
    }

    const std::size_t cells = datasets.size() * config.seeds.size();
    const std::size_t outer = std::min(std::max<std::size_t>(config.workers, 1), cells);
    const std::size_t inner = std::max<std::size_t>(1, config.workers / std::max<std::size_t>(outer, 1));
    std::vector<CellOutput> outputs(cells);
    parallel_for(cells, outer, [&](std::size_t cell) {
        const std::size_t d = cell / config.seeds.size();
        const std::size_t s = cell % config.seeds.size();
        if (data[d]) {
            outputs[cell] = run_cell(config, datasets[d], *data[d], config.seeds[s], inner);
        }
    });

    for (auto e : config.experiments) {
        for (auto seed : config.seeds) {
            result.tables[{e, seed}];
        }
    }
    // Deterministic reduce: seed-major, datasets in input order.
    for (std::size_t s = 0; s < config.seeds.size(); ++s) {
        for (std::size_t d = 0; d < datasets.size(); ++d) {
            auto& cell = outputs[d * config.seeds.size() + s];
            for (auto e : config.experiments) {
                auto it = cell.records.find(e);
                if (it != cell.records.end()) {
                    auto& table = result.tables[{e, config.seeds[s]}];
                    table.insert(table.end(), it->second.begin(), it->second.end());
                }
            }
            result.errors.insert(result.errors.end(), cell.errors.begin(), cell.errors.end());
        }
    }
    return result;
}

RunResult run_suite(const RunConfig& config)
{
    auto result = compute_suite(config);
    std::filesystem::create_directories(config.output);
    for (const auto& [key, records] : result.tables) {
        const auto stem = std::string(to_string(key.first)) + "_seed" + std::to_string(key.second);
        const auto csv = config.output / (stem + ".csv");
        write_file(csv, records_to_csv(records));
        result.files.push_back(csv);
        if (config.format == OutputFormat::Markdown) {
            const auto md = config.output / (stem + ".md");
            write_file(md, "## " + std::string(to_string(key.first)) + ", seed " + std::to_string(key.second) +
                               "\n\n" + records_to_markdown(records));
            result.files.push_back(md);
        }
    }

    std::string info = "B=" + std::to_string(config.replicates) + "\nrho=" + format_sig3(config.rho) +
                       "\nM=" + std::to_string(config.repetitions) +
                       "\nsplit_seed=" + std::to_string(config.split_seed) + "\nseeds=";
    for (std::size_t s = 0; s < config.seeds.size(); ++s) {
        info += (s ? "," : "") + std::to_string(config.seeds[s]);
    }
    info += "\nmin_samples_split=" + std::to_string(config.hp.min_samples_split) +
            "\nmin_samples_leaf=" + std::to_string(config.hp.min_samples_leaf) + "\n";
    for (const auto& d : resolve(config)) {
        if (d.manifest) {
            try {
                info += "dataset " + d.name + " file_hash=" + hex(file_hash(d.manifest->path)) + "\n";
            } catch (const std::exception&) {
                info += "dataset " + d.name + " file_hash=unavailable\n";
            }
        }
    }
    write_file(config.output / "run_info.txt", info);

    const auto errors_file = config.output / "errors.txt";
    if (result.errors.empty()) {
        std::filesystem::remove(errors_file);
    } else {
        std::string text;
        for (const auto& e : result.errors) {
            text += e + "\n";
        }
        write_file(errors_file, text);
    }
    return result;
}

// ---------------------------------------------------------------------------
// Reporting

std::size_t SignCounts::dominant() const noexcept { return std::max({negative, zero, positive}); }

namespace {

struct ResultFile {
    std::string experiment;
    std::uint64_t seed = 0;
    std::filesystem::path path;
};

std::vector<ResultFile> result_files(const std::filesystem::path& dir)
{
    static const std::regex pattern(R"(^(exp[1-5]|vardecomp)_seed([0-9]+)\.csv$)");
    std::vector<ResultFile> files;
    std::error_code ec;
    if (std::filesystem::is_directory(dir, ec)) {
        for (const auto& entry : std::filesystem::directory_iterator(dir)) {
            std::smatch match;
            const auto name = entry.path().filename().string();
            if (entry.is_regular_file() && std::regex_match(name, match, pattern)) {
                files.push_back({match[1].str(), std::stoull(match[2].str()), entry.path()});
            }
        }
    }
    if (files.empty()) {
        throw DataError("no result CSV files (expK_seedS.csv) in " + dir.string());
    }
    std::sort(files.begin(), files.end(), [](const ResultFile& a, const ResultFile& b) {
        return std::tie(a.experiment, a.seed) < std::tie(b.experiment, b.seed);
    });
    return files;
}

} // namespace

std::map<std::tuple<std::string, std::string, std::string>, SignCounts>
sign_consistency(const std::filesystem::path& dir)
{
    std::map<std::tuple<std::string, std::string, std::string>, SignCounts> counts;
    for (const auto& file : result_files(dir)) {
        for (const auto& r : read_records_csv(file.path)) {
            auto& c = counts[{file.experiment, r.dataset, r.metric}];
            if (r.diff < 0.0) {
                ++c.negative;
            } else if (r.diff > 0.0) {
                ++c.positive;
            } else {
                ++c.zero;
            }
        }
    }
    return counts;
}

std::string build_report(const std::filesystem::path& dir)
{
    const auto files = result_files(dir);
    std::string out = "# OOB vs SB-OOB results\n\nDifferences are SB-OOB minus classical OOB.\n";
    for (const auto& file : files) {
        out += "\n## " + file.experiment + ", seed " + std::to_string(file.seed) + "\n\n";
        out += records_to_markdown(read_records_csv(file.path));
    }
    out += "\n## Cross-seed sign consistency\n\n"
           "| experiment | dataset | metric | seeds | diff<0 | diff=0 | diff>0 | consistency |\n"
           "|---|---|---|---:|---:|---:|---:|---:|\n";
    // Keep dataset order as it appears in the files, not alphabetical.
    std::vector<std::tuple<std::string, std::string, std::string>> order;
    for (const auto& file : files) {
        for (const auto& r : read_records_csv(file.path)) {
            std::tuple key{file.experiment, r.dataset, r.metric};
            if (std::find(order.begin(), order.end(), key) == order.end()) {
                order.push_back(key);
            }
        }
    }
    const auto counts = sign_consistency(dir);
    for (const auto& key : order) {
        const auto& c = counts.at(key);
        out += "| " + std::get<0>(key) + " | " + std::get<1>(key) + " | " + std::get<2>(key) + " | " +
               std::to_string(c.seeds()) + " | " + std::to_string(c.negative) + " | " + std::to_string(c.zero) +
               " | " + std::to_string(c.positive) + " | " + std::to_string(c.dominant()) + "/" +
               std::to_string(c.seeds()) + " |\n";
    }
    return out;
}

std::vector<DatasetListing> list_datasets(const std::filesystem::path& manifest_dir)
{
    std::vector<DatasetListing> listing;
    for (auto g : kAllGenerators) {
        const auto task = task_of(g);
        const auto defaults = SyntheticSpec::defaults(g, 0);
        listing.push_back({std::string(to_string(g)), "synthetic",
                           (task.is_classification() ? "classification, " + std::to_string(task.num_classes) +
                                                           " classes"
                                                     : std::string("regression")) +
                               ", " + std::to_string(feature_count(g)) + " features, n_train=" +
                               std::to_string(defaults.n_train) + ", n_test=" + std::to_string(defaults.n_test),
                           true});
    }
    for (const auto& path : discover_manifests(manifest_dir)) {
        try {
            const auto m = load_manifest(path);
            listing.push_back({m.name, "manifest",
                               m.path.string() + " hash=" + hex(file_hash(m.path)) +
                                   (m.has_official_split() ? " (official split)" : ""),
                               true});
        } catch (const std::exception& ex) {
            listing.push_back({path.stem().string(), "manifest", std::string("ERROR: ") + ex.what(), false});
        }
    }
    return listing;
}

} // namespace sboot
