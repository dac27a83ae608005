// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (0 when everything passes).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "sboot/datagen.hpp"
#include "sboot/ensemble.hpp"
#include "sboot/error.hpp"
#include "sboot/experiments.hpp"
#include "sboot/report.hpp"
#include "sboot/resampling.hpp"

using namespace sboot;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Check {
    bool ok = true;
    std::string detail;

    void require(bool condition, const std::string& what)
    {
        if (!condition) {
            ok = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
    void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(const char* format, double a)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), format, a);
    return buf;
}

std::size_t worker_count() { return std::max(1u, std::thread::hardware_concurrency()); }

// 1 ------------------------------------------------------------------------
Check exact_combinatorics()
{
    const auto start = Clock::now();
    Check c;
    const std::size_t n = 100;
    const auto k = target_distinct(n, 0.632);
    c.require(k == 63, "k_n != 63");
    double sum = 0.0;
    double sq = 0.0;
    std::size_t bad = 0;
    for (std::uint64_t b = 0; b < 10000; ++b) {
        auto s = replicate_stream(2024, b);
        const auto r = sequential_resample(n, k, s);
        const auto u = static_cast<double>(distinct_count(r));
        std::size_t oob = 0;
        for (std::uint32_t i = 0; i < n; ++i) {
            oob += r.contains(i) ? 0 : 1;
        }
        bad += (u != 63.0 || oob != 37) ? 1 : 0;
        sum += u;
        sq += u * u;
    }
    const double mean = sum / 10000.0;
    const double var = sq / 10000.0 - mean * mean;
    c.require(bad == 0, std::to_string(bad) + " replicates off target");
    c.require(var == 0.0, "Var(U) = " + fmt("%.3g", var));
    const double t = seconds_since(start);
    c.require(t < 5.0, "runtime " + fmt("%.2f", t) + " s >= 5 s");
    c.note("10^4 replicates, U=63, OOB=37, Var(U)=" + fmt("%g", var) + ", " + fmt("%.2f", t) + " s");
    return c;
}

// 2 ------------------------------------------------------------------------
Check closed_form_oracles()
{
    const auto start = Clock::now();
    Check c;

    Stream s1(11);
    double distinct = 0.0;
    for (int t = 0; t < 100000; ++t) {
        distinct += static_cast<double>(distinct_count(multinomial_resample(5, s1)));
    }
    distinct /= 100000.0;
    const double expect_u = 5.0 * (1.0 - std::pow(0.8, 5));
    c.require(std::abs(distinct - expect_u) <= 0.02, "E[U] n=5 " + fmt("%.4f", distinct));

    Stream s2(12);
    double stop = 0.0;
    for (int t = 0; t < 100000; ++t) {
        stop += static_cast<double>(sequential_resample(5, 3, s2).stopping_time());
    }
    stop /= 100000.0;
    const double expect_t = 1.0 + 5.0 / 4.0 + 5.0 / 3.0;
    c.require(std::abs(stop - expect_t) <= 0.03, "E[T] n=5,k=3 " + fmt("%.4f", stop));

    const std::size_t n = 100;
    const std::size_t trials = 20000;
    Stream s3(13);
    const auto classical = inclusion_frequency(Scheme::Classical, n, 0, trials, s3);
    const auto sequential = inclusion_frequency(Scheme::Sequential, n, 63, trials, s3);
    const double pc = 1.0 - std::pow(0.99, 100);
    const double ps = 0.63;
    const double se_c = std::sqrt(pc * (1.0 - pc) / trials);
    const double se_s = std::sqrt(ps * (1.0 - ps) / trials);
    double worst_c = 0.0;
    double worst_s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        worst_c = std::max(worst_c, std::abs(classical[i] - pc) / se_c);
        worst_s = std::max(worst_s, std::abs(sequential[i] - ps) / se_s);
    }
    c.require(worst_c < 5.0, "classical inclusion off by " + fmt("%.2f", worst_c) + " SE");
    c.require(worst_s < 5.0, "sequential inclusion off by " + fmt("%.2f", worst_s) + " SE");

    const double t = seconds_since(start);
    c.require(t < 10.0, "runtime " + fmt("%.2f", t) + " s >= 10 s");
    c.note("E[U]=" + fmt("%.4f", distinct) + " E[T]=" + fmt("%.4f", stop) + " max dev " + fmt("%.2f", worst_c) +
           "/" + fmt("%.2f", worst_s) + " SE, " + fmt("%.2f", t) + " s");
    return c;
}

// 3 ------------------------------------------------------------------------
Check total_variance_identity()
{
    Check c;
    Stream s(31);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<ThetaSample> samples(2 + s.below(200));
        const auto groups = 1 + s.below(8);
        const double scale = std::pow(10.0, static_cast<double>(s.below(7)) - 3.0);
        for (auto& t : samples) {
            t.theta = scale * (s.normal() + static_cast<double>(s.below(3)));
            t.distinct = 100 + s.below(groups);
        }
        const auto v = variance_decomposition(samples);
        worst = std::max(worst, std::abs(v.total - (v.within + v.between)) / std::max(1.0, v.total));
    }
    c.require(worst <= 1e-10, "identity residual " + fmt("%.3g", worst));

    const auto data = generate(SyntheticSpec::defaults(Generator::Twonorm, 0));
    EnsembleSettings settings;
    settings.seed = 1;
    settings.workers = worker_count();
    const auto pair = fit_pair(data.train, settings);
    for (auto stat : {ReplicateStatistic::OobError, ReplicateStatistic::LeafCount,
                      ReplicateStatistic::ProbePrediction}) {
        const auto seq = variance_decomposition(replicate_statistics(pair.sequential, data.train, data.test, stat));
        c.require(seq.between == 0.0, "Sequential between != 0 for " + std::string(to_string(stat)));
        c.require(seq.group_sizes.size() == 1, "Sequential U_b not constant");
    }
    c.note("1000 random inputs, max residual " + fmt("%.2g", worst) + "; Sequential between == 0");
    return c;
}

// Full synthetic suite, shared by criteria 4-6.
struct Suite {
    RunResult result;
    double seconds = 0.0;
    fs::path dir;
    std::string report_error;
    std::string report;
};

Suite run_synthetic_suite()
{
    Suite suite;
    RunConfig config;
    config.experiments = {Experiment::Exp1, Experiment::Exp2, Experiment::Exp3, Experiment::Exp4, Experiment::Exp5};
    config.datasets.clear();
    for (auto g : kAllGenerators) {
        config.datasets.emplace_back(to_string(g));
    }
    config.seeds = {1, 25, 50};
    config.workers = worker_count();
    suite.dir = fs::temp_directory_path() / "sboot_acceptance_suite";
    fs::remove_all(suite.dir);
    config.output = suite.dir;
    const auto start = Clock::now();
    suite.result = run_suite(config);
    suite.seconds = seconds_since(start);
    try {
        suite.report = build_report(suite.dir);
    } catch (const std::exception& ex) {
        suite.report_error = ex.what();
    }
    return suite;
}

const MetricRecord* find(const Suite& s, Experiment e, std::uint64_t seed, const std::string& dataset,
                         const std::string& metric)
{
    const auto it = s.result.tables.find({e, seed});
    if (it == s.result.tables.end()) {
        return nullptr;
    }
    for (const auto& r : it->second) {
        if (r.dataset == dataset && r.metric == metric) {
            return &r;
        }
    }
    return nullptr;
}

// 4 ------------------------------------------------------------------------
Check structural_identities(const Suite& s)
{
    Check c;
    c.require(s.result.errors.empty(), std::to_string(s.result.errors.size()) + " failed cells");
    std::size_t binary = 0, exp3 = 0, exp5 = 0;
    double worst_r = 0.0;
    for (auto seed : {1, 25, 50}) {
        for (auto g : kAllGenerators) {
            const std::string name(to_string(g));
            const Task task = task_of(g);
            if (task.is_classification() && task.num_classes == 2) {
                const auto* e1 = find(s, Experiment::Exp1, seed, name, "E1_B");
                const auto* e2 = find(s, Experiment::Exp1, seed, name, "E2_B");
                c.require(e1 && e2, name + " EXP1 missing");
                if (e1 && e2) {
                    ++binary;
                    c.require(e1->oob_value == e2->oob_value && e1->sb_oob_value == e2->sb_oob_value,
                              name + " E1_B != E2_B");
                }
            }
            const auto* r1 = find(s, Experiment::Exp3, seed, name, "R1");
            const auto* r2 = find(s, Experiment::Exp3, seed, name, "R2");
            const auto* r3 = find(s, Experiment::Exp3, seed, name, "R3");
            c.require(r1 && r2 && r3, name + " EXP3 missing");
            if (r1 && r2 && r3) {
                ++exp3;
                for (auto pick : {&MetricRecord::oob_value, &MetricRecord::sb_oob_value}) {
                    const double gap = std::abs(r3->*pick - (r1->*pick + r2->*pick)) / std::max(1.0, r3->*pick);
                    worst_r = std::max(worst_r, gap);
                }
            }
            if (!task.is_classification()) {
                const auto* m = find(s, Experiment::Exp5, seed, name, "mse_original");
                c.require(m != nullptr, name + " EXP5 missing");
                if (m) {
                    ++exp5;
                    c.require(m->diff == 0.0, name + " mse_original diff != 0");
                }
            }
        }
    }
    c.require(worst_r <= 1e-10, "R3 - (R1+R2) residual " + fmt("%.3g", worst_r));
    c.note(std::to_string(binary) + " binary EXP1 runs, " + std::to_string(exp3) + " EXP3 runs (max residual " +
           fmt("%.2g", worst_r) + "), " + std::to_string(exp5) + " EXP5 runs");
    return c;
}

// 5 ------------------------------------------------------------------------
Check quantitative_bands(const Suite& s)
{
    Check c;
    struct Band {
        Experiment exp;
        const char* dataset;
        const char* metric;
        double lo;
        double hi;
    };
    const Band bands[] = {
        {Experiment::Exp4, "twonorm", "eTS", 0.05, 0.13},
        {Experiment::Exp4, "twonorm", "eOB", 0.06, 0.14},
        {Experiment::Exp4, "friedman1", "eOB", 6.0, 12.0},
        {Experiment::Exp1, "waveform", "E1_B", 0.005, 0.08},
    };
    for (const auto& b : bands) {
        const auto* r = find(s, b.exp, 1, b.dataset, b.metric);
        const std::string label = std::string(b.dataset) + " " + b.metric;
        if (!r) {
            c.require(false, label + " missing");
            continue;
        }
        for (double v : {r->oob_value, r->sb_oob_value}) {
            c.require(v >= b.lo && v <= b.hi,
                      label + " " + fmt("%.4g", v) + " outside [" + fmt("%g", b.lo) + ", " + fmt("%g", b.hi) + "]");
        }
        c.note(label + " " + fmt("%.4g", r->oob_value) + "/" + fmt("%.4g", r->sb_oob_value));
    }
    c.require(s.seconds < 600.0, "suite runtime " + fmt("%.0f", s.seconds) + " s >= 600 s");
    c.note("suite " + fmt("%.0f", s.seconds) + " s on " + std::to_string(worker_count()) + " worker(s)");
    return c;
}

// 6 ------------------------------------------------------------------------
Check headline_invariance(const Suite& s)
{
    Check c;
    double total = 0.0;
    std::size_t count = 0;
    for (auto seed : {1, 25, 50}) {
        for (auto g : kAllGenerators) {
            const auto* r = find(s, Experiment::Exp4, seed, std::string(to_string(g)), "eOB");
            c.require(r != nullptr, std::string(to_string(g)) + " eOB missing");
            if (r && r->oob_value > 0.0) {
                total += std::abs(r->diff) / r->oob_value;
                ++count;
            }
        }
    }
    const double mean = count ? total / static_cast<double>(count) : INFINITY;
    c.require(mean < 0.15, "mean |diff eOB|/eOB " + fmt("%.4f", mean));
    c.require(s.report_error.empty(), "report failed: " + s.report_error);
    c.require(s.report.find("/3") != std::string::npos, "sign-consistency table missing");
    c.note("mean |diff eOB|/eOB = " + fmt("%.4f", mean) + " over " + std::to_string(count) + " cells; report ok");
    return c;
}

// 7 ------------------------------------------------------------------------
std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

Check determinism_and_isolation()
{
    Check c;
    RunConfig config;
    config.experiments = {Experiment::Exp1, Experiment::Exp2, Experiment::Exp3, Experiment::Exp4,
                          Experiment::Exp5, Experiment::VarDecomp};
    config.datasets = {"waveform", "twonorm", "friedman1"};
    config.seeds = {1, 25};
    config.replicates = 20;
    config.repetitions = 3;
    const auto base = fs::temp_directory_path() / "sboot_acceptance_determinism";
    fs::remove_all(base);
    config.output = base / "a";
    config.workers = 1;
    run_suite(config);
    config.output = base / "b";
    config.workers = worker_count() + 2;
    run_suite(config);
    std::size_t files = 0;
    for (const auto& entry : fs::directory_iterator(base / "a")) {
        ++files;
        const auto other = base / "b" / entry.path().filename();
        c.require(fs::exists(other) && slurp(entry.path()) == slurp(other),
                  entry.path().filename().string() + " differs");
    }
    fs::remove_all(base);

    // Replay each scheme's replicates through the other scheme's configuration.
    const auto data = generate(SyntheticSpec::defaults(Generator::Waveform, 0));
    const SchemeConfig classical{Scheme::Classical, kDefaultRho, 1, 30};
    const SchemeConfig sequential{Scheme::Sequential, kDefaultRho, 1, 30};
    const auto seq = fit_bagged(data.train, sequential, TreeHyperparams{});
    const auto cls = fit_bagged(data.train, classical, TreeHyperparams{});
    const auto seq_as_cls = fit_bagged_on(data.train, seq.resamples, classical, TreeHyperparams{});
    const auto cls_as_seq = fit_bagged_on(data.train, cls.resamples, sequential, TreeHyperparams{});
    c.require(seq_as_cls.trees == seq.trees && cls_as_seq.trees == cls.trees, "replayed trees differ");
    auto same_oob = [&](const BaggedEnsemble& a, const BaggedEnsemble& b) {
        const auto ra = oob_error(a, oob_sets(a), data.train);
        const auto rb = oob_error(b, oob_sets(b), data.train);
        return ra.error == rb.error && ra.predictions == rb.predictions &&
               node_class_error(a, data.test).e1 == node_class_error(b, data.test).e1 &&
               node_variability(a, data.test).r3 == node_variability(b, data.test).r3 &&
               test_error(a, data.test) == test_error(b, data.test);
    };
    c.require(same_oob(seq, seq_as_cls) && same_oob(cls, cls_as_seq), "replayed metrics differ");
    c.note(std::to_string(files) + " output files byte-identical across reruns and worker counts; "
                                   "replayed replicates reproduce trees and metrics");
    return c;
}

// 8 ------------------------------------------------------------------------
Check brute_force_oob()
{
    Check c;
    Stream s(88);
    std::size_t mismatches = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + s.below(20);
        const std::size_t b_count = 1 + s.below(10);
        std::vector<double> x(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = s.uniform();
            y[i] = s.normal();
        }
        const Dataset data("toy", Task::regression(), 1, x, y);
        const Scheme scheme = trial % 2 ? Scheme::Sequential : Scheme::Classical;
        const auto e = fit_bagged(data, {scheme, s.uniform(0.1, 0.9), s.next(), b_count}, TreeHyperparams{});
        const auto sets = oob_sets(e);
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<std::uint32_t> scan;
            for (std::uint32_t b = 0; b < b_count; ++b) {
                bool seen = false;
                for (auto idx : e.resamples[b].indices()) {
                    seen = seen || idx == i;
                }
                if (!seen) {
                    scan.push_back(b);
                }
            }
            mismatches += scan == sets.replicates[i] ? 0 : 1;
        }
    }
    c.require(mismatches == 0, std::to_string(mismatches) + " observations disagree");
    c.note("100 random ensembles (n <= 20, B <= 10) match the raw-index scan");
    return c;
}

} // namespace

int main()
{
    int failed = 0;
    auto report = [&](int id, const char* title, const std::function<Check()>& fn) {
        Check c;
        try {
            c = fn();
        } catch (const std::exception& ex) {
            c.ok = false;
            c.detail = std::string("exception: ") + ex.what();
        }
        failed += c.ok ? 0 : 1;
        std::printf("%s criterion %d (%s): %s\n", c.ok ? "PASS" : "FAIL", id, title, c.detail.c_str());
        std::fflush(stdout);
    };

    report(1, "exact combinatorics", exact_combinatorics);
    report(2, "closed-form oracles", closed_form_oracles);
    report(3, "total-variance identity", total_variance_identity);
    Suite suite;
    std::string suite_error;
    try {
        suite = run_synthetic_suite();
    } catch (const std::exception& ex) {
        suite_error = ex.what();
    }
    auto with_suite = [&](Check (*fn)(const Suite&)) {
        return [&, fn] {
            if (!suite_error.empty()) {
                throw std::runtime_error("synthetic suite failed: " + suite_error);
            }
            return fn(suite);
        };
    };
    report(4, "structural metric identities", with_suite(structural_identities));
    report(5, "quantitative bands", with_suite(quantitative_bands));
    report(6, "scheme invariance of eOB", with_suite(headline_invariance));
    report(7, "determinism and scheme isolation", determinism_and_isolation);
    report(8, "brute-force OOB membership", brute_force_oob);
    fs::remove_all(suite.dir);
    return failed;
}
