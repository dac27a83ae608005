#include "sboot/datagen.hpp"

#include <algorithm>
#include <numbers>
#include <string>
#include <vector>

#include "sboot/error.hpp"

namespace sboot {

std::string_view to_string(Generator g) noexcept
{
    switch (g) {
    case Generator::Waveform: return "waveform";
    case Generator::Twonorm: return "twonorm";
    case Generator::Threenorm: return "threenorm";
    case Generator::Ringnorm: return "ringnorm";
    case Generator::Friedman1: return "friedman1";
    case Generator::Friedman2: return "friedman2";
    case Generator::Friedman3: return "friedman3";
    }
    return "unknown";
}

std::optional<Generator> parse_generator(std::string_view name) noexcept
{
    if (name == "threennorm") {
        return Generator::Threenorm;
    }
    for (auto g : kAllGenerators) {
        if (to_string(g) == name) {
            return g;
        }
    }
    return std::nullopt;
}

Task task_of(Generator g) noexcept
{
    switch (g) {
    case Generator::Waveform: return Task::classification(3);
    case Generator::Twonorm:
    case Generator::Threenorm:
    case Generator::Ringnorm: return Task::classification(2);
    default: return Task::regression();
    }
}

std::size_t feature_count(Generator g) noexcept
{
    switch (g) {
    case Generator::Waveform: return 21;
    case Generator::Twonorm:
    case Generator::Threenorm:
    case Generator::Ringnorm: return 20;
    case Generator::Friedman1: return 10;
    default: return 4;
    }
}

SyntheticSpec SyntheticSpec::defaults(Generator g, std::uint64_t seed)
{
    SyntheticSpec spec;
    spec.name = g;
    spec.seed = seed;
    if (task_of(g).is_classification()) {
        spec.n_train = 300;
        spec.n_test = 3000;
    } else {
        spec.n_train = 200;
        spec.n_test = 2000;
    }
    return spec;
}

double friedman1(std::span<const double> x) noexcept
{
    const double a = x[2] - 0.5;
    return 10.0 * std::sin(std::numbers::pi * x[0] * x[1]) + 20.0 * a * a + 10.0 * x[3] + 5.0 * x[4];
}

namespace {

double friedman_term(std::span<const double> x) noexcept { return x[1] * x[2] - 1.0 / (x[1] * x[3]); }

} // namespace

double friedman2(std::span<const double> x) noexcept
{
    const double t = friedman_term(x);
    return std::sqrt(x[0] * x[0] + t * t);
}

double friedman3(std::span<const double> x) noexcept { return std::atan(friedman_term(x) / x[0]); }

double waveform_base(int which, int i) noexcept
{
    // h1 peaks at 11; h2 is h1 shifted right by 4, h3 shifted left by 4.
    const int centre = which == 0 ? 11 : (which == 1 ? 15 : 7);
    return std::max(6 - std::abs(i - centre), 0);
}

Dataset generate_sample(Generator g, std::size_t n, bool noise_on, Stream& stream)
{
    using namespace gen_constants;
    const std::size_t p = feature_count(g);
    std::vector<double> features(n * p);
    std::vector<double> targets(n);
    for (std::size_t r = 0; r < n; ++r) {
        double* x = features.data() + r * p;
        double& y = targets[r];
        switch (g) {
        case Generator::Waveform: {
            // class 0: (h1, h2), class 1: (h1, h3), class 2: (h2, h3)
            static constexpr int kPairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
            const auto label = stream.below(3);
            const double u = stream.uniform();
            for (std::size_t j = 0; j < p; ++j) {
                const int pos = static_cast<int>(j) + 1;
                x[j] = u * waveform_base(kPairs[label][0], pos) +
                       (1.0 - u) * waveform_base(kPairs[label][1], pos) + stream.normal();
            }
            y = static_cast<double>(label);
            break;
        }
        case Generator::Twonorm: {
            const auto label = stream.below(2);
            const double shift = label == 0 ? kNormShift : -kNormShift;
            for (std::size_t j = 0; j < p; ++j) {
                x[j] = stream.normal() + shift;
            }
            y = static_cast<double>(label);
            break;
        }
        case Generator::Threenorm: {
            const auto label = stream.below(2);
            if (label == 0) {
                const double shift = stream.below(2) == 0 ? kNormShift : -kNormShift;
                for (std::size_t j = 0; j < p; ++j) {
                    x[j] = stream.normal() + shift;
                }
            } else {
                for (std::size_t j = 0; j < p; ++j) {
                    x[j] = stream.normal() + (j % 2 == 0 ? kNormShift : -kNormShift);
                }
            }
            y = static_cast<double>(label);
            break;
        }
        case Generator::Ringnorm: {
            const auto label = stream.below(2);
            for (std::size_t j = 0; j < p; ++j) {
                x[j] = label == 0 ? kRingScale * stream.normal() : stream.normal() + kRingShift;
            }
            y = static_cast<double>(label);
            break;
        }
        case Generator::Friedman1: {
            for (std::size_t j = 0; j < p; ++j) {
                x[j] = stream.uniform();
            }
            y = friedman1({x, p}) + (noise_on ? kFriedman1Noise * stream.normal() : 0.0);
            break;
        }
        case Generator::Friedman2:
        case Generator::Friedman3: {
            x[0] = stream.uniform(0.0, 100.0);
            x[1] = stream.uniform(40.0 * std::numbers::pi, 560.0 * std::numbers::pi);
            x[2] = stream.uniform(0.0, 1.0);
            x[3] = stream.uniform(1.0, 11.0);
            if (g == Generator::Friedman2) {
                y = friedman2({x, p}) + (noise_on ? kFriedman2Noise * stream.normal() : 0.0);
            } else {
                y = friedman3({x, p}) + (noise_on ? kFriedman3Noise * stream.normal() : 0.0);
            }
            break;
        }
        }
    }
    std::vector<std::string> names(p);
    for (std::size_t j = 0; j < p; ++j) {
        names[j] = "x" + std::to_string(j + 1);
    }
    std::vector<std::string> classes;
    const Task task = task_of(g);
    for (std::size_t c = 0; c < task.num_classes; ++c) {
        classes.push_back(std::to_string(c));
    }
    return Dataset(std::string(to_string(g)), task, p, std::move(features), std::move(targets),
                   std::move(names), std::move(classes));
}

DataPair generate(const SyntheticSpec& spec)
{
    if (spec.n_train < 1 || spec.n_test < 1) {
        throw InvalidArgument("synthetic train and test sizes must be at least 1");
    }
    auto train_stream = Stream::derive(spec.seed, {stream_tag::kTrainData});
    auto test_stream = Stream::derive(spec.seed, {stream_tag::kTestData});
    return {generate_sample(spec.name, spec.n_train, spec.noise_on, train_stream),
            generate_sample(spec.name, spec.n_test, spec.noise_on, test_stream)};
}

} // namespace sboot
