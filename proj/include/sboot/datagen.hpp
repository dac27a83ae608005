#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include "sboot/dataset.hpp"
#include "sboot/random.hpp"

namespace sboot {

enum class Generator { Waveform, Twonorm, Threenorm, Ringnorm, Friedman1, Friedman2, Friedman3 };

inline constexpr std::array<Generator, 7> kAllGenerators = {
    Generator::Waveform,  Generator::Twonorm,   Generator::Threenorm, Generator::Ringnorm,
    Generator::Friedman1, Generator::Friedman2, Generator::Friedman3,
};

std::string_view to_string(Generator g) noexcept;

/// Accepts the canonical lower-case names; "threennorm" is an alias of threenorm.
std::optional<Generator> parse_generator(std::string_view name) noexcept;

Task task_of(Generator g) noexcept;
std::size_t feature_count(Generator g) noexcept;

/// Generator constants, in one place.
namespace gen_constants {
/// Class mean offset per coordinate for twonorm and threenorm.
inline const double kNormShift = 2.0 / std::sqrt(20.0);
/// Class-2 mean offset per coordinate for ringnorm.
inline const double kRingShift = 1.0 / std::sqrt(20.0);
/// Ringnorm class-1 standard deviation (covariance 4I).
inline constexpr double kRingScale = 2.0;
/// Noise standard deviations giving a 3:1 signal-to-noise standard-deviation
/// ratio; from a 10^6-draw pilot of the noise-free responses.
inline constexpr double kFriedman1Noise = 1.0;
inline constexpr double kFriedman2Noise = 126.40;
inline constexpr double kFriedman3Noise = 0.10539;
} // namespace gen_constants

struct SyntheticSpec {
    Generator name = Generator::Twonorm;
    std::size_t n_train = 300;
    std::size_t n_test = 3000;
    std::uint64_t seed = 0;
    bool noise_on = true;

    /// 300/3000 rows for classification generators, 200/2000 for regression.
    static SyntheticSpec defaults(Generator g, std::uint64_t seed);
};

/// Train and test sets drawn i.i.d. from independent streams of spec.seed.
DataPair generate(const SyntheticSpec& spec);

/// n i.i.d. rows from the generator using `stream`.
Dataset generate_sample(Generator g, std::size_t n, bool noise_on, Stream& stream);

/// Noise-free responses. Friedman 1 reads x[0..4]; Friedman 2/3 read x[0..3].
double friedman1(std::span<const double> x) noexcept;
double friedman2(std::span<const double> x) noexcept;
double friedman3(std::span<const double> x) noexcept;

/// The three triangular base waveforms, evaluated at 1-based position i in [1, 21].
double waveform_base(int which, int i) noexcept;

} // namespace sboot
