#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "sboot/random.hpp"

namespace sboot {

enum class Scheme { Classical, Sequential };

std::string_view to_string(Scheme scheme) noexcept;

/// Default target distinct proportion, matching the classical bootstrap's
/// expected fraction of distinct observations.
inline constexpr double kDefaultRho = 0.632;
inline constexpr std::size_t kDefaultReplicates = 100;

struct SchemeConfig {
    Scheme scheme = Scheme::Classical;
    double rho = kDefaultRho; ///< only read by the Sequential scheme
    std::uint64_t seed = 1;
    std::size_t replicate_count = kDefaultReplicates;

    /// Throws InvalidArgument unless 0 < rho < 1 and replicate_count >= 1.
    void validate() const;
};

/// One bootstrap replicate.
///
/// `indices` is the ordered draw sequence; `distinct` holds the distinct
/// indices in ascending order. For the Sequential scheme the last draw is the
/// first occurrence of its index and |distinct| == target_k.
class IndexResample {
public:
    IndexResample(Scheme scheme, std::vector<std::uint32_t> indices,
                  std::vector<std::uint32_t> distinct, std::optional<std::size_t> target_k);

    Scheme scheme() const noexcept { return scheme_; }
    const std::vector<std::uint32_t>& indices() const noexcept { return indices_; }
    const std::vector<std::uint32_t>& distinct() const noexcept { return distinct_; }
    std::optional<std::size_t> target_k() const noexcept { return target_k_; }

    /// N_b; equal to the stopping time for the Sequential scheme.
    std::size_t draw_count() const noexcept { return indices_.size(); }
    std::size_t stopping_time() const noexcept { return indices_.size(); }

    bool contains(std::uint32_t index) const noexcept;

    /// Multiplicity of every observation in [0, n).
    std::vector<std::uint32_t> multiplicities(std::size_t n) const;

    friend bool operator==(const IndexResample&, const IndexResample&) = default;

private:
    Scheme scheme_;
    std::vector<std::uint32_t> indices_;
    std::vector<std::uint32_t> distinct_;
    std::optional<std::size_t> target_k_;
};

/// n i.i.d. uniform draws from [0, n).
IndexResample multinomial_resample(std::size_t n, Stream& stream);

/// Uniform draws from [0, n) until exactly k distinct indices have been seen.
IndexResample sequential_resample(std::size_t n, std::size_t k, Stream& stream);

/// max(1, floor(rho * n)).
std::size_t target_distinct(std::size_t n, double rho);

/// U_b, the number of distinct indices in the replicate.
std::size_t distinct_count(const IndexResample& r) noexcept;

/// One replicate under `config.scheme`; the only scheme-dependent step of bagging.
IndexResample draw_replicate(const SchemeConfig& config, std::size_t n, Stream& stream);

/// Stream used for replicate b of an experiment seeded with `seed`.
Stream replicate_stream(std::uint64_t seed, std::size_t replicate) noexcept;

/// Fraction of `trials` replicates that contain each index. For the
/// Sequential scheme `k` is the target distinct count; it is ignored for
/// the Classical scheme.
std::vector<double> inclusion_frequency(Scheme scheme, std::size_t n, std::size_t k,
                                        std::size_t trials, Stream& stream);

} // namespace sboot
