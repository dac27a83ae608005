#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace sboot {

/// SplitMix64 finalizer; used both for seeding and for deriving stream keys.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic random stream (xoshiro256**).
///
/// Streams are plain values. A stream for a given purpose is derived from a
/// root seed and a path of integer tags, so replicate b of an experiment
/// always sees the same numbers regardless of execution order or threading.
/// All distributions are implemented here rather than via <random> so that
/// output is identical across standard library implementations.
class Stream {
public:
    explicit Stream(std::uint64_t seed) noexcept
    {
        std::uint64_t s = seed;
        for (auto& word : state_) {
            s += 0x9e3779b97f4a7c15ULL;
            word = mix64(s);
        }
    }

    /// Stream keyed by (seed, tags...). Distinct tag paths give independent streams.
    static Stream derive(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) noexcept
    {
        std::uint64_t key = mix64(seed ^ 0x5b0f5eedULL);
        for (auto tag : tags) {
            key = mix64(key + 0x9e3779b97f4a7c15ULL + mix64(tag));
        }
        return Stream(key);
    }

    std::uint64_t next() noexcept
    {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform integer on [0, bound); unbiased (Lemire's multiply-and-reject).
    std::uint64_t below(std::uint64_t bound) noexcept
    {
        unsigned __int128 m = static_cast<unsigned __int128>(next()) * bound;
        auto low = static_cast<std::uint64_t>(m);
        if (low < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                m = static_cast<unsigned __int128>(next()) * bound;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Uniform double on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; the second variate is cached.
    double normal() noexcept
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) {
            u1 = uniform();
        }
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    friend bool operator==(const Stream&, const Stream&) = default;

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept
    {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4]{};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Tags naming the purpose of a derived stream.
namespace stream_tag {
inline constexpr std::uint64_t kResample = 1;
inline constexpr std::uint64_t kTrainData = 2;
inline constexpr std::uint64_t kTestData = 3;
inline constexpr std::uint64_t kSplit = 4;
inline constexpr std::uint64_t kRepetition = 5;
} // namespace stream_tag

} // namespace sboot
