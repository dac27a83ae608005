#include "sboot/resampling.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sboot/error.hpp"

namespace sboot {

std::string_view to_string(Scheme scheme) noexcept
{
    return scheme == Scheme::Classical ? "classical" : "sequential";
}

void SchemeConfig::validate() const
{
    if (!(rho > 0.0 && rho < 1.0)) {
        throw InvalidArgument("rho must lie in (0, 1), got " + std::to_string(rho));
    }
    if (replicate_count < 1) {
        throw InvalidArgument("replicate count must be at least 1");
    }
}

IndexResample::IndexResample(Scheme scheme, std::vector<std::uint32_t> indices,
                             std::vector<std::uint32_t> distinct,
                             std::optional<std::size_t> target_k)
    : scheme_(scheme), indices_(std::move(indices)), distinct_(std::move(distinct)),
      target_k_(target_k)
{
}

bool IndexResample::contains(std::uint32_t index) const noexcept
{
    return std::binary_search(distinct_.begin(), distinct_.end(), index);
}

std::vector<std::uint32_t> IndexResample::multiplicities(std::size_t n) const
{
    std::vector<std::uint32_t> counts(n, 0);
    for (auto i : indices_) {
        if (i >= n) {
            throw InvalidArgument("resample index out of range for dataset of size " +
                                  std::to_string(n));
        }
        ++counts[i];
    }
    return counts;
}

namespace {

std::vector<std::uint32_t> collect_distinct(const std::vector<bool>& seen)
{
    std::vector<std::uint32_t> distinct;
    for (std::size_t i = 0; i < seen.size(); ++i) {
        if (seen[i]) {
            distinct.push_back(static_cast<std::uint32_t>(i));
        }
    }
    return distinct;
}

} // namespace

IndexResample multinomial_resample(std::size_t n, Stream& stream)
{
    if (n == 0) {
        throw InvalidArgument("multinomial_resample: n must be at least 1");
    }
    std::vector<std::uint32_t> indices(n);
    std::vector<bool> seen(n, false);
    for (auto& index : indices) {
        index = static_cast<std::uint32_t>(stream.below(n));
        seen[index] = true;
    }
    return IndexResample(Scheme::Classical, std::move(indices), collect_distinct(seen),
                         std::nullopt);
}

IndexResample sequential_resample(std::size_t n, std::size_t k, Stream& stream)
{
    if (k == 0 || k > n) {
        throw InvalidArgument("sequential_resample: need 1 <= k <= n, got k=" +
                              std::to_string(k) + ", n=" + std::to_string(n));
    }
    std::vector<std::uint32_t> indices;
    indices.reserve(k + k / 2);
    std::vector<bool> seen(n, false);
    std::size_t distinct = 0;
    while (distinct < k) {
        const auto index = static_cast<std::uint32_t>(stream.below(n));
        indices.push_back(index);
        if (!seen[index]) {
            seen[index] = true;
            ++distinct;
        }
    }
    return IndexResample(Scheme::Sequential, std::move(indices), collect_distinct(seen), k);
}

std::size_t target_distinct(std::size_t n, double rho)
{
    if (!(rho > 0.0 && rho < 1.0)) {
        throw InvalidArgument("target_distinct: rho must lie in (0, 1)");
    }
    if (n == 0) {
        throw InvalidArgument("target_distinct: n must be at least 1");
    }
    const auto k = static_cast<std::size_t>(std::floor(rho * static_cast<double>(n)));
    return std::max<std::size_t>(1, k);
}

std::size_t distinct_count(const IndexResample& r) noexcept { return r.distinct().size(); }

IndexResample draw_replicate(const SchemeConfig& config, std::size_t n, Stream& stream)
{
    switch (config.scheme) {
    case Scheme::Classical:
        return multinomial_resample(n, stream);
    case Scheme::Sequential:
        return sequential_resample(n, target_distinct(n, config.rho), stream);
    }
    throw InvalidArgument("unknown resampling scheme");
}

Stream replicate_stream(std::uint64_t seed, std::size_t replicate) noexcept
{
    return Stream::derive(seed, {stream_tag::kResample, replicate});
}

std::vector<double> inclusion_frequency(Scheme scheme, std::size_t n, std::size_t k,
                                        std::size_t trials, Stream& stream)
{
    if (trials == 0) {
        throw InvalidArgument("inclusion_frequency: trials must be at least 1");
    }
    std::vector<std::size_t> hits(n, 0);
    for (std::size_t t = 0; t < trials; ++t) {
        const auto r = scheme == Scheme::Classical ? multinomial_resample(n, stream)
                                                   : sequential_resample(n, k, stream);
        for (auto i : r.distinct()) {
            ++hits[i];
        }
    }
    std::vector<double> rates(n);
    for (std::size_t i = 0; i < n; ++i) {
        rates[i] = static_cast<double>(hits[i]) / static_cast<double>(trials);
    }
    return rates;
}

} // namespace sboot
