#pragma once

#include <cstdint>
#include <random>

namespace robpen {

using Engine = std::mt19937_64;

// Substream namespaces. Every random quantity in the library is drawn from an
// engine keyed by (seed, stream, index), so results never depend on how work
// is scheduled across threads.
enum class Stream : std::uint64_t {
    population = 1,
    sample = 2,
    replicate = 3,
    elemental = 4,
    contamination = 5,
    sensitivity_base = 6,
};

constexpr std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t substream_seed(std::uint64_t seed, Stream stream, std::uint64_t index)
{
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ static_cast<std::uint64_t>(stream));
    return splitmix64(h ^ splitmix64(index));
}

inline Engine make_engine(std::uint64_t seed, Stream stream, std::uint64_t index)
{
    return Engine(substream_seed(seed, stream, index));
}

} // namespace robpen
