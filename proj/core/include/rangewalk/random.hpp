#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>

namespace rangewalk {

using Rng = std::mt19937_64;

// Counter-based stream derivation: the stream seed depends only on
// (global seed, stream id), never on how work is scheduled.
std::uint64_t derive_seed(std::uint64_t global_seed, std::uint64_t stream);
Rng make_rng(std::uint64_t global_seed, std::uint64_t stream);

// uniform on {0, ..., n-1}; multiply-shift, bias below 2^-40 for the sizes used here
__extension__ typedef unsigned __int128 Wide;
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  return static_cast<std::uint64_t>((static_cast<Wide>(rng()) * n) >> 64);
}

// uniform on [0, 1)
inline double uniform01(Rng& rng) { return double(rng() >> 11) * 0x1.0p-53; }

// Work splitting hook. The library never creates threads itself; callers may
// pass an executor that runs the shard bodies concurrently.
using ShardExecutor = std::function<void(std::size_t shards, const std::function<void(std::size_t)>& body)>;
void run_serial(std::size_t shards, const std::function<void(std::size_t)>& body);

}  // namespace rangewalk
