#include "rangewalk/random.hpp"

namespace rangewalk {

namespace {
std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace

std::uint64_t derive_seed(std::uint64_t global_seed, std::uint64_t stream) {
  return splitmix64(splitmix64(global_seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

Rng make_rng(std::uint64_t global_seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(derive_seed(global_seed, stream)),
                    static_cast<std::uint32_t>(derive_seed(global_seed, stream) >> 32),
                    static_cast<std::uint32_t>(stream)};
  return Rng(seq);
}

void run_serial(std::size_t shards, const std::function<void(std::size_t)>& body) {
  for (std::size_t i = 0; i < shards; ++i) body(i);
}

}  // namespace rangewalk
