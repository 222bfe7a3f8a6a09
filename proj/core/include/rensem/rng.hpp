#pragma once

#include <cstdint>
#include <random>

namespace rensem {

// SplitMix64 finalizer. Used to derive independent, reproducible engine seeds
// from a (master seed, stream index) pair, e.g. one stream per Monte-Carlo
// replication. The mapping is fixed, so serial and parallel schedules see
// identical draws.
inline std::uint64_t split_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::mt19937_64 make_engine(std::uint64_t master, std::uint64_t stream) {
  return std::mt19937_64(split_seed(master, stream));
}

}  // namespace rensem
