#pragma once

#include <cstdint>
#include <random>

#include <boost/random/normal_distribution.hpp>

namespace hetbelief {

/// SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x);

/// Per-path random stream. The engine is std::mt19937_64 seeded with
/// splitmix64(seed ^ splitmix64(path + 1)); normals come from Boost's
/// ziggurat sampler. A (seed, path) pair gives the same draws regardless of
/// scheduling order.
class PathRng {
 public:
  PathRng(std::uint64_t seed, std::uint64_t path);

  double normal() { return normal_(engine_); }
  double uniform() { return std::generate_canonical<double, 53>(engine_); }

 private:
  std::mt19937_64 engine_;
  boost::random::normal_distribution<double> normal_;
};

}  // namespace hetbelief
