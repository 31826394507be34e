#pragma once

#include <cstdint>
#include <random>

namespace freegeom {

struct RngSeed {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  /// Child seed for sub-task k; distinct k give statistically independent streams.
  RngSeed derive(std::uint64_t k) const;

  bool operator==(const RngSeed&) const = default;
};

std::uint64_t splitmix64(std::uint64_t x);

class Rng {
 public:
  explicit Rng(RngSeed s);

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  std::uint64_t next() { return engine_(); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace freegeom
