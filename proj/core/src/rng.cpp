#include "freegeom/rng.hpp"

namespace freegeom {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RngSeed RngSeed::derive(std::uint64_t k) const {
  return RngSeed{seed, splitmix64(stream ^ splitmix64(k + 0x632be59bd9b4e019ULL))};
}

Rng::Rng(RngSeed s) {
  std::seed_seq seq{static_cast<std::uint32_t>(s.seed), static_cast<std::uint32_t>(s.seed >> 32),
                    static_cast<std::uint32_t>(s.stream), static_cast<std::uint32_t>(s.stream >> 32)};
  engine_.seed(seq);
}

}  // namespace freegeom
