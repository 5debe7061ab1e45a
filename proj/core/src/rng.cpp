#include "qdiff/rng.hpp"

#include <cmath>

#include "qdiff/numeric.hpp"

namespace qdiff {

std::mt19937_64 batch_engine(std::uint64_t seed, std::uint64_t stream, std::uint64_t batch) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(batch),
                    static_cast<std::uint32_t>(batch >> 32)};
  return std::mt19937_64(seq);
}

NormalPair normal_pair(std::mt19937_64& eng) {
  double u1 = uniform01(eng);
  while (u1 <= 0.0) u1 = uniform01(eng);
  const double u2 = uniform01(eng);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 2.0 * kPi * u2;
  return {r * std::cos(t), r * std::sin(t)};
}

}  // namespace qdiff
