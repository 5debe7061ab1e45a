#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace qdiff {

// Name recorded in metadata so runs can be reproduced.
inline constexpr std::string_view kRngName = "mt19937_64";

// Work is split into fixed-size batches; each batch owns an independent
// engine derived from (seed, stream, batch). Results therefore do not depend
// on how batches are scheduled.
std::mt19937_64 batch_engine(std::uint64_t seed, std::uint64_t stream, std::uint64_t batch);

// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(std::mt19937_64& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

// Standard normal pair via Box-Muller; portable across standard libraries.
struct NormalPair {
  double first;
  double second;
};
NormalPair normal_pair(std::mt19937_64& eng);

}  // namespace qdiff
