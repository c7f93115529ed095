#pragma once

#include <cstdint>

namespace qcsa {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Child seed for stream `stream` under `parent`. Every random consumer derives
/// its seed this way from the master seed, so results never depend on the
/// order in which work items run.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream) {
  return mix64(mix64(parent) ^ (stream * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL));
}

// Stream tags for the named consumers of a seed.
namespace stream {
inline constexpr std::uint64_t kSubsets = 0x5355425345540000ULL;  // + k
inline constexpr std::uint64_t kFolds = 0x464f4c4453000000ULL;
inline constexpr std::uint64_t kBootstrap = 0x424f4f5400000000ULL;
inline constexpr std::uint64_t kLambda = 0x4c414d4244410000ULL;
inline constexpr std::uint64_t kReplication = 0x5245504c00000000ULL;  // + r
inline constexpr std::uint64_t kSplit = 0x53504c4954000000ULL;        // + split index
}  // namespace stream

}  // namespace qcsa
