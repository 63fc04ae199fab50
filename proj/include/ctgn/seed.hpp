#pragma once

#include <cstdint>

namespace ctgn {

// splitmix64 finalizer; used to derive independent subsystem seeds from a
// single root seed.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

enum class SeedStream : std::uint64_t {
  kInit = 1,
  kNegatives = 2,
  kMasking = 3,
  kSynthetic = 4,
  kDropout = 5,
};

constexpr std::uint64_t derive_seed(std::uint64_t root, SeedStream stream,
                                    std::uint64_t salt = 0) {
  return mix_seed(mix_seed(root ^ (static_cast<std::uint64_t>(stream) << 56)) + salt);
}

}  // namespace ctgn
