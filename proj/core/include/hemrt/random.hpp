#pragma once

#include <cstdint>
#include <random>

namespace hemrt {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive independent, order-free seeds for
// sub-streams (per task, per conf, per epoch) from one run seed.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                                    std::uint64_t b = 0,
                                    std::uint64_t c = 0) noexcept {
  return mix_seed(mix_seed(mix_seed(mix_seed(base) ^ a) ^ b) ^ c);
}

// Stream tags for derive_seed, kept distinct so sub-streams never alias.
namespace seed_tag {
inline constexpr std::uint64_t kBatches = 0x42415443;
inline constexpr std::uint64_t kFlush = 0x464c5553;
inline constexpr std::uint64_t kSwapIssue = 0x53574150;
inline constexpr std::uint64_t kSwapApply = 0x41505059;
inline constexpr std::uint64_t kProfile = 0x50524f46;
inline constexpr std::uint64_t kResize = 0x5253495a;
inline constexpr std::uint64_t kLearner = 0x4c45524e;
inline constexpr std::uint64_t kSplit = 0x53504c54;
}  // namespace seed_tag

}  // namespace hemrt
