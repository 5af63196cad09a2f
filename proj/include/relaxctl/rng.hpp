#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace relaxctl {

/// Counter-based Gaussian source. Every draw is addressed by
/// (particle, step, slot, coordinate), so the value at a given address does
/// not depend on how many other draws were made before it or by which thread.
///
/// Uniforms come from Philox4x32-10 keyed by the 64-bit seed; the normal
/// variate is the cosine branch of Box-Muller on two 53-bit uniforms.
class GaussianStream {
 public:
  static constexpr std::string_view kScheme = "philox4x32-10/box-muller-cos/v1";

  explicit GaussianStream(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  /// Standard normal at the given address.
  double normal(std::uint32_t particle, std::uint32_t step, std::uint32_t slot,
                std::uint32_t coord) const;

  /// Raw Philox block for the given counter; exposed for tests.
  std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> counter) const;

 private:
  std::uint64_t seed_;
};

/// splitmix64 finalizer, used to derive independent seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

}  // namespace relaxctl
