#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

namespace prism {

/// Counter-based random stream: Philox4x32-10 keyed by a 64-bit seed.
///
/// Block i of stream s is philox(counter = {i_lo, i_hi, s_lo, s_hi}, key = {seed_lo, seed_hi}).
/// Uniforms take the top 53 bits of each 64-bit half of a block; normals are Box-Muller
/// pairs (cos branch first). Any change to this mapping must bump kVersion, since every
/// generated matrix and sketch is reproduced from (seed, stream) alone.
class CounterRng {
 public:
  static constexpr std::string_view kName = "philox4x32-10/box-muller";
  static constexpr int kVersion = 1;

  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
      : seed_(seed), stream_(stream) {}

  static std::array<std::uint32_t, 4> philox(std::array<std::uint32_t, 4> counter,
                                             std::array<std::uint32_t, 2> key) noexcept;

  std::uint64_t next_u64() noexcept;
  // Uniform on the open interval (0, 1).
  double uniform() noexcept;
  double normal() noexcept;
  void fill_normal(std::span<double> out, double stddev = 1.0) noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_index_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int words_left_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

// Stream identifiers so independent consumers never share draws for one seed.
namespace streams {
inline constexpr std::uint64_t kGaussianMatrix = 0x6761757373ULL;  // "gauss"
inline constexpr std::uint64_t kSketch = 0x736b65746368ULL;         // "sketch"
inline constexpr std::uint64_t kPowerIteration = 0x706f776572ULL;   // "power"
inline constexpr std::uint64_t kSpectrum = 0x737065637472ULL;       // "spectr"
}  // namespace streams

// Mixes (seed, index) into a fresh 64-bit seed (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept;

}  // namespace prism
