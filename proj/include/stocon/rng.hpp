#pragma once

#include <cstdint>

// Counter-based random streams (Philox4x32-10). A stream is addressed by
// (seed, stream id); child streams are derived by hashing tags into the id.
// Draw order within a stream is sequential, but any two streams may be
// consumed concurrently with no shared state, so parallel batch sampling
// partitioned by sample index reproduces the serial draws bit for bit.

namespace stocon {

namespace rng_tag {
// Purpose tags for top-level stream derivation. Values are arbitrary but
// fixed: changing them changes every result downstream of a seed.
inline constexpr std::uint64_t kTrainStates = 1;
inline constexpr std::uint64_t kTrainNoise = 2;
inline constexpr std::uint64_t kValidStates = 3;
inline constexpr std::uint64_t kValidNoise = 4;
inline constexpr std::uint64_t kInit = 5;
inline constexpr std::uint64_t kShuffle = 6;
inline constexpr std::uint64_t kEval = 7;
inline constexpr std::uint64_t kQuantizer = 8;
inline constexpr std::uint64_t kOracle = 9;
inline constexpr std::uint64_t kRollout = 10;
}  // namespace rng_tag

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(seed), sid_(0) {}

  // Child stream; the counter of the child starts at zero.
  [[nodiscard]] Rng stream(std::uint64_t tag) const;
  [[nodiscard]] Rng stream(std::uint64_t t1, std::uint64_t t2) const;
  [[nodiscard]] Rng stream(std::uint64_t t1, std::uint64_t t2, std::uint64_t t3) const;

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  double uniform();                   // [0, 1)
  double normal();                    // N(0,1), Box-Muller
  std::uint64_t below(std::uint64_t bound);  // uniform in [0, bound)

  std::uint64_t seed() const { return key_; }

 private:
  Rng(std::uint64_t key, std::uint64_t sid) : key_(key), sid_(sid) {}
  void refill();

  std::uint64_t key_;
  std::uint64_t sid_;
  std::uint64_t block_ = 0;
  std::uint32_t out_[4] = {};
  int avail_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace stocon
