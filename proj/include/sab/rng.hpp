#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace sab {

/// Philox4x32-10 counter-based block function (Salmon et al., SC'11).
/// Maps a 128-bit counter and 64-bit key to 128 pseudo-random bits.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter counter, Key key) noexcept;
};

enum class StreamPurpose : std::uint32_t {
  Gradient = 0,
  Hessian = 1,
  Truth = 2,
  Graph = 3,
};

/// Packs (replication, algorithm slot, purpose, agent) into a stream id.
/// Distinct tuples give distinct ids, so their counter ranges never overlap.
std::uint64_t stream_id(std::uint32_t replication, std::uint32_t algorithm,
                        StreamPurpose purpose, std::uint32_t agent);

/// A sequential view over one Philox stream. The 128-bit counter is
/// (draw index, stream id) and the key is the base seed; two streams with
/// the same seed and different ids consume disjoint counter ranges.
///
/// Satisfies UniformRandomBitGenerator.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  RandomStream(std::uint64_t seed, std::uint64_t stream);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()() { return next_u64(); }

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1].
  double uniform_positive();
  /// Standard normal via Box-Muller; the second variate is cached.
  double normal();

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_index_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace sab
