#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace bayescomp {

/// Counter-based random stream (Philox4x32-10).
///
/// The 64-bit seed is the Philox key; the 128-bit counter is split into the
/// draw position (low half) and the stream id (high half). Two streams with
/// the same seed and different ids therefore walk disjoint counter ranges,
/// and a given (seed, stream_id) produces the same sequence on every
/// platform. A stream is owned by one worker at a time.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0) noexcept
      : seed_(seed), stream_id_(stream_id) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept;
  /// Standard normal by inversion.
  double normal() noexcept;
  /// Standard exponential.
  double exponential() noexcept;

  /// Child stream for sub-task `index` (particle, block, ...). The child id
  /// is a bijective mix of (stream_id, index) so children of different
  /// parents do not share counters in practice.
  RngStream split(std::uint64_t index) const noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  void refill() noexcept;

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t counter_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
};

/// The raw Philox4x32-10 block function; exposed for the known-answer test.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) noexcept;

}  // namespace bayescomp
