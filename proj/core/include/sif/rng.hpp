#pragma once

#include <array>
#include <cstdint>

namespace sif {

/// Deterministic, splittable random stream built on xoshiro256++.
///
/// A stream is identified by a (seed, stream_id) pair. Equal pairs produce
/// bit-identical sample sequences; distinct stream_ids give statistically
/// independent streams, which is how Monte-Carlo runs and filters get
/// per-run randomness that does not depend on thread scheduling.
///
/// Streams have value semantics: copying one snapshots its state, so a copy
/// replays exactly the draws the original would have produced.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  /// Next raw 64-bit word.
  std::uint64_t next_u64();

  /// Uniform draw on the open interval (0, 1).
  double uniform();

  /// Standard normal draw (Box-Muller, stateless across calls).
  double normal();

  /// Gamma draw with the given shape and scale (Marsaglia-Tsang).
  double gamma(double shape, double scale);

 private:
  std::array<std::uint64_t, 4> state_;
  std::uint64_t seed_ = 0;
  std::uint64_t stream_id_ = 0;
};

}  // namespace sif
