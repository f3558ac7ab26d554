#pragma once

#include <cstdint>
#include <string_view>

namespace fedsim {

// Deterministic substream of pseudo-random draws. The state is derived by
// hashing a (root seed, purpose, client, round) tuple, so a stream's output
// never depends on how many draws other streams have consumed. Replaying an
// experiment with the same seed therefore reproduces every draw bit-exactly,
// regardless of execution order.
class RngStream {
 public:
  explicit RngStream(std::uint64_t state) : state_(state) {}

  std::uint64_t next_u64();

  /// Uniform double in [0, 1).
  double uniform();

  /// Uniform double in (0, 1); safe as a log/division argument.
  double uniform_pos();

  /// Uniform integer in {0, ..., n-1}; n must be > 0.
  std::uint64_t uniform_below(std::uint64_t n);

  /// Standard normal via Box-Muller.
  double normal();

  /// Gamma(shape, 1) via Marsaglia-Tsang; shape > 0.
  double gamma(double shape);

 private:
  std::uint64_t state_;
};

/// Derives an independent substream for the given tuple. Streams for
/// distinct tuples are statistically independent; identical tuples always
/// yield identical streams.
RngStream derive_stream(std::uint64_t root_seed, std::string_view purpose,
                        std::uint64_t client, std::uint64_t round);

}  // namespace fedsim
