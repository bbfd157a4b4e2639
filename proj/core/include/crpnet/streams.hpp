#pragma once

#include <cstdint>
#include <vector>

#include "crpnet/network.hpp"

namespace crpnet {

// SplitMix64 finalizer (Steele / Vigna), used as a keyed mixing function.
inline std::uint64_t splitmix64(std::uint64_t x) {
  constexpr std::uint64_t kPhi = 0x9E3779B97F4A7C15ULL;
  x += kPhi;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Counter-based substreams for the stochastic increments of one replication:
// m interarrival streams, n service streams, n routing streams, all mutually
// independent. A draw is a pure function of (seed, replication, stream,
// counter), so any (stream, counter) cell can be regenerated without
// replaying the rest and concurrent replications never share state.
class PrimitiveStreams {
 public:
  PrimitiveStreams(const NetworkSpec& net, std::uint64_t seed,
                   std::uint64_t replication = 0);

  // Interarrival time for buffer k: unit-mean draw divided by lambda_k.
  // Throws ZeroRateError when lambda_k == 0.
  double draw_interarrival(int buffer);

  // Service time for activity j: mean_service_j times a unit-mean draw.
  double draw_service(int activity);

  // Routing outcome for activity j: 0 means exit, 1..m is the destination
  // buffer (1-based), drawn from routing row j with the leftover mass on 0.
  int draw_route(int activity);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t replication() const { return replication_; }

  // Draw counters, one per substream: interarrival k, then service j, then
  // routing j. Exposed for replay and bookkeeping tests.
  std::uint64_t interarrival_counter(int buffer) const;
  std::uint64_t service_counter(int activity) const;
  std::uint64_t route_counter(int activity) const;

 private:
  double u01(int stream);

  const NetworkSpec* net_;
  std::uint64_t seed_ = 0;
  std::uint64_t replication_ = 0;
  std::vector<std::uint64_t> stream_key_;  // per-stream mixed key
  std::vector<std::uint64_t> counter_;     // per-stream draw counter
};

}  // namespace crpnet
