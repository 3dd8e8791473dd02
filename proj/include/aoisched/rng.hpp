#pragma once

// Reproducible random streams.
//
// Every stochastic component draws from its own RandomStream. Stream seeds are
// derived from a single master seed with the splitting rule
//
//   seed(master, replication, stream) =
//       splitmix64(splitmix64(splitmix64(master) ^ replication) ^ stream)
//
// so that replications and streams never share state and a run is fully
// determined by the master seed. Variates are produced by inversion from the
// top 53 bits of a 64-bit Mersenne Twister, which keeps sequences identical
// across standard library implementations.

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

namespace aoisched {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t replication,
                                    std::uint64_t stream) noexcept {
  return splitmix64(splitmix64(splitmix64(master) ^ replication) ^ stream);
}

// Stream identifiers used by the simulator and the size sampler.
enum class StreamId : std::uint64_t {
  Arrivals = 1,
  Routing = 2,
  ComputeService = 3,
  NetworkService = 4,
  Updates = 5,
  ComputeSizes = 6,
  OutputSizes = 7,
  Trace = 8,
};

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}
  RandomStream(std::uint64_t master, std::uint64_t replication, StreamId stream)
      : engine_(derive_seed(master, replication, static_cast<std::uint64_t>(stream))) {}

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1]; safe to take the logarithm of.
  double uniform_open_zero() { return 1.0 - uniform(); }

  double exponential(double rate) { return -std::log(uniform_open_zero()) / rate; }

  // Index drawn with the given probabilities (need not be normalised).
  std::size_t discrete(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double target = uniform() * total;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] <= 0.0) continue;
      last_positive = i;
      if (target < weights[i]) return i;
      target -= weights[i];
    }
    return last_positive;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace aoisched
