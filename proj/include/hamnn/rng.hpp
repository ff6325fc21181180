#pragma once

#include <cstdint>
#include <vector>

namespace hamnn {

// Counter-based pseudo-random stream. Draw i is mix64(seed + (i+1) * 0x9E3779B97F4A7C15),
// where mix64 is the 64-bit finalizer
//   z ^= z >> 30; z *= 0xBF58476D1CE4E5B9;
//   z ^= z >> 27; z *= 0x94D049BB133111EB;
//   z ^= z >> 31;
// Pure integer arithmetic, so identical seeds give identical sequences on any
// platform. Streams are cheap values; derive independent child streams with
// fork() rather than sharing one stream across tasks.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t next_u64();
  // Uniform in [0, 1) with 53-bit resolution.
  double next_double();
  // Uniform in [lo, hi); lo == hi returns lo. Throws std::invalid_argument if lo > hi.
  double uniform(double lo, double hi);
  // Box-Muller transform; consumes exactly two draws per call. stddev == 0 returns mean.
  // Throws std::invalid_argument if stddev < 0.
  double normal(double mean, double stddev);
  // Uniform integer in [0, n); n must be positive.
  std::uint64_t next_below(std::uint64_t n);

  // Independent stream keyed by (seed, index); does not consume draws and does
  // not depend on how many draws this stream has produced.
  RngStream fork(std::uint64_t index) const;

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace hamnn
