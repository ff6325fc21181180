#include "hamnn/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace hamnn {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kForkSalt = 0xD1B54A32D192ED03ULL;

std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

}  // namespace

std::uint64_t RngStream::next_u64() {
  ++counter_;
  return mix64(seed_ + counter_ * kGolden);
}

double RngStream::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
  if (!(lo <= hi)) throw std::invalid_argument("uniform: lo > hi");
  if (lo == hi) {
    next_u64();  // keep the draw count independent of the interval
    return lo;
  }
  double r = lo + (hi - lo) * next_double();
  if (r >= hi) r = std::nextafter(hi, lo);
  return r;
}

double RngStream::normal(double mean, double stddev) {
  if (stddev < 0.0) throw std::invalid_argument("normal: stddev < 0");
  const double u1 = next_double();
  const double u2 = next_double();
  // 1 - u1 lies in (0, 1], so the log is finite.
  const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
  const double z = r * std::cos(2.0 * M_PI * u2);
  return mean + stddev * z;
}

std::uint64_t RngStream::next_below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("next_below: n == 0");
  return static_cast<std::uint64_t>(
      (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
}

RngStream RngStream::fork(std::uint64_t index) const {
  return RngStream(mix64(seed_ + (index + 1) * kForkSalt));
}

}  // namespace hamnn
