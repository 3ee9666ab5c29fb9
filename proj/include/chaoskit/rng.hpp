#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace chaoskit {

/// Stateless 64-bit finalizer (splitmix64).  Used to derive independent
/// streams from (seed, stream, counter) triples so that every drawn number is
/// a pure function of its coordinates, independent of evaluation order.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t stream_key(std::uint64_t seed, std::uint64_t stream) {
  return mix64(mix64(seed) ^ mix64(stream * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL));
}

/// Uniform in the open interval (0,1); never returns 0 or 1.
inline double uniform01(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// Counter-based standard normal stream: draw i is a function of (key, i)
/// only.  Box-Muller on two counter values per pair.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t key) : key_(key) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01(mix64(key_ ^ mix64(counter_)));
    const double u2 = uniform01(mix64(key_ ^ mix64(counter_ + 1)));
    counter_ += 2;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Uniform in [0,1) derived from (key, counter).
inline double uniform_at(std::uint64_t key, std::uint64_t counter) {
  return uniform01(mix64(key ^ mix64(counter)));
}

}  // namespace chaoskit
