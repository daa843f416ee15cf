#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace texmvs {

// SplitMix64 generator. Small state so one can be built per pixel: results
// depend only on the stream key, not on thread scheduling.
class StreamRng {
 public:
  using result_type = std::uint64_t;

  explicit StreamRng(std::uint64_t seed) : state_(seed) {}

  // Stream keyed by an ordered tuple of integers (seed, view, pixel, ...).
  StreamRng(std::initializer_list<std::uint64_t> key) {
    std::uint64_t h = 0x6a09e667f3bcc909ULL;
    for (std::uint64_t k : key) h = Mix(h ^ Mix(k + 0x9e3779b97f4a7c15ULL));
    state_ = h;
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return Mix(state_);
  }

  // Uniform in [0, 1).
  double Uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

 private:
  static std::uint64_t Mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_ = 0;
};

}  // namespace texmvs
