#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace hawkes_evolve {

namespace detail {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// SplitMix64 finalizer; a bijective avalanche mix of one 64-bit word.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

// Counter-based generator: the n-th output of a stream is a pure function of
// (key, n). Streams are derived from (seed, stream id) so replication r of an
// experiment draws the same numbers under any thread schedule.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  constexpr CounterRng() noexcept : CounterRng(0, 0) {}
  constexpr CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
      : key_(detail::mix64(detail::mix64(seed ^ 0x5851f42d4c957f2dULL) +
                           detail::kGolden * (stream + 1))) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() noexcept {
    return detail::mix64(key_ + detail::kGolden * (++counter_));
  }

  // Child stream, independent of this one and of its siblings.
  constexpr CounterRng split(std::uint64_t child) const noexcept {
    CounterRng r;
    r.key_ = detail::mix64(key_ ^ detail::mix64(child + 0x632be59bd9b4e019ULL));
    return r;
  }

  // Uniform on [0, 1) with 53 bits.
  constexpr double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1]; safe argument for log().
  constexpr double uniform_open_left() noexcept {
    return (static_cast<double>((*this)() >> 11) + 1.0) * 0x1.0p-53;
  }

  double exponential(double rate) noexcept {
    return -std::log(uniform_open_left()) / rate;
  }

  constexpr std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace hawkes_evolve
