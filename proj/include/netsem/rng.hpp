#pragma once

#include <cstdint>
#include <string_view>

namespace netsem {

// Counter-based random numbers.
//
// Every draw is a pure function of a 64-bit key and a counter: the key is
// derived from the root seed by hashing a path of labels and indices
// ("replicate"/3/"node"/"Y"), and the i-th draw of a stream is the SplitMix64
// finalizer applied to key + (i + 1) * golden_gamma. Nothing depends on
// platform-specific library distributions, so results are identical across
// compilers and thread schedules.

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t Mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class RngKey {
 public:
  explicit RngKey(std::uint64_t seed) : key_(Mix64(seed + kGoldenGamma)) {}

  RngKey Child(std::string_view label) const;
  RngKey Child(std::uint64_t index) const;

  std::uint64_t value() const { return key_; }

  friend bool operator==(const RngKey&, const RngKey&) = default;

 private:
  struct Raw {};
  RngKey(Raw, std::uint64_t key) : key_(key) {}

  std::uint64_t key_;
};

class Stream {
 public:
  explicit Stream(RngKey key) : key_(key.value()) {}

  std::uint64_t BitsAt(std::uint64_t counter) const {
    return Mix64(key_ + (counter + 1) * kGoldenGamma);
  }
  std::uint64_t NextBits() { return BitsAt(counter_++); }

  // Uniform on [0, 1) with 53 random bits.
  double Uniform();
  // Uniform on (0, 1); safe for inverse-CDF sampling.
  double UniformOpen();
  // Uniform integer in [0, bound), unbiased.
  std::uint64_t Below(std::uint64_t bound);
  // Standard normal via the inverse CDF of one UniformOpen draw.
  double Normal();

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Standard normal quantile (Wichura's AS 241, ~1e-16 relative accuracy).
double NormalQuantile(double p);

// Standard normal density.
double NormalDensity(double x);

}  // namespace netsem
