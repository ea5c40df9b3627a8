#pragma once

#include <cmath>
#include <cstdint>

namespace levelsense {

// SplitMix64. Chosen over std:: engines because its output sequence is fully
// specified here, so seeded runs reproduce bit-for-bit on any platform.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 significant bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in (0, 1], safe as a log() argument.
  double next_double_open() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; one value per call, pairs drawn eagerly.
  double next_gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = next_double_open();
    double u2 = next_double();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Derives an independent stream for (seed, tag, index) triples. Used to keep
// unrelated draw families (noise, clock walk, antenna offsets) decoupled, so
// toggling one leaves the others' sequences intact.
inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t tag,
                                   std::uint64_t index) {
  SplitMix64 mix(seed ^ (tag * 0x9e3779b97f4a7c15ULL));
  std::uint64_t a = mix.next_u64();
  SplitMix64 mix2(a ^ index);
  return mix2.next_u64();
}

}  // namespace levelsense
