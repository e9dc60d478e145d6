#ifndef PNO_RNG_HPP
#define PNO_RNG_HPP

#include <cstdint>

namespace pno {

// SplitMix64 generator (Steele, Lea, Flood 2014). Chosen over std::mt19937
// because the full algorithm fits in a dozen lines and can be re-implemented
// bit-exactly in any language:
//
//   state <- state + 0x9E3779B97F4A7C15
//   z <- state
//   z <- (z xor (z >> 30)) * 0xBF58476D1CE4E5B9
//   z <- (z xor (z >> 27)) * 0x94D049BB133111EB
//   output: z xor (z >> 31)
//
// Derived quantities, all documented so other implementations can match:
//   uniform_double: top 53 bits of next_u64, scaled by 2^-53 -> [0, 1)
//   uniform_int(lo, hi): lo + next_u64() % (hi - lo + 1)   (modulo; the bias
//     is < 2^-53 for the range sizes used here)
//   stream(seed, i): the i-th output of SplitMix64 seeded with `seed`,
//     computed in O(1) as mix(seed + (i+1) * 0x9E3779B97F4A7C15)
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += UINT64_C(0x9E3779B97F4A7C15);
    return mix(state_);
  }

  // Uniform in [0, 1) with 53 random mantissa bits.
  double uniform_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [lo, hi], inclusive. Requires lo <= hi.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(next_u64() % span);
  }

  // Uniform in [lo, hi).
  double uniform_range(double lo, double hi) {
    return lo + (hi - lo) * uniform_double();
  }

  // O(1) random access to the i-th output of the stream seeded with `seed`.
  // Used to derive independent per-sample seeds from one run seed.
  static std::uint64_t stream(std::uint64_t seed, std::uint64_t i) {
    return mix(seed + (i + 1) * UINT64_C(0x9E3779B97F4A7C15));
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * UINT64_C(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)) * UINT64_C(0x94D049BB133111EB);
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace pno

#endif  // PNO_RNG_HPP
