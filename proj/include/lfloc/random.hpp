#ifndef LFLOC_RANDOM_HPP
#define LFLOC_RANDOM_HPP

#include <cstdint>
#include <limits>

namespace lfloc {

/// SplitMix64: tiny, fast to seed, passes BigCrush. Satisfies UniformRandomBitGenerator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Deterministic seed for an independent stream keyed by (seed, a, b, c).
/// Lets parallel workers draw the same numbers as a serial loop.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                                 std::uint64_t c = 0) {
  SplitMix64 mix(seed);
  std::uint64_t h = mix();
  for (std::uint64_t k : {a, b, c}) {
    SplitMix64 step(h ^ (k + 0x632be59bd9b4e019ULL));
    h = step();
  }
  return h;
}

/// Uniform double in [0, 1) from the top 53 bits.
template <typename Rng>
double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace lfloc

#endif  // LFLOC_RANDOM_HPP
