#pragma once

#include <cstdint>
#include <random>

namespace w99sim
{

/// Independent, reproducible uniform stream. Streams with different ids
/// derived from the same seed do not share state, so adding draws to one
/// purpose never shifts the numbers another purpose sees.
class RandomStream
{
public:
  RandomStream(std::uint64_t seed, std::uint32_t stream_id)
  {
    std::seed_seq seq{
      static_cast<std::uint32_t>(seed & 0xffffffffULL), static_cast<std::uint32_t>(seed >> 32),
      stream_id};
    engine_.seed(seq);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

private:
  std::mt19937_64 engine_;
};

}  // namespace w99sim
