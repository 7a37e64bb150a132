#pragma once

#include <array>
#include <cstdint>

namespace greenforms {

// xoshiro256** seeded through splitmix64; bit-identical on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  // uniform in [0, 1) with 53 random bits
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Marsaglia polar method, cached pair
  double normal();
  std::uint64_t below(std::uint64_t bound);

  // independent stream derived from this seed and a tag
  Rng split(std::uint64_t tag) const;

 private:
  std::array<std::uint64_t, 4> s_{};
  std::uint64_t seed_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace greenforms
