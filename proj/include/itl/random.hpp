#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace itl {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). The 64-bit
// seed is the key; `stream` occupies the upper half of the 128-bit counter,
// so (seed, stream) pairs give independent, order-free sequences.
class Philox4x32 {
 public:
  using result_type = std::uint32_t;
  using Block = std::array<std::uint32_t, 4>;

  explicit Philox4x32(std::uint64_t seed, std::uint64_t stream = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()();

  // 53-bit uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Box-Muller standard normal.
  double normal();
  // Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

  static Block round10(Block counter, std::array<std::uint32_t, 2> key);

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint64_t counter_ = 0;
  std::uint64_t stream_;
  Block buffer_{};
  int used_ = 4;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

// Mixes a base seed with a tag so derived seeds do not collide.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag);

}  // namespace itl
