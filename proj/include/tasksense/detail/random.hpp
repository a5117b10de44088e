#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace tasksense::detail {

// Seeded random source built on mt19937_64 raw output only. The standard
// distributions are implementation-defined, so every draw here is derived
// from the engine's bit stream directly; identical seeds give identical
// streams on every platform.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // uniform double in [0, 1), 53-bit resolution
  double u01() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  // uniform index in [0, n)
  std::size_t index(std::size_t n) {
    auto i = static_cast<std::size_t>(u01() * static_cast<double>(n));
    return i < n ? i : n - 1;
  }

  // standard normal via Box-Muller, pairs cached
  double gaussian() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u1 = u01();
    while (u1 == 0.0) u1 = u01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u01();
    cached_ = r * std::sin(theta);
    has_cached_ = true;
    return r * std::cos(theta);
  }

  std::uint64_t raw() { return eng_(); }

private:
  std::mt19937_64 eng_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

// in-place Fisher-Yates shuffle driven by Rng (std::shuffle is
// implementation-defined)
template <typename Seq>
void shuffle(Seq& seq, Rng& rng) {
  for (std::size_t i = seq.size(); i > 1; --i) {
    using std::swap;
    swap(seq[i - 1], seq[rng.index(i)]);
  }
}

}  // namespace tasksense::detail
