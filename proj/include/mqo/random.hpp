#pragma once

#include <cstdint>
#include <random>

namespace mqo {

/// Seeded generator with portable bounded draws: the standard distributions
/// differ between library implementations, the raw engine output does not.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next() { return gen_(); }
  /// Uniform on [lo, hi].
  int64_t range(int64_t lo, int64_t hi) {
    auto span = static_cast<unsigned __int128>(static_cast<uint64_t>(hi - lo) + 1);
    return lo + static_cast<int64_t>((span * next()) >> 64);
  }
  /// Uniform on [0, n).
  size_t index(size_t n) { return static_cast<size_t>(range(0, static_cast<int64_t>(n) - 1)); }
  /// Uniform on [0, 1).
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  bool coin(double p = 0.5) { return unit() < p; }
  /// `n` lowercase letters.
  void letters(char* out, size_t n) {
    while (n > 0) {
      uint64_t x = next();
      for (int k = 0; k < 13 && n > 0; ++k, --n) {
        *out++ = static_cast<char>('a' + x % 26);
        x /= 26;
      }
    }
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace mqo
