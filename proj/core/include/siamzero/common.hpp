#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace siamzero {

/// Domain error raised by every module; the CLI maps it to exit status 1.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

[[noreturn]] inline void fail(const std::string& what) { throw Error(what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(what);
}

// --- seeding -------------------------------------------------------------

/// splitmix64 step; combines two seeds into an independent stream seed.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 0x632be59bd9b4e019ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Deterministic RNG. mt19937 is fully specified by the standard and the
/// bounded draws below avoid std::uniform_*_distribution, whose output is
/// implementation defined. Same seed, same machine or not: same stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed)
      : gen_(static_cast<std::uint32_t>(mix_seed(seed, 0x5eedULL))) {}

  std::uint32_t u32() { return gen_(); }

  /// Uniform integer in [0, n). n must be > 0.
  std::uint32_t below(std::uint32_t n) {
    return static_cast<std::uint32_t>(
        (static_cast<std::uint64_t>(u32()) * n) >> 32);
  }

  /// Uniform float in [0, 1) with 24 random mantissa bits.
  float unit() { return static_cast<float>(u32() >> 8) * (1.0f / 16777216.0f); }

  float uniform(float lo, float hi) { return lo + (hi - lo) * unit(); }

  /// Box-Muller; uses libm so only run-to-run determinism is guaranteed.
  float normal() {
    float u1 = (static_cast<float>(u32() >> 8) + 1.0f) * (1.0f / 16777216.0f);
    float u2 = unit();
    return std::sqrt(-2.0f * std::log(u1)) *
           std::cos(6.2831853071795864769f * u2);
  }

  /// In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = below(static_cast<std::uint32_t>(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  /// k distinct values from [0, m), order randomized (partial Fisher-Yates).
  std::vector<int> sample_without_replacement(int m, int k);

 private:
  std::mt19937 gen_;
};

// --- little-endian binary IO ----------------------------------------------

inline void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t read_u32(std::istream& in, const std::string& what) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) fail("truncated " + what);
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_f32_array(std::ostream& out, const float* data, std::size_t count);
void read_f32_array(std::istream& in, float* data, std::size_t count,
                    const std::string& what);

}  // namespace siamzero
