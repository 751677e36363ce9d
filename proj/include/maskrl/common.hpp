#pragma once

#include <cstdint>
#include <cstdio>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace maskrl {

// ---- error categories ----------------------------------------------------

// Malformed input text (layout maps, config files). CLI exit code 2.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Structurally valid input that violates a constraint (bad seed list,
// missing checkpoint, inconsistent mode flags). CLI exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// API misuse by the caller (stepping a finished episode, stale cache).
struct UsageError : std::logic_error {
  using std::logic_error::logic_error;
};

// Numerical failure during training (non-finite loss or gradient).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---- deterministic RNG ----------------------------------------------------

// splitmix64; used to derive independent substream seeds from one root seed.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// mt19937 with hand-rolled draw functions. The std distributions are
// implementation-defined, so we do not use them: every draw here is fully
// specified and reproducible across compilers.
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) : gen_(static_cast<uint32_t>(splitmix64(seed))) {}

  // derive an independent substream (stream index keeps seeds distinct)
  static Rng substream(uint64_t root, uint64_t stream) {
    return Rng(splitmix64(root ^ (0xabcdef12345678ull + stream * 0x9e3779b97f4a7c15ull)));
  }

  uint32_t next_u32() { return gen_(); }

  // uniform float in [0, 1)
  float uniform() { return static_cast<float>(gen_() >> 8) * (1.0f / 16777216.0f); }

  // uniform float in (-b, b)
  float uniform_sym(float b) { return (2.0f * uniform() - 1.0f) * b; }

  // unbiased integer in [0, n), n >= 1 (rejection sampling)
  int below(int n) {
    const uint32_t un = static_cast<uint32_t>(n);
    const uint32_t limit = UINT32_MAX - UINT32_MAX % un;
    uint32_t x;
    do {
      x = gen_();
    } while (x >= limit);
    return static_cast<int>(x % un);
  }

  // index draw from an unnormalized nonnegative weight vector
  int categorical(const float* w, int n) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += w[i];
    double u = static_cast<double>(uniform()) * total;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      acc += w[i];
      if (u < acc) return i;
    }
    return n - 1;  // u landed on the tail due to rounding
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
      int j = below(i + 1);
      std::swap(v[i], v[static_cast<size_t>(j)]);
    }
  }

 private:
  std::mt19937 gen_;
};

// ---- formatting -----------------------------------------------------------

// fixed float formatting so identical runs emit byte-identical CSVs
inline std::string fmt_float(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.7g", v);
  return buf;
}

inline std::string fmt_float(float v) { return fmt_float(static_cast<double>(v)); }

}  // namespace maskrl
