#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace eagl {

// splitmix64 step; also used to mix seeds for derived streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(a) ^ (0x9e3779b97f4a7c15ULL + b));
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Deterministic random stream. mt19937_64 is fully specified by the
// standard; the bounded/real draws below avoid std::*_distribution, whose
// algorithms are implementation-defined, so byte-identical reproduction
// holds across toolchains.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(seed), eng_(splitmix64(seed)) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return eng_(); }

  // Uniform in [0, n). n must be >= 1.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
    std::uint64_t x = eng_();
    while (x >= limit) x = eng_();
    return x % n;
  }

  // Uniform in [0, 1) with 53 random bits.
  double real() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return real() < p; }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // k distinct values from [0, n), returned sorted. Requires k <= n.
  std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k);

  // Independent stream; depends on this stream's seed, not its state.
  RngStream derive(std::uint64_t salt) const { return RngStream(mix_seed(seed_, salt)); }

 private:
  std::uint64_t seed_;
  std::mt19937_64 eng_;
};

inline std::vector<std::size_t> RngStream::sample_indices(std::size_t n, std::size_t k) {
  // Floyd's algorithm keeps the draw count at k regardless of n.
  std::vector<bool> taken(n, false);
  std::vector<std::size_t> out;
  out.reserve(k);
  for (std::size_t j = n - k; j < n; ++j) {
    std::size_t t = static_cast<std::size_t>(below(j + 1));
    if (taken[t]) t = j;
    taken[t] = true;
    out.push_back(t);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace eagl
