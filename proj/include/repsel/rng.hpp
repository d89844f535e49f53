#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string_view>
#include <vector>

namespace repsel::rng {

// splitmix64 step; used both as a generator kernel and for seed derivation.
inline std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t hash_str(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Derives an independent stream seed from a base seed and a label path.
// Identical (seed, labels) always give the identical derived seed.
inline std::uint64_t derive(std::uint64_t seed, std::string_view label, std::uint64_t index = 0) {
  std::uint64_t h = mix(seed ^ 0x6a09e667f3bcc908ULL);
  h = mix(h ^ hash_str(label));
  h = mix(h ^ index);
  return h;
}

// Small deterministic generator. We avoid std:: distributions on purpose:
// their output is implementation-defined, and reproducibility of results
// files is part of the contract.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : state_(seed ? seed : 0x853c49e6748fea9bULL) {}

  std::uint64_t next_u64() {
    state_ = mix(state_);
    return state_;
  }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n); n > 0.
  std::uint64_t below(std::uint64_t n) {
    // Multiply-shift; bias is negligible for the n used here (well below 2^32).
    return static_cast<std::uint64_t>((static_cast<__uint128_t>(next_u64()) * n) >> 64);
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Standard normal via Box-Muller.
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  // k distinct values from [0, n), ascending.
  std::vector<std::uint32_t> sample_without_replacement(std::uint32_t n, std::uint32_t k) {
    std::vector<std::uint32_t> pool(n);
    std::iota(pool.begin(), pool.end(), 0u);
    for (std::uint32_t i = 0; i < k; ++i) {
      const auto j = i + static_cast<std::uint32_t>(below(n - i));
      std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    std::sort(pool.begin(), pool.end());
    return pool;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

 private:
  std::uint64_t state_;
};

}  // namespace repsel::rng
