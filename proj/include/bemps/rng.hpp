#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace bemps {

/// splitmix64 finalizer; used for stream derivation and stateless per-key
/// uniforms (random baseline scores).
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
  return mix64(a ^ mix64(b));
}

/// Derive a named child seed from a master seed. Streams with distinct tags
/// are independent for all practical purposes.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                                 std::uint64_t index = 0) {
  std::uint64_t h = master;
  for (char c : tag) h = mix64(h, static_cast<std::uint64_t>(c));
  return mix64(h, index);
}

/// Uniform double in [0,1) from a 64-bit key, stateless.
inline double uniform01_from_key(std::uint64_t key) {
  return static_cast<double>(mix64(key) >> 11) * 0x1.0p-53;
}

/// mt19937_64 with hand-rolled distribution transforms. The engine itself is
/// bit-reproducible everywhere; std::*_distribution is not specified across
/// standard libraries, so the transforms live here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n), n > 0. Rejection-free modulo bias is
  /// negligible for n far below 2^64; use rejection anyway.
  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return v % n;
  }

  double normal() {
    // Marsaglia polar method; caches the spare deviate.
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

  /// Marsaglia–Tsang gamma sampler, shape > 0, scale 1.
  double gamma(double shape) {
    if (shape < 1.0) {
      const double u = uniform01();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform01();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  /// Symmetric Dirichlet draw onto `out`.
  void dirichlet(double concentration, std::span<double> out) {
    double total = 0.0;
    for (double& v : out) {
      v = gamma(concentration);
      total += v;
    }
    if (total <= 0.0) {
      // Entire draw underflowed (tiny concentration); fall back to a vertex.
      out[uniform_index(out.size())] = 1.0;
      total = 1.0;
    }
    for (double& v : out) v /= total;
  }

  template <class T>
  void shuffle(std::vector<T>& xs) {
    for (std::size_t i = xs.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_index(i));
      std::swap(xs[i - 1], xs[j]);
    }
  }

  /// k distinct indices from [0, n), in selection order.
  std::vector<std::size_t> sample_without_replacement(std::size_t n,
                                                      std::size_t k);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

inline std::vector<std::size_t> Rng::sample_without_replacement(std::size_t n,
                                                                std::size_t k) {
  std::vector<std::size_t> pool(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = i;
  std::vector<std::size_t> picked;
  picked.reserve(k);
  for (std::size_t i = 0; i < k && i < n; ++i) {
    std::size_t j = i + static_cast<std::size_t>(uniform_index(n - i));
    std::swap(pool[i], pool[j]);
    picked.push_back(pool[i]);
  }
  return picked;
}

}  // namespace bemps
