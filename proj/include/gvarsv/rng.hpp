#pragma once

#include <armadillo>
#include <cmath>
#include <cstdint>
#include <random>

namespace gvarsv {

// SplitMix64 step; used to derive stream seeds from a master seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Derives a child seed from (master, path...). Identical inputs give
// identical seeds on every platform, which is what makes parallel
// per-country chains and per-(draw, replication) simulations reproducible
// regardless of scheduling.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = master;
  std::uint64_t out = splitmix64(s);
  for (std::uint64_t p : path) {
    s ^= p + 0x9E3779B97F4A7C15ULL + (s << 6) + (s >> 2);
    out = splitmix64(s);
  }
  return out;
}

// Deterministic random source. All transforms are written out explicitly
// (Box-Muller, Marsaglia-Tsang) rather than taken from <random>'s
// distributions, whose output is implementation-defined. mt19937_64 itself
// is fully specified by the standard, so a given seed yields bit-identical
// streams on any conforming compiler.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform on [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; consumes exactly two uniforms per call.
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log1p(-u1)) *
           std::cos(2.0 * arma::datum::pi * u2);
  }

  arma::vec normal_vec(arma::uword n) {
    arma::vec v(n);
    for (arma::uword i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

  // Gamma(shape, scale 1) by Marsaglia-Tsang; shape < 1 handled by boosting.
  double gamma(double shape) {
    if (shape < 1.0) {
      const double u = uniform();
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
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  // Inverse gamma with density proportional to x^{-shape-1} exp(-scale/x).
  double inv_gamma(double shape, double scale) {
    return scale / gamma(shape);
  }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace gvarsv
