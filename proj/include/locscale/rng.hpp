#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace locscale {

// Deterministic generator used throughout: mt19937_64 plus explicit
// distribution transforms. The standard library's distribution objects are
// implementation-defined, so sampling here is written out by hand to keep
// store files reproducible for a given seed across compilers.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static constexpr const char* kGeneratorId = "mt19937_64/polar-normal/marsaglia-tsang-gamma";

  std::uint64_t raw() { return engine_(); }

  // Uniform on [0,1), 53-bit resolution.
  double uniform() { return (engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer on {0,...,m-1} by rejection, bias-free.
  std::uint64_t uniform_index(std::uint64_t m) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % m;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % m;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Marsaglia polar method; the spare deviate is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  // Marsaglia-Tsang for shape >= 1; shape < 1 boosted via U^{1/shape}.
  double gamma(double shape, double scale = 1.0) {
    if (shape < 1.0) {
      const double u = uniform_pos();
      return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
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
      const double u = uniform_pos();
      if (u < 1.0 - 0.0331 * x * x * x * x) return scale * d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return scale * d * v;
    }
  }

  // Inverse gamma with density proportional to x^{-shape-1} exp(-rate/x).
  double inverse_gamma(double shape, double rate) { return rate / gamma(shape, 1.0); }

 private:
  double uniform_pos() {
    double u;
    do {
      u = uniform();
    } while (u <= 0.0);
    return u;
  }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace locscale
