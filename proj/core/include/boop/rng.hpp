#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace boop {

// Deterministic random stream. All samplers are implemented on top of the
// raw mt19937_64 output so that a given seed reproduces the same draws on
// every platform and standard library.
class RngStream {
public:
  explicit RngStream(std::uint64_t seed = 1) : engine_(seed) {}

  std::uint64_t raw() { return engine_(); }

  // Uniform on [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1]; safe as a log() argument.
  double uniform_pos() {
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n) {
    return engine_() % n;
  }

  // Standard normal via Box-Muller (stateless: both uniforms are consumed
  // per draw, which keeps the stream position independent of call history).
  double normal() {
    const double u1 = uniform_pos();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  // Gamma(shape, scale=1) via Marsaglia-Tsang; shape < 1 handled by boosting.
  double gamma(double shape) {
    if (shape < 1.0) {
      const double u = uniform_pos();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      const double u = uniform_pos();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double chi_squared(double dof) { return 2.0 * gamma(0.5 * dof); }

  // Derives an independent stream; used to give sub-tasks their own seeds.
  RngStream spawn() { return RngStream(engine_()); }

private:
  std::mt19937_64 engine_;
};

}  // namespace boop
