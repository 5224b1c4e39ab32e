#include "entroflow/random_fields.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "entroflow/error.hpp"

namespace entroflow {

namespace {

// Distributions written out by hand: the standard library's are allowed to
// differ between implementations, and sweeps must be reproducible.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double standard_normal(std::mt19937_64& rng) {
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

Field random_bumps(const Domain& domain, std::uint64_t seed, const BumpOptions& opt) {
  if (opt.min_bumps < 1 || opt.max_bumps < opt.min_bumps) throw Error(ErrorCode::invalid_argument, "bad bump count range");
  std::mt19937_64 rng(seed);
  const int d = domain.dim();
  const int n = opt.min_bumps + static_cast<int>(rng() % static_cast<std::uint64_t>(opt.max_bumps - opt.min_bumps + 1));

  struct Bump {
    Point c{};
    double w = 1.0, amp = 1.0;
  };
  std::vector<Bump> bumps(static_cast<std::size_t>(n));
  for (Bump& b : bumps) {
    for (int a = 0; a < d; ++a) {
      const double lo = std::max(domain.lower(a), -opt.center_radius);
      const double hi = std::min(domain.upper(a), opt.center_radius);
      b.c[a] = lo + (hi - lo) * uniform01(rng);
    }
    b.w = std::clamp(opt.width_median * std::exp(opt.width_sigma * standard_normal(rng)), opt.width_min, opt.width_max);
    b.amp = std::exp(opt.amplitude_sigma * standard_normal(rng));
  }
  Field f = Field::from_function(domain, [&](const Point& x) {
    double s = 0.0;
    for (const Bump& b : bumps) {
      double r2 = 0.0;
      for (int a = 0; a < d; ++a) r2 += (x[a] - b.c[a]) * (x[a] - b.c[a]);
      s += b.amp * std::exp(-0.5 * r2 / (b.w * b.w));
    }
    return s;
  });
  const double floor = 1e-12 * f.max();
  for (double& x : f.values()) x = std::max(x, floor);
  if (opt.mass > 0.0) f *= opt.mass / integrate(f);
  return f;
}

Field random_band_limited(const Domain& domain, std::uint64_t seed, double kmax, int modes) {
  std::mt19937_64 rng(seed);
  const int d = domain.dim();
  struct Mode {
    Point k{};
    double amp = 0.0, phase = 0.0;
  };
  std::vector<Mode> ms(static_cast<std::size_t>(modes));
  for (Mode& m : ms) {
    // Uniform in the ball |k| ≤ kmax by rejection.
    double r2;
    do {
      r2 = 0.0;
      for (int a = 0; a < d; ++a) {
        m.k[a] = kmax * (2.0 * uniform01(rng) - 1.0);
        r2 += m.k[a] * m.k[a];
      }
    } while (r2 > kmax * kmax);
    m.amp = standard_normal(rng) / std::sqrt(static_cast<double>(modes));
    m.phase = 2.0 * std::numbers::pi * uniform01(rng);
  }
  return Field::from_function(domain, [&](const Point& x) {
    double s = 0.0;
    for (const Mode& m : ms) {
      double kx = 0.0;
      for (int a = 0; a < d; ++a) kx += m.k[a] * x[a];
      s += m.amp * std::cos(kx + m.phase);
    }
    return s;
  });
}

}  // namespace entroflow
