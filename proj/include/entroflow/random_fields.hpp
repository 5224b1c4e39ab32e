#pragma once

// Seeded random test functions for the property sweeps.

#include <cstdint>

#include "entroflow/grid.hpp"

namespace entroflow {

struct BumpOptions {
  int min_bumps = 1;
  int max_bumps = 3;
  double center_radius = 1.5;  // centers uniform in [−R, R] per axis, clipped to the box
  double width_median = 0.7;   // log-normal widths, clamped to [width_min, width_max]
  double width_sigma = 0.3;
  double width_min = 0.25;
  double width_max = 1.25;
  double amplitude_sigma = 0.5;
  double mass = 1.0;           // renormalize to this mass; ≤ 0 skips it
};

/// Sum of 1–3 Gaussian bumps, floored at 1e−12·max and renormalized.
/// Deterministic in (domain, seed, options).
Field random_bumps(const Domain& domain, std::uint64_t seed, const BumpOptions& opt = {});

/// Σ A_m cos(k_m·x + φ_m) with |k_m| ≤ kmax.
Field random_band_limited(const Domain& domain, std::uint64_t seed, double kmax = 1.5, int modes = 6);

}  // namespace entroflow
