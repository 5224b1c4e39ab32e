#pragma once

// Convex confinement potentials and the extremal profiles v = ψ⁻¹*(β − V).

#include <functional>

#include "entroflow/grid.hpp"
#include "entroflow/nonlinearity.hpp"

namespace entroflow {

class Potential {
 public:
  int dim() const noexcept { return dim_; }
  double offset() const noexcept { return offset_; }
  double shift() const noexcept { return shift_; }
  double scale() const noexcept { return scale_; }
  /// Lower bound C on ∇²V.
  double convexity() const noexcept { return convexity_; }
  bool is_quadratic() const noexcept { return quadratic_; }

  double value(const Point& x) const;
  Point gradient(const Point& x) const;

  /// V sampled at the cell centers.
  Field sample(const Domain& domain) const;
  /// Component `axis` of ∇V sampled at the cell centers.
  Field sample_gradient(const Domain& domain, int axis) const;

  /// Outer normal derivative on {x_d = 0} (normal −e): −∂_d V.
  double bottom_normal_derivative(const Point& x) const;

  std::string describe() const;

 private:
  friend Potential make_shifted_quadratic(double, double, double, int);
  friend Potential make_custom_potential(std::function<double(const Point&)>,
                                         std::function<Point(const Point&)>, double, int);

  int dim_ = 1;
  double offset_ = 0.0;
  double shift_ = 0.0;
  double scale_ = 1.0;
  double convexity_ = 2.0;
  bool quadratic_ = true;
  std::function<double(const Point&)> value_;
  std::function<Point(const Point&)> gradient_;
};

/// V(x) = a + scale·‖x + h e‖² with e the d-th unit vector; C = 2·scale.
Potential make_shifted_quadratic(double a, double h, double scale, int dim);

/// Custom convex potential; `convexity` is the caller's lower bound on ∇²V.
Potential make_custom_potential(std::function<double(const Point&)> value,
                                std::function<Point(const Point&)> gradient, double convexity, int dim);

struct ExtremalProfile {
  Field v;
  double beta = 0.0;
  double mass = 0.0;
};

/// Profile ψ⁻¹*(β − V) on the grid with β chosen by bisection so the cell
/// quadrature mass equals `target_mass`. Throws bracket_failure when no
/// finite β reaches the mass, and support_escapes_box when a compactly
/// supported profile touches a truncation face.
ExtremalProfile extremal_profile(const Nonlinearity& nl, const Potential& pot, const Domain& domain,
                                 double target_mass);

/// Bisection for the β at which the increasing function mass_at reaches
/// target_mass, with bracket expansion from `guess`; +∞ counts as too big.
double solve_normalizer(const std::function<double(double)>& mass_at, double target_mass, double guess);

/// Profile for a given β (no normalization).
Field profile_for_beta(const Nonlinearity& nl, const Field& V, double beta);

/// Standard normal measure of (−h, ∞), i.e. Φ(h).
double gaussian_halfspace_mass(double h);

/// C_h = ∫_{x_d ≥ 0} exp(−½‖x + h e‖²) dx = (2π)^{d/2}·Φ(−h).
double gaussian_normalizer(double h, int dim);

}  // namespace entroflow
