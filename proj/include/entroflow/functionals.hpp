#pragma once

// Entropy, relative entropy and entropy production.

#include <string>

#include "entroflow/grid.hpp"
#include "entroflow/nonlinearity.hpp"
#include "entroflow/potential.hpp"

namespace entroflow {

struct DeficitReport {
  double lhs = 0.0;      // relative entropy
  double rhs = 0.0;      // entropy production
  double C = 1.0;
  double deficit = 0.0;  // rhs/(2C) − lhs
  std::string variant;   // "positive-v" or "generalized-inverse"
  std::string family;
  std::string potential;
  std::string grid;
};

/// ∫ H(u) − u·ψ(v), given the field ψ(v).
double entropy(const Nonlinearity& nl, const Field& psi_v, const Field& u);

/// ∫ H(u) + u·V, given the sampled potential.
double entropy_with_potential(const Nonlinearity& nl, const Field& V, const Field& u);

/// ∫ H(u) − H(v) + (u − v)V. Throws mass_mismatch unless ∫u = ∫v to 1e−8
/// relative.
double relative_entropy(const Nonlinearity& nl, const Potential& pot, const ExtremalProfile& v, const Field& u);

/// ∫ u‖∇(ψ(u) + V)‖². The gradient is obtained by differencing ψ(u) + V with
/// stencils that stay inside {u > 0}; the integrand is 0 where u = 0. When
/// ψ(0⁺) = −∞, u is floored at 1e−12·max(u) before ψ is applied.
double entropy_production(const Nonlinearity& nl, const Potential& pot, const Field& u);

/// ∇g restricted to {u > 0}: one-sided stencils at the support edge, zero
/// outside the support.
VectorField support_gradient(const Field& g, const Field& u);

/// ψ(u) with the floor described at entropy_production.
Field psi_of(const Nonlinearity& nl, const Field& u);

/// Relative mass check shared by the verifiers.
void require_mass_match(double mass_u, double mass_v, double rel_tol = 1e-8);

/// Relative entropy, production and deficit 𝓘/(2C) − (𝓕(u) − 𝓕(v)).
DeficitReport deficit(const Nonlinearity& nl, const Potential& pot, const ExtremalProfile& v, const Field& u,
                      double C);

}  // namespace entroflow
