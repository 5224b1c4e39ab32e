#pragma once

// Entropy-generating nonlinearities H together with ψ = H', U = xψ − H and
// U₂ = xU' − U, in closed form per family.

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace entroflow {

enum class Family { boltzmann, power_concave, power_convex, sobolev, custom };

std::string to_string(Family f);
/// Accepts "boltzmann", "power-concave", "power-convex", "sobolev".
Family parse_family(const std::string& name);

/// Whether make_nonlinearity enforces the family's hypothesis window. The
/// unchecked policy exists for deliberately off-hypothesis experiments.
enum class WindowPolicy { enforce, unchecked };

/// User-supplied evaluators for the custom family.
struct Evaluators {
  std::function<double(double)> H, psi, dpsi, U, dU, U2;
};

class Nonlinearity {
 public:
  Family family() const noexcept { return family_; }
  double alpha() const noexcept { return alpha_; }
  int dim() const noexcept { return dim_; }

  double H(double x) const;
  double psi(double x) const;
  double dpsi(double x) const;
  double U(double x) const;
  double dU(double x) const;
  double U2(double x) const;

  /// ψ(0⁺) and ψ(+∞) as extended reals (±infinity allowed).
  double psi_at_zero() const noexcept { return psi0_; }
  double psi_at_inf() const noexcept { return psi_inf_; }

  /// Generalized inverse ψ⁻¹*: 0 below ψ(0⁺), +∞ above ψ(+∞).
  double inverse(double t) const;

  std::string describe() const;

 private:
  friend Nonlinearity make_nonlinearity(Family, double, int, WindowPolicy);
  friend Nonlinearity make_custom_nonlinearity(Evaluators, int, double, double);

  Family family_ = Family::boltzmann;
  double alpha_ = 1.0;
  int dim_ = 1;
  double psi0_ = 0.0;
  double psi_inf_ = 0.0;
  Evaluators custom_;
};

/// Builds a closed-form family. `alpha` is ignored for boltzmann and sobolev
/// (sobolev uses α = 1 − 1/d). Throws parameter_out_of_range outside the
/// hypothesis window unless `policy` is unchecked.
Nonlinearity make_nonlinearity(Family family, double alpha, int dim,
                               WindowPolicy policy = WindowPolicy::enforce);

/// Validates the evaluators against each other on a log grid and throws
/// inconsistent_evaluators when U ≠ xψ − H, U₂ ≠ xU' − U, ψ' ≠ dψ/dx or
/// ψ' ≤ 0 anywhere on it.
Nonlinearity make_custom_nonlinearity(Evaluators ev, int dim, double psi_at_zero, double psi_at_inf);

struct HypothesisReport {
  bool satisfied = true;
  double worst_point = 0.0;
  double worst_value = 0.0;  // min over samples of U₂ + U/d
  std::string grid_spec;
};

/// Samples U₂(x) + U(x)/d; a point fails when the value is below
/// −1e−12·max(1, |U(x)|). Needs ≥ 100 positive points spanning ≥ 4 decades.
HypothesisReport check_hypothesis_U(const Nonlinearity& nl, std::span<const double> samples);

/// n log-spaced points from lo to hi inclusive.
std::vector<double> log_grid(double lo, double hi, int n);

/// Free-function spelling of Nonlinearity::inverse.
double generalized_inverse(const Nonlinearity& nl, double t);

/// Solves f(x) = target for x > 0 with f strictly increasing, by bracket
/// expansion from `guess` and safeguarded Newton steps; relative tolerance
/// 1e−14 on x. `df` may be empty.
double invert_increasing(const std::function<double(double)>& f, const std::function<double(double)>& df,
                         double target, double guess = 1.0);

}  // namespace entroflow
