#pragma once

// Entropy-inequality, trace log-Sobolev and (trace) Gagliardo–Nirenberg–
// Sobolev verifiers on the truncated half space.

#include <optional>
#include <string>

#include "entroflow/functionals.hpp"
#include "entroflow/grid.hpp"
#include "entroflow/nonlinearity.hpp"
#include "entroflow/potential.hpp"

namespace entroflow {

struct EntropyInequalityReport {
  DeficitReport numbers;
  bool hypotheses_ok = true;
  bool advisory = false;        // numbers only, no verdict
  std::optional<bool> pass;     // empty when advisory
  double tolerance = 1e-8;      // deficit ≥ −tolerance·(1 + |rhs|)
};

/// Checks U₂ + U/d ≥ 0 and finiteness of v, then evaluates the deficit with
/// C = pot.convexity(). Out-of-hypothesis inputs throw hypothesis_violation
/// unless `allow_advisory`, in which case the numbers come back without a
/// verdict.
EntropyInequalityReport verify_entropy_inequality(const Nonlinearity& nl, const Potential& pot,
                                                  const ExtremalProfile& v, const Field& u,
                                                  double tolerance = 1e-8, bool allow_advisory = false);

/// u_λ(x) = λ^d u(λx) resampled on the same grid by tensor cubic
/// interpolation. Points mapped beyond a truncation face read 0 provided u
/// is negligible (≤ 1e−10·max u) on that face's cell layer; otherwise
/// support_escapes_box.
Field rescale(const Field& u, double lambda);

/// ∫ ‖∇u‖²/u = ∫ u‖∇log u‖², with ∇log u differenced inside {u > 0}.
double fisher_information(const Field& u);

/// ∫ |f|^p.
double lp_integral(const Field& f, double p);

struct TraceLogSobReport {
  double h = 0.0;
  int d = 1;
  double lhs = 0.0;            // ∫ u log u
  double fisher = 0.0;
  double trace = 0.0;          // ∫ over {x_d = 0} of u
  double gaussian_mass = 0.0;  // Φ(−h), Gaussian measure of the shifted half space
  double normalizer = 0.0;     // C_h = (2π)^{d/2}·gaussian_mass
  double lambda = 1.0;         // (fisher/d)^{−1/2}
  double rhs = 0.0;            // (d/2)log(fisher/(2πde)) − log γ − hλ·trace
  double deficit = 0.0;
  double pre_rhs = 0.0;        // −d − log C_h + ½fisher − h·trace
  double pre_deficit = 0.0;
  std::string grid;
};

/// Needs ∫u = 1 (1e−8 relative), u > 0 on the grid, and a domain whose
/// bottom face is a true boundary.
TraceLogSobReport trace_logsob_report(const Field& u, double h);

/// Right-hand side of the rescaled bound for an arbitrary λ.
double trace_logsob_rhs(const TraceLogSobReport& r, double lambda);

struct TraceGnsReport {
  double alpha = 2.0;
  double h = 0.0;
  int d = 1;
  double delta = 0.0;
  double theta = 0.0;
  double A = 0.0, B = 0.0, D = 0.0;
  double beta = 0.0;       // normalizer of the extremal profile
  double gradient = 0.0;   // ∫ ‖∇u^{α−½}‖²
  double trace = 0.0;      // ∫ over {x_d = 0} of u^α
  double lhs = 0.0;        // A ∫ u^α
  // λ = 1 (unrescaled) intermediate inequality
  double rhs = 0.0;        // B − h·trace + D·gradient
  double deficit = 0.0;
  // rescaled at λ^{2δ} = B(δ−1)/(D(δ+1)·gradient)
  double lambda = 1.0;
  double rhs_rescaled = 0.0;  // Bλ^{1−δ} − hλ·trace + Dλ^{δ+1}·gradient
  double deficit_rescaled = 0.0;
  double a_h = 0.0, b_h = 0.0;  // rhs_rescaled = a_h·gradient^{(δ−1)/(2δ)} − b_h·h·trace·gradient^{−1/(2δ)}
  std::string grid;
};

/// Needs α > 1 and ∫u = 1. The extremal profile v = ((α−1)(β − ‖x+he‖²))₊^{1/(α−1)}
/// is built on u's grid to obtain β and B.
TraceGnsReport trace_gns_report(const Field& u, double alpha, double h);

/// (1 − 1/δ)(1 − 1/(2α)) with δ = d(α−1)+1.
double gns_theta(double alpha, int d);

/// (1 − ‖x‖²)₊^{(2α−1)/(2(α−1))}, the GNS extremizer.
double gns_extremizer(double alpha, const Point& x, int d);

/// C_α: the GNS quotient of the extremizer on the half space, from cell
/// quadrature of f and its exact gradient on a [−1.25,1.25]^{d−1}×[0,1.25]
/// grid with `cells` per axis.
double gns_constant(double alpha, int d, int cells = 8192);

struct GnsReport {
  double alpha = 2.0;
  int d = 1;
  double theta = 0.0;
  double q_norm = 0.0;     // ‖f‖_{2α/(2α−1)}
  double grad_norm = 0.0;  // ‖∇f‖₂
  double r_norm = 0.0;     // ‖f‖_{2/(2α−1)}
  double C = 0.0;
  double quotient = 0.0;   // q_norm / (grad^θ r^{1−θ})
  double rhs = 0.0;        // C·grad^θ·r^{1−θ}
  double deficit = 0.0;    // rhs − q_norm
  double rel_deficit = 0.0;
};

/// Throws zero_field for f ≡ 0 and negative_value for f < 0.
GnsReport verify_gns(const Field& f, double alpha, double C);

/// The quotient alone.
double gns_quotient(const Field& f, double alpha);

}  // namespace entroflow
