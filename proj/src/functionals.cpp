#include "entroflow/functionals.hpp"

#include <cmath>
#include <sstream>

#include "entroflow/error.hpp"
#include "entroflow/summation.hpp"

namespace entroflow {

namespace {

void require_nonnegative(const Field& u) {
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i] < 0.0 || std::isnan(u[i])) {
      std::ostringstream os;
      os << "u(" << i << ") = " << u[i];
      throw Error(ErrorCode::negative_value, os.str());
    }
  }
}

}  // namespace

double entropy(const Nonlinearity& nl, const Field& psi_v, const Field& u) {
  require_same_domain(psi_v, u, "entropy");
  require_nonnegative(u);
  CompensatedSum s;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i] == 0.0) continue;
    s.add(nl.H(u[i]) - u[i] * psi_v[i]);
  }
  return s.value() * u.domain().cell_volume();
}

double entropy_with_potential(const Nonlinearity& nl, const Field& V, const Field& u) {
  require_same_domain(V, u, "entropy_with_potential");
  require_nonnegative(u);
  CompensatedSum s;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i] == 0.0) continue;
    s.add(nl.H(u[i]) + u[i] * V[i]);
  }
  return s.value() * u.domain().cell_volume();
}

void require_mass_match(double mass_u, double mass_v, double rel_tol) {
  if (!(std::abs(mass_u - mass_v) <= rel_tol * std::abs(mass_v))) {
    std::ostringstream os;
    os.precision(17);
    os << "mass " << mass_u << " vs reference " << mass_v;
    throw Error(ErrorCode::mass_mismatch, os.str());
  }
}

double relative_entropy(const Nonlinearity& nl, const Potential& pot, const ExtremalProfile& v, const Field& u) {
  require_same_domain(v.v, u, "relative_entropy");
  require_nonnegative(u);
  require_mass_match(integrate(u), v.mass);
  const Field V = pot.sample(u.domain());
  CompensatedSum s;
  for (std::size_t i = 0; i < u.size(); ++i) s.add(nl.H(u[i]) - nl.H(v.v[i]) + (u[i] - v.v[i]) * V[i]);
  return s.value() * u.domain().cell_volume();
}

Field psi_of(const Nonlinearity& nl, const Field& u) {
  if (std::isfinite(nl.psi_at_zero())) return u.map([&](double x) { return nl.psi(x); });
  const double floor = 1e-12 * u.max();
  return u.map([&](double x) { return nl.psi(std::max(x, floor)); });
}

VectorField support_gradient(const Field& g, const Field& u) {
  require_same_domain(g, u, "support_gradient");
  std::vector<char> mask(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) mask[i] = u[i] > 0.0 ? 1 : 0;
  VectorField out;
  for (int a = 0; a < u.domain().dim(); ++a) out.push_back(masked_partial(g, mask, a));
  return out;
}

double entropy_production(const Nonlinearity& nl, const Potential& pot, const Field& u) {
  require_nonnegative(u);
  const Domain& dom = u.domain();
  if (!(u.max() > 0.0)) return 0.0;
  const Field w = psi_of(nl, u) + pot.sample(dom);
  const VectorField gw = support_gradient(w, u);
  CompensatedSum s;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i] == 0.0) continue;
    double r2 = 0.0;
    for (int a = 0; a < dom.dim(); ++a) {
      const double c = gw[static_cast<std::size_t>(a)][i];
      r2 += c * c;
    }
    s.add(u[i] * r2);
  }
  return s.value() * dom.cell_volume();
}

DeficitReport deficit(const Nonlinearity& nl, const Potential& pot, const ExtremalProfile& v, const Field& u,
                      double C) {
  if (!(C > 0.0)) throw Error(ErrorCode::parameter_out_of_range, "convexity constant must be positive");
  DeficitReport rep;
  rep.lhs = relative_entropy(nl, pot, v, u);
  rep.rhs = entropy_production(nl, pot, u);
  rep.C = C;
  rep.deficit = rep.rhs / (2.0 * C) - rep.lhs;
  rep.variant = v.v.all_positive() ? "positive-v" : "generalized-inverse";
  rep.family = nl.describe();
  rep.potential = pot.describe();
  rep.grid = u.domain().describe();
  return rep;
}

}  // namespace entroflow
