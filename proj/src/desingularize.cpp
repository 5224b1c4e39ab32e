#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>

#include "entroflow/error.hpp"
#include "entroflow/flow.hpp"

namespace entroflow {

namespace {

constexpr int table_cells = 256;
using Gauss = boost::math::quadrature::gauss<double, 10>;

double smoothstep(double tau) {
  tau = std::clamp(tau, 0.0, 1.0);
  return tau * tau * tau * (tau * (6.0 * tau - 15.0) + 10.0);
}

double base_W(const Nonlinearity& nl, int d, double x) { return nl.U2(x) + nl.U(x) / d; }

// Composite Gauss rule on the table cells, so the slopes and the tables see
// the same quadrature.
template <class F>
double composite(F&& f, double x0, double x1) {
  const double h = (x1 - x0) / table_cells;
  double s = 0.0;
  for (int k = 0; k < table_cells; ++k) s += Gauss::integrate(f, x0 + k * h, x0 + (k + 1) * h);
  return s;
}

}  // namespace

double DesingularizedNonlinearity::Table::hermite(const std::vector<double>& f, const std::vector<double>& df,
                                                   double x) const {
  int k = static_cast<int>(std::floor((x - x0) / hx));
  k = std::clamp(k, 0, table_cells - 1);
  const double t = (x - (x0 + k * hx)) / hx;
  const double t2 = t * t, t3 = t2 * t;
  const std::size_t i = static_cast<std::size_t>(k);
  return (2 * t3 - 3 * t2 + 1) * f[i] + (t3 - 2 * t2 + t) * hx * df[i] + (-2 * t3 + 3 * t2) * f[i + 1] +
         (t3 - t2) * hx * df[i + 1];
}

double DesingularizedNonlinearity::blend_left(double x) const {
  const double e2 = 0.5 * eps_;
  const double s = smoothstep((x - e2) / e2);
  return (1.0 - s) * a_ * x / dim_ + s * base_W(base_, dim_, x);
}

double DesingularizedNonlinearity::blend_right(double x) const {
  const double r0 = 1.0 / eps_;
  const double s = smoothstep((x - r0) / eps_);
  return (1.0 - s) * base_W(base_, dim_, x) + s * b_ * x / dim_;
}

double DesingularizedNonlinearity::W(double x) const {
  if (boltzmann_) return x / dim_;
  const double r0 = 1.0 / eps_;
  if (x <= 0.5 * eps_) return a_ * x / dim_;
  if (x < eps_) return blend_left(x);
  if (x <= r0) return base_W(base_, dim_, x);
  if (x < right_end()) return blend_right(x);
  return b_ * x / dim_;
}

double DesingularizedNonlinearity::U(double x) const {
  if (boltzmann_) return x;
  const double r0 = 1.0 / eps_;
  const double p = 1.0 - 1.0 / dim_;
  if (x <= 0.5 * eps_) return a_ * x;
  if (x < eps_) return std::pow(x, p) * left_.hermite(left_.G, left_.dG, x);
  if (x <= r0) return base_.U(x);
  if (x < right_end()) return std::pow(x, p) * right_.hermite(right_.G, right_.dG, x);
  return b_ * x;
}

double DesingularizedNonlinearity::dU(double x) const {
  if (boltzmann_) return 1.0;
  if (x <= 0.5 * eps_) return a_;
  if (x >= right_end()) return b_;
  if (x >= eps_ && x <= 1.0 / eps_) return base_.dU(x);
  return (W(x) + (1.0 - 1.0 / dim_) * U(x)) / x;
}

double DesingularizedNonlinearity::U2(double x) const { return x * dU(x) - U(x); }

double DesingularizedNonlinearity::psi(double x) const {
  if (boltzmann_) return x > 0.0 ? std::log(x) : -std::numeric_limits<double>::infinity();
  if (x <= 0.0) return -std::numeric_limits<double>::infinity();
  const double e2 = 0.5 * eps_, r1 = right_end();
  if (x <= e2) return left_.P.front() + a_ * std::log(x / e2);
  if (x < eps_) return left_.hermite(left_.P, left_.dP, x);
  if (x <= 1.0 / eps_) return base_.psi(x);
  if (x < r1) return right_.hermite(right_.P, right_.dP, x);
  return right_.P.back() + b_ * std::log(x / r1);
}

double DesingularizedNonlinearity::dpsi(double x) const { return dU(x) / x; }

double DesingularizedNonlinearity::H(double x) const {
  if (x <= 0.0) return 0.0;
  if (boltzmann_ || (x >= eps_ && x <= 1.0 / eps_)) return base_.H(x);
  return x * psi(x) - U(x);
}

double DesingularizedNonlinearity::inverse_psi(double t) const {
  if (std::isnan(t)) throw Error(ErrorCode::invalid_argument, "inverse of NaN");
  if (boltzmann_) return std::exp(t);
  const double e2 = 0.5 * eps_, r0 = 1.0 / eps_, r1 = right_end();
  const double p_lo = left_.P.front(), p_e = base_.psi(eps_), p_r0 = base_.psi(r0), p_hi = right_.P.back();
  if (t <= p_lo) return e2 * std::exp((t - p_lo) / a_);
  if (t >= p_hi) return r1 * std::exp((t - p_hi) / b_);
  if (t >= p_e && t <= p_r0) return std::clamp(base_.inverse(t), eps_, r0);
  double lo = t < p_e ? e2 : r0;
  double hi = t < p_e ? eps_ : r1;
  for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (psi(mid) < t) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

DesingularizedNonlinearity desingularize(const Nonlinearity& nl, double eps, int dim) {
  if (!(eps > 0.0 && eps < 1.0)) throw Error(ErrorCode::parameter_out_of_range, "epsilon must lie in (0, 1)");
  if (dim < 1 || dim != nl.dim()) throw Error(ErrorCode::dimension_mismatch, "dimension differs from the nonlinearity's");
  const HypothesisReport hyp = check_hypothesis_U(nl, log_grid(1e-6, 1e6, 481));
  if (!hyp.satisfied) {
    std::ostringstream os;
    os << "U2 + U/d = " << hyp.worst_value << " at x = " << hyp.worst_point;
    throw Error(ErrorCode::hypothesis_violation, os.str());
  }

  DesingularizedNonlinearity dn;
  dn.base_ = nl;
  dn.eps_ = eps;
  dn.dim_ = dim;
  if (nl.family() == Family::boltzmann) {
    dn.boltzmann_ = true;
    return dn;
  }

  const double d = dim;
  const double q = 1.0 / d;
  const double e2 = 0.5 * eps, r0 = 1.0 / eps, r1 = r0 + eps;
  auto Wb = [&](double t) { return base_W(nl, dim, t); };
  auto G_exact = [&](double x) { return std::pow(x, -1.0 + q) * nl.U(x); };

  // Left connector: G(ε) = a(ε/2)^{1/d} + a·I1 + I2.
  {
    auto s = [&](double t) { return smoothstep((t - e2) / e2); };
    const double I1 = composite([&](double t) { return (1.0 - s(t)) * std::pow(t, -1.0 + q) / d; }, e2, eps);
    const double I2 = composite([&](double t) { return s(t) * std::pow(t, -2.0 + q) * Wb(t); }, e2, eps);
    dn.a_ = (G_exact(eps) - I2) / (std::pow(e2, q) + I1);
  }
  // Right connector: b·r1^{1/d} = G(1/ε) + J2 + b·J1.
  {
    auto s = [&](double t) { return smoothstep((t - r0) / eps); };
    const double J1 = composite([&](double t) { return s(t) * std::pow(t, -1.0 + q) / d; }, r0, r1);
    const double J2 = composite([&](double t) { return (1.0 - s(t)) * std::pow(t, -2.0 + q) * Wb(t); }, r0, r1);
    dn.b_ = (G_exact(r0) + J2) / (std::pow(r1, q) - J1);
  }
  if (!(dn.a_ > 0.0) || !(dn.b_ > 0.0) || !std::isfinite(dn.a_) || !std::isfinite(dn.b_)) {
    std::ostringstream os;
    os << "affine slopes a=" << dn.a_ << " b=" << dn.b_;
    throw Error(ErrorCode::connector_infeasible, os.str());
  }

  auto build = [&](DesingularizedNonlinearity::Table& tab, double x0, double x1, double G0, bool forward_psi,
                   double psi_anchor) {
    tab.x0 = x0;
    tab.hx = (x1 - x0) / table_cells;
    const std::size_t n = table_cells + 1;
    tab.G.assign(n, 0.0);
    tab.dG.assign(n, 0.0);
    tab.P.assign(n, 0.0);
    tab.dP.assign(n, 0.0);
    auto node = [&](std::size_t k) { return k == table_cells ? x1 : x0 + static_cast<double>(k) * tab.hx; };
    auto Gprime = [&](double t) { return std::pow(t, -2.0 + q) * dn.W(t); };
    tab.G[0] = G0;
    for (std::size_t k = 0; k < n; ++k) tab.dG[k] = Gprime(node(k));
    for (std::size_t k = 0; k + 1 < n; ++k) tab.G[k + 1] = tab.G[k] + Gauss::integrate(Gprime, node(k), node(k + 1));
    // U_ε on the connector from the G table, then ψ_ε' = U_ε'/x.
    auto Ue = [&](double t) { return std::pow(t, 1.0 - q) * tab.hermite(tab.G, tab.dG, t); };
    auto dpsi = [&](double t) { return (dn.W(t) + (1.0 - q) * Ue(t)) / (t * t); };
    for (std::size_t k = 0; k < n; ++k) tab.dP[k] = dpsi(node(k));
    if (forward_psi) {
      tab.P[0] = psi_anchor;
      for (std::size_t k = 0; k + 1 < n; ++k) tab.P[k + 1] = tab.P[k] + Gauss::integrate(dpsi, node(k), node(k + 1));
    } else {
      tab.P[n - 1] = psi_anchor;
      for (std::size_t k = n - 1; k > 0; --k) tab.P[k - 1] = tab.P[k] - Gauss::integrate(dpsi, node(k - 1), node(k));
    }
  };
  build(dn.left_, e2, eps, dn.a_ * std::pow(e2, q), false, nl.psi(eps));
  build(dn.right_, r0, r1, G_exact(r0), true, nl.psi(r0));

  // Validation: log grid through all regions plus dense points in both
  // connectors.
  std::vector<double> xs = log_grid(eps / 8.0, 8.0 * r1, 8000);
  for (int k = 0; k <= 1000; ++k) {
    xs.push_back(e2 + (eps - e2) * k / 1000.0);
    xs.push_back(r0 + (r1 - r0) * k / 1000.0);
  }
  dn.m_ = std::numeric_limits<double>::infinity();
  dn.M_ = 0.0;
  for (double x : xs) {
    const double w = dn.W(x), du = dn.dU(x);
    if (w < -1e-13 * (1.0 + std::abs(dn.U(x))) || !(du > 0.0) || !std::isfinite(du)) {
      std::ostringstream os;
      os << "W_eps=" << w << " U_eps'=" << du << " at x=" << x;
      throw Error(ErrorCode::connector_infeasible, os.str());
    }
    dn.m_ = std::min(dn.m_, du);
    dn.M_ = std::max(dn.M_, du);
  }
  dn.m_ = std::min({dn.m_, dn.a_, dn.b_});
  dn.M_ = std::max({dn.M_, dn.a_, dn.b_});
  return dn;
}

double choose_epsilon(double eps0, const Field& u0, const Field& v) {
  double e = eps0;
  for (const Field* f : {&u0, &v}) {
    const double lo = f->min(), hi = f->max();
    if (lo > 0.0) e = std::min(e, 0.5 * lo);
    if (hi > 0.0) e = std::min(e, 0.5 / hi);
  }
  return 0.5 * e;
}

}  // namespace entroflow
