#include "entroflow/inequalities.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "entroflow/error.hpp"
#include "entroflow/summation.hpp"

namespace entroflow {

EntropyInequalityReport verify_entropy_inequality(const Nonlinearity& nl, const Potential& pot,
                                                  const ExtremalProfile& v, const Field& u, double tolerance,
                                                  bool allow_advisory) {
  EntropyInequalityReport rep;
  rep.tolerance = tolerance;
  const HypothesisReport hyp = check_hypothesis_U(nl, log_grid(1e-6, 1e6, 481));
  rep.hypotheses_ok = hyp.satisfied && v.v.all_finite() && pot.dim() == nl.dim();
  if (!rep.hypotheses_ok && !allow_advisory) {
    std::ostringstream os;
    os << nl.describe() << ": U2 + U/d reaches " << hyp.worst_value << " at x = " << hyp.worst_point;
    throw Error(ErrorCode::hypothesis_violation, os.str());
  }
  rep.numbers = deficit(nl, pot, v, u, pot.convexity());
  rep.advisory = !rep.hypotheses_ok;
  if (!rep.advisory) rep.pass = rep.numbers.deficit >= -tolerance * (1.0 + std::abs(rep.numbers.rhs));
  return rep;
}

Field rescale(const Field& u, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw Error(ErrorCode::parameter_out_of_range, "lambda must be positive");
  if (lambda == 1.0) return u;
  const Domain& dom = u.domain();
  const int d = dom.dim();
  for (int a = 0; a < d; ++a)
    if (dom.cells(a) < 4) throw Error(ErrorCode::invalid_argument, "rescale needs at least 4 cells per axis");

  // Whether u is negligible next to each face (values mapped past it read 0).
  const double umax = u.max_abs();
  std::array<bool, 2 * max_dim> negligible{};
  for (const Face& f : dom.faces()) {
    double m = 0.0;
    for (std::size_t k = 0; k < dom.size(); ++k) {
      const CellIndex idx = dom.multi_index(k);
      if (idx[f.axis] == (f.upper ? dom.cells(f.axis) - 1 : 0)) m = std::max(m, std::abs(u[k]));
    }
    negligible[static_cast<std::size_t>(2 * f.axis + (f.upper ? 1 : 0))] = m <= 1e-10 * umax;
  }

  const double jac = std::pow(lambda, d);
  Field out(dom);
  for (std::size_t k = 0; k < dom.size(); ++k) {
    const Point x = dom.center(k);
    std::array<std::array<double, 4>, max_dim> w{};
    CellIndex base{0, 0, 0};
    bool outside = false;
    for (int a = 0; a < d; ++a) {
      const double y = lambda * x[a];
      if (y < dom.lower(a) || y > dom.upper(a)) {
        const Face f{a, y > dom.upper(a)};
        if (!negligible[static_cast<std::size_t>(2 * a + (f.upper ? 1 : 0))])
          throw Error(ErrorCode::support_escapes_box, "rescaled support leaves the box");
        outside = true;
        break;
      }
      const double s = (y - dom.lower(a)) / dom.spacing(a) - 0.5;
      const int b = std::clamp(static_cast<int>(std::floor(s)) - 1, 0, dom.cells(a) - 4);
      base[a] = b;
      for (int i = 0; i < 4; ++i) {
        double l = 1.0;
        for (int j = 0; j < 4; ++j)
          if (j != i) l *= (s - (b + j)) / static_cast<double>(i - j);
        w[a][static_cast<std::size_t>(i)] = l;
      }
    }
    if (outside) continue;
    double acc = 0.0;
    const int n1 = d > 1 ? 4 : 1, n2 = d > 2 ? 4 : 1;
    for (int k2 = 0; k2 < n2; ++k2)
      for (int k1 = 0; k1 < n1; ++k1)
        for (int k0 = 0; k0 < 4; ++k0) {
          double ww = w[0][static_cast<std::size_t>(k0)];
          if (d > 1) ww *= w[1][static_cast<std::size_t>(k1)];
          if (d > 2) ww *= w[2][static_cast<std::size_t>(k2)];
          acc += ww * u[dom.flat_index({base[0] + k0, base[1] + k1, base[2] + k2})];
        }
    out[k] = jac * acc;
  }
  return out;
}

double fisher_information(const Field& u) {
  const Field lu = u.map([](double x) { return x > 0.0 ? std::log(x) : 0.0; });
  const VectorField g = support_gradient(lu, u);
  CompensatedSum s;
  for (std::size_t i = 0; i < u.size(); ++i) {
    double r2 = 0.0;
    for (const Field& c : g) r2 += c[i] * c[i];
    s.add(u[i] * r2);
  }
  return s.value() * u.domain().cell_volume();
}

double lp_integral(const Field& f, double p) {
  CompensatedSum s;
  for (double x : f.values()) s.add(std::pow(std::abs(x), p));
  return s.value() * f.domain().cell_volume();
}

TraceLogSobReport trace_logsob_report(const Field& u, double h) {
  const Domain& dom = u.domain();
  if (!u.all_positive()) throw Error(ErrorCode::negative_value, "trace log-Sobolev needs u > 0");
  require_mass_match(integrate(u), 1.0);
  TraceLogSobReport r;
  r.h = h;
  r.d = dom.dim();
  r.lhs = integrate(u.map([](double x) { return x * std::log(x); }));
  r.fisher = fisher_information(u);
  r.trace = trace_integrate(u, bottom_face(dom));
  r.gaussian_mass = gaussian_halfspace_mass(-h);
  r.normalizer = gaussian_normalizer(h, r.d);
  r.pre_rhs = -r.d - std::log(r.normalizer) + 0.5 * r.fisher - h * r.trace;
  r.pre_deficit = r.pre_rhs - r.lhs;
  r.lambda = std::pow(r.fisher / r.d, -0.5);
  r.rhs = trace_logsob_rhs(r, r.lambda);
  r.deficit = r.rhs - r.lhs;
  r.grid = dom.describe();
  return r;
}

double trace_logsob_rhs(const TraceLogSobReport& r, double lambda) {
  // Pre-rescaled bound applied to λ^d u(λ·), written back in terms of u.
  return -r.d - std::log(r.normalizer) + 0.5 * lambda * lambda * r.fisher - r.d * std::log(lambda) -
         r.h * lambda * r.trace;
}

TraceGnsReport trace_gns_report(const Field& u, double alpha, double h) {
  if (!(alpha > 1.0)) throw Error(ErrorCode::parameter_out_of_range, "trace GNS needs alpha > 1");
  const Domain& dom = u.domain();
  for (double x : u.values())
    if (x < 0.0) throw Error(ErrorCode::negative_value, "trace GNS needs u >= 0");
  require_mass_match(integrate(u), 1.0);

  const int d = dom.dim();
  const Nonlinearity nl = make_nonlinearity(Family::power_convex, alpha, d);
  const Potential pot = make_shifted_quadratic(0.0, h, 1.0, d);
  const ExtremalProfile v = extremal_profile(nl, pot, dom, 1.0);

  TraceGnsReport r;
  r.alpha = alpha;
  r.h = h;
  r.d = d;
  r.delta = d * (alpha - 1.0) + 1.0;
  r.theta = gns_theta(alpha, d);
  r.A = 1.0 / (alpha - 1.0) + d;
  r.D = alpha / ((2.0 * alpha - 1.0) * (2.0 * alpha - 1.0));
  r.beta = v.beta;
  r.B = integrate(v.v.map([&](double x) { return x * (alpha * v.beta - std::pow(x, alpha - 1.0)); }));

  const Field w = u.map([&](double x) { return std::pow(x, alpha - 0.5); });
  const VectorField gw = support_gradient(w, u);
  r.gradient = integrate(gamma(gw, gw));
  r.trace = trace_integrate(u.map([&](double x) { return std::pow(x, alpha); }), bottom_face(dom));
  r.lhs = r.A * lp_integral(u, alpha);
  r.rhs = r.B - h * r.trace + r.D * r.gradient;
  r.deficit = r.rhs - r.lhs;

  const double k = r.B * (r.delta - 1.0) / (r.D * (r.delta + 1.0));
  r.lambda = std::pow(k / r.gradient, 1.0 / (2.0 * r.delta));
  r.rhs_rescaled = r.B * std::pow(r.lambda, 1.0 - r.delta) - h * r.lambda * r.trace +
                   r.D * std::pow(r.lambda, r.delta + 1.0) * r.gradient;
  r.deficit_rescaled = r.rhs_rescaled - r.lhs;
  r.a_h = r.B * std::pow(k, (1.0 - r.delta) / (2.0 * r.delta)) + r.D * std::pow(k, (r.delta + 1.0) / (2.0 * r.delta));
  r.b_h = std::pow(k, 1.0 / (2.0 * r.delta));
  r.grid = dom.describe();
  return r;
}

double gns_theta(double alpha, int d) {
  const double delta = d * (alpha - 1.0) + 1.0;
  return (1.0 - 1.0 / delta) * (1.0 - 1.0 / (2.0 * alpha));
}

double gns_extremizer(double alpha, const Point& x, int d) {
  double r2 = 0.0;
  for (int a = 0; a < d; ++a) r2 += x[a] * x[a];
  if (r2 >= 1.0) return 0.0;
  return std::pow(1.0 - r2, (2.0 * alpha - 1.0) / (2.0 * (alpha - 1.0)));
}

double gns_constant(double alpha, int d, int cells) {
  if (!(alpha > 1.0)) throw Error(ErrorCode::parameter_out_of_range, "GNS constant needs alpha > 1");
  const Domain dom = Domain::half_space(d, 1.25, cells);
  const double p = (2.0 * alpha - 1.0) / (2.0 * (alpha - 1.0));
  const Field f = Field::from_function(dom, [&](const Point& x) { return gns_extremizer(alpha, x, d); });
  // |∇f|² = 4p²r²(1 − r²)^{2p−2} inside the ball.
  const Field g2 = Field::from_function(dom, [&](const Point& x) {
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) r2 += x[a] * x[a];
    if (r2 >= 1.0) return 0.0;
    return 4.0 * p * p * r2 * std::pow(1.0 - r2, 2.0 * p - 2.0);
  });
  const double theta = gns_theta(alpha, d);
  const double q = 2.0 * alpha / (2.0 * alpha - 1.0), r = 2.0 / (2.0 * alpha - 1.0);
  const double qn = std::pow(lp_integral(f, q), 1.0 / q);
  const double gn = std::sqrt(integrate(g2));
  const double rn = std::pow(lp_integral(f, r), 1.0 / r);
  return qn / (std::pow(gn, theta) * std::pow(rn, 1.0 - theta));
}

GnsReport verify_gns(const Field& f, double alpha, double C) {
  if (!(alpha > 1.0)) throw Error(ErrorCode::parameter_out_of_range, "GNS needs alpha > 1");
  for (double x : f.values())
    if (x < 0.0 || std::isnan(x)) throw Error(ErrorCode::negative_value, "GNS test function must be nonnegative");
  if (!(f.max() > 0.0)) throw Error(ErrorCode::zero_field, "GNS test function vanishes");
  GnsReport rep;
  rep.alpha = alpha;
  rep.d = f.domain().dim();
  rep.theta = gns_theta(alpha, rep.d);
  rep.C = C;
  const double q = 2.0 * alpha / (2.0 * alpha - 1.0), r = 2.0 / (2.0 * alpha - 1.0);
  rep.q_norm = std::pow(lp_integral(f, q), 1.0 / q);
  const VectorField g = support_gradient(f, f);
  rep.grad_norm = std::sqrt(integrate(gamma(g, g)));
  rep.r_norm = std::pow(lp_integral(f, r), 1.0 / r);
  const double denom = std::pow(rep.grad_norm, rep.theta) * std::pow(rep.r_norm, 1.0 - rep.theta);
  rep.quotient = rep.q_norm / denom;
  rep.rhs = C * denom;
  rep.deficit = rep.rhs - rep.q_norm;
  rep.rel_deficit = rep.deficit / rep.rhs;
  return rep;
}

double gns_quotient(const Field& f, double alpha) { return verify_gns(f, alpha, 1.0).quotient; }

}  // namespace entroflow
