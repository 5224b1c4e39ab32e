#include "entroflow/nonlinearity.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "entroflow/error.hpp"

namespace entroflow {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

}  // namespace

std::string to_string(Family f) {
  switch (f) {
    case Family::boltzmann: return "boltzmann";
    case Family::power_concave: return "power-concave";
    case Family::power_convex: return "power-convex";
    case Family::sobolev: return "sobolev";
    case Family::custom: return "custom";
  }
  return "unknown";
}

Family parse_family(const std::string& name) {
  if (name == "boltzmann") return Family::boltzmann;
  if (name == "power-concave") return Family::power_concave;
  if (name == "power-convex") return Family::power_convex;
  if (name == "sobolev") return Family::sobolev;
  throw Error(ErrorCode::invalid_argument, "unknown nonlinearity family '" + name + "'");
}

Nonlinearity make_nonlinearity(Family family, double alpha, int dim, WindowPolicy policy) {
  if (dim < 1) throw Error(ErrorCode::parameter_out_of_range, "dimension must be positive");
  const bool check = policy == WindowPolicy::enforce;
  Nonlinearity nl;
  nl.family_ = family;
  nl.dim_ = dim;
  switch (family) {
    case Family::boltzmann:
      nl.alpha_ = 1.0;
      nl.psi0_ = -inf;
      nl.psi_inf_ = inf;
      break;
    case Family::power_convex:
      if (!(alpha > 1.0) || !std::isfinite(alpha))
        throw Error(ErrorCode::parameter_out_of_range, "power-convex needs alpha > 1");
      nl.alpha_ = alpha;
      nl.psi0_ = 0.0;
      nl.psi_inf_ = inf;
      break;
    case Family::power_concave: {
      const double lo = 1.0 - 1.0 / dim;
      if (!(alpha > 0.0 && alpha < 1.0))
        throw Error(ErrorCode::parameter_out_of_range, "power-concave needs 0 < alpha < 1");
      if (check && !(alpha > lo)) {
        std::ostringstream os;
        os << "power-concave needs alpha in (1-1/d, 1) = (" << lo << ", 1), got " << alpha;
        throw Error(ErrorCode::parameter_out_of_range, os.str());
      }
      nl.alpha_ = alpha;
      nl.psi0_ = -inf;
      nl.psi_inf_ = 0.0;
      break;
    }
    case Family::sobolev:
      if (dim < 2 || (check && dim < 3))
        throw Error(ErrorCode::parameter_out_of_range, "sobolev family needs d >= 3");
      nl.alpha_ = 1.0 - 1.0 / dim;
      nl.psi0_ = -inf;
      nl.psi_inf_ = 0.0;
      break;
    case Family::custom:
      throw Error(ErrorCode::invalid_argument, "use make_custom_nonlinearity for custom evaluators");
  }
  return nl;
}

double Nonlinearity::H(double x) const {
  if (x <= 0.0) return 0.0;
  const double a = alpha_;
  switch (family_) {
    case Family::boltzmann: return x * std::log(x) - x;
    case Family::power_convex: return std::pow(x, a) / (a * (a - 1.0));
    case Family::power_concave: return -std::pow(x, a) / a;
    case Family::sobolev: return -std::pow(x, a);
    case Family::custom: return custom_.H(x);
  }
  return 0.0;
}

double Nonlinearity::psi(double x) const {
  if (x <= 0.0) return psi0_;
  const double a = alpha_;
  switch (family_) {
    case Family::boltzmann: return std::log(x);
    case Family::power_convex: return std::pow(x, a - 1.0) / (a - 1.0);
    case Family::power_concave: return -std::pow(x, a - 1.0);
    case Family::sobolev: return -a * std::pow(x, a - 1.0);
    case Family::custom: return custom_.psi(x);
  }
  return 0.0;
}

double Nonlinearity::dpsi(double x) const {
  const double a = alpha_;
  switch (family_) {
    case Family::boltzmann: return 1.0 / x;
    case Family::power_convex: return std::pow(x, a - 2.0);
    case Family::power_concave: return (1.0 - a) * std::pow(x, a - 2.0);
    case Family::sobolev: return a * (1.0 - a) * std::pow(x, a - 2.0);
    case Family::custom: return custom_.dpsi(x);
  }
  return 0.0;
}

double Nonlinearity::U(double x) const {
  if (x <= 0.0) return 0.0;
  const double a = alpha_;
  switch (family_) {
    case Family::boltzmann: return x;
    case Family::power_convex: return std::pow(x, a) / a;
    case Family::power_concave: return (1.0 - a) * std::pow(x, a) / a;
    case Family::sobolev: return std::pow(x, a) / dim_;
    case Family::custom: return custom_.U(x);
  }
  return 0.0;
}

double Nonlinearity::dU(double x) const {
  const double a = alpha_;
  switch (family_) {
    case Family::boltzmann: return 1.0;
    case Family::power_convex: return std::pow(x, a - 1.0);
    case Family::power_concave: return (1.0 - a) * std::pow(x, a - 1.0);
    case Family::sobolev: return a * std::pow(x, a - 1.0) / dim_;
    case Family::custom: return custom_.dU(x);
  }
  return 0.0;
}

double Nonlinearity::U2(double x) const {
  if (x <= 0.0) return 0.0;
  const double a = alpha_;
  switch (family_) {
    case Family::boltzmann: return 0.0;
    case Family::power_convex: return (a - 1.0) * std::pow(x, a) / a;
    case Family::power_concave: return -(1.0 - a) * (1.0 - a) * std::pow(x, a) / a;
    // Written so that U₂ + U/d cancels exactly in floating point.
    case Family::sobolev: return -(std::pow(x, a) / dim_) / dim_;
    case Family::custom: return custom_.U2(x);
  }
  return 0.0;
}

double Nonlinearity::inverse(double t) const {
  if (std::isnan(t)) throw Error(ErrorCode::invalid_argument, "generalized inverse of NaN");
  if (t <= psi0_) return 0.0;
  if (t >= psi_inf_) return inf;
  const double a = alpha_;
  switch (family_) {
    case Family::boltzmann: return std::exp(t);
    case Family::power_convex: return std::pow((a - 1.0) * t, 1.0 / (a - 1.0));
    case Family::power_concave: return std::pow(-t, 1.0 / (a - 1.0));
    case Family::sobolev: return std::pow(-t / a, 1.0 / (a - 1.0));
    case Family::custom:
      return invert_increasing(custom_.psi, custom_.dpsi, t);
  }
  return 0.0;
}

std::string Nonlinearity::describe() const {
  std::ostringstream os;
  os << to_string(family_);
  if (family_ == Family::power_convex || family_ == Family::power_concave) os << "(alpha=" << alpha_ << ")";
  os << " d=" << dim_;
  return os.str();
}

Nonlinearity make_custom_nonlinearity(Evaluators ev, int dim, double psi_at_zero, double psi_at_inf) {
  if (!ev.H || !ev.psi || !ev.dpsi || !ev.U || !ev.dU || !ev.U2)
    throw Error(ErrorCode::invalid_argument, "custom nonlinearity needs all six evaluators");
  if (dim < 1) throw Error(ErrorCode::parameter_out_of_range, "dimension must be positive");
  if (!(psi_at_zero < psi_at_inf))
    throw Error(ErrorCode::inconsistent_evaluators, "psi(0+) must lie below psi(+inf)");

  auto fail = [](const char* what, double x) {
    std::ostringstream os;
    os << what << " at x=" << x;
    throw Error(ErrorCode::inconsistent_evaluators, os.str());
  };
  for (double x : log_grid(1e-3, 1e3, 241)) {
    const double H = ev.H(x), p = ev.psi(x), dp = ev.dpsi(x), U = ev.U(x), dU = ev.dU(x), U2 = ev.U2(x);
    if (!(dp > 0.0)) fail("psi' not positive", x);
    if (std::abs(U - (x * p - H)) > 1e-10 * (1.0 + std::abs(H) + std::abs(x * p))) fail("U != x psi - H", x);
    if (std::abs(U2 - (x * dU - U)) > 1e-10 * (1.0 + std::abs(U) + std::abs(x * dU))) fail("U2 != x U' - U", x);
    if (std::abs(dU - x * dp) > 1e-8 * (1.0 + std::abs(dU))) fail("U' != x psi'", x);
    const double s = 1e-4 * x;
    const double fd = (ev.psi(x + s) - ev.psi(x - s)) / (2.0 * s);
    if (std::abs(fd - dp) > 1e-6 * (1.0 + std::abs(dp))) fail("psi' does not match dpsi/dx", x);
    if (U < -1e-12 * (1.0 + std::abs(H))) fail("U negative", x);
  }

  Nonlinearity nl;
  nl.family_ = Family::custom;
  nl.dim_ = dim;
  nl.alpha_ = 0.0;
  nl.psi0_ = psi_at_zero;
  nl.psi_inf_ = psi_at_inf;
  nl.custom_ = std::move(ev);
  return nl;
}

std::vector<double> log_grid(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2) throw Error(ErrorCode::invalid_argument, "log_grid needs 0 < lo < hi, n >= 2");
  std::vector<double> xs(static_cast<std::size_t>(n));
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < n; ++i) xs[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (n - 1));
  xs.front() = lo;
  xs.back() = hi;
  return xs;
}

HypothesisReport check_hypothesis_U(const Nonlinearity& nl, std::span<const double> samples) {
  if (samples.size() < 100) throw Error(ErrorCode::invalid_argument, "hypothesis check needs at least 100 samples");
  double lo = inf, hi = 0.0;
  for (double x : samples) {
    if (!(x > 0.0)) throw Error(ErrorCode::invalid_argument, "hypothesis samples must be positive");
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  if (hi / lo < 1e4) throw Error(ErrorCode::invalid_argument, "hypothesis samples must span 4 decades");

  HypothesisReport rep;
  rep.worst_value = inf;
  for (double x : samples) {
    const double U = nl.U(x);
    const double w = nl.U2(x) + U / nl.dim();
    if (w < -1e-12 * std::max(1.0, std::abs(U))) rep.satisfied = false;
    if (w < rep.worst_value) {
      rep.worst_value = w;
      rep.worst_point = x;
    }
  }
  std::ostringstream os;
  os << samples.size() << " points in [" << lo << ", " << hi << "]";
  rep.grid_spec = os.str();
  return rep;
}

double generalized_inverse(const Nonlinearity& nl, double t) { return nl.inverse(t); }

double invert_increasing(const std::function<double(double)>& f, const std::function<double(double)>& df,
                         double target, double guess) {
  if (!(guess > 0.0)) guess = 1.0;
  double lo = guess, hi = guess;
  if (f(guess) < target) {
    do {
      lo = hi;
      hi *= 2.0;
      if (!std::isfinite(hi)) return inf;
    } while (f(hi) < target);
  } else {
    do {
      hi = lo;
      lo *= 0.5;
      if (lo == 0.0) return 0.0;
    } while (f(lo) > target);
  }
  double x = hi / lo > 4.0 ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
  for (int it = 0; it < 400; ++it) {
    const double r = f(x) - target;
    if (r == 0.0) return x;
    if (r < 0.0) lo = x; else hi = x;
    if (hi - lo <= 1e-15 * hi) break;
    double next = std::numeric_limits<double>::quiet_NaN();
    if (df) {
      const double d = df(x);
      if (d > 0.0) next = x - r / d;
    }
    if (!(next > lo && next < hi)) next = hi / lo > 4.0 ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    // A Newton step that barely moves means we are within roundoff of the root.
    if (std::abs(next - x) <= 1e-15 * x) return next;
    x = next;
  }
  return 0.5 * (lo + hi);
}

}  // namespace entroflow
