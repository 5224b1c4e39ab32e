#include "entroflow/potential.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "entroflow/error.hpp"

namespace entroflow {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

}  // namespace

Potential make_shifted_quadratic(double a, double h, double scale, int dim) {
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw Error(ErrorCode::parameter_out_of_range, "potential scale must be positive");
  if (dim < 1 || dim > max_dim) throw Error(ErrorCode::parameter_out_of_range, "dimension must be 1, 2 or 3");
  Potential p;
  p.dim_ = dim;
  p.offset_ = a;
  p.shift_ = h;
  p.scale_ = scale;
  p.convexity_ = 2.0 * scale;
  p.quadratic_ = true;
  return p;
}

Potential make_custom_potential(std::function<double(const Point&)> value,
                                std::function<Point(const Point&)> gradient, double convexity, int dim) {
  if (!value || !gradient) throw Error(ErrorCode::invalid_argument, "custom potential needs value and gradient");
  if (!(convexity > 0.0)) throw Error(ErrorCode::parameter_out_of_range, "convexity constant must be positive");
  Potential p;
  p.dim_ = dim;
  p.convexity_ = convexity;
  p.quadratic_ = false;
  p.value_ = std::move(value);
  p.gradient_ = std::move(gradient);
  return p;
}

double Potential::value(const Point& x) const {
  if (!quadratic_) return value_(x);
  double r2 = 0.0;
  for (int a = 0; a < dim_; ++a) {
    const double y = a + 1 == dim_ ? x[a] + shift_ : x[a];
    r2 += y * y;
  }
  return offset_ + scale_ * r2;
}

Point Potential::gradient(const Point& x) const {
  if (!quadratic_) return gradient_(x);
  Point g{};
  for (int a = 0; a < dim_; ++a) g[a] = 2.0 * scale_ * (a + 1 == dim_ ? x[a] + shift_ : x[a]);
  return g;
}

Field Potential::sample(const Domain& domain) const {
  if (domain.dim() != dim_) throw Error(ErrorCode::dimension_mismatch, "potential and domain dimensions differ");
  return Field::from_function(domain, [&](const Point& x) { return value(x); });
}

Field Potential::sample_gradient(const Domain& domain, int axis) const {
  if (domain.dim() != dim_) throw Error(ErrorCode::dimension_mismatch, "potential and domain dimensions differ");
  return Field::from_function(domain, [&](const Point& x) { return gradient(x)[axis]; });
}

double Potential::bottom_normal_derivative(const Point& x) const { return -gradient(x)[dim_ - 1]; }

std::string Potential::describe() const {
  std::ostringstream os;
  if (quadratic_) {
    os << "V=" << offset_ << "+" << scale_ << "|x+" << shift_ << "e|^2";
  } else {
    os << "custom V (C=" << convexity_ << ")";
  }
  return os.str();
}

double solve_normalizer(const std::function<double(double)>& mass_at, double target_mass, double guess) {
  double lo = guess, hi = guess;
  double step = 1.0;
  int expansions = 0;
  while (mass_at(hi) < target_mass) {
    lo = hi;
    hi += step;
    step *= 2.0;
    if (++expansions > 1100 || !std::isfinite(hi))
      throw Error(ErrorCode::bracket_failure, "no beta reaches the target mass (box too small?)");
  }
  step = 1.0;
  while (!(mass_at(lo) <= target_mass)) {
    hi = lo;
    lo -= step;
    step *= 2.0;
    if (++expansions > 2200 || !std::isfinite(lo))
      throw Error(ErrorCode::bracket_failure, "no beta gives a mass below the target");
  }
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (mass_at(mid) < target_mass) lo = mid; else hi = mid;
  }
  // Endpoint whose mass is closest to the target.
  const double mlo = mass_at(lo), mhi = mass_at(hi);
  return std::abs(mlo - target_mass) <= std::abs(mhi - target_mass) ? lo : hi;
}

Field profile_for_beta(const Nonlinearity& nl, const Field& V, double beta) {
  return V.map([&](double vx) { return nl.inverse(beta - vx); });
}

ExtremalProfile extremal_profile(const Nonlinearity& nl, const Potential& pot, const Domain& domain,
                                 double target_mass) {
  if (!(target_mass > 0.0) || !std::isfinite(target_mass))
    throw Error(ErrorCode::parameter_out_of_range, "target mass must be positive");
  const Field V = pot.sample(domain);

  auto mass_at = [&](double beta) {
    const Field v = profile_for_beta(nl, V, beta);
    if (!v.all_finite()) return inf;
    return integrate(v);
  };

  double guess = V.min();
  if (std::isfinite(nl.psi(1.0))) guess += nl.psi(1.0);
  const double beta = solve_normalizer(mass_at, target_mass, guess);

  ExtremalProfile prof{profile_for_beta(nl, V, beta), beta, 0.0};
  prof.mass = integrate(prof.v);
  if (!prof.v.all_finite() || !(prof.mass > 0.0))
    throw Error(ErrorCode::bracket_failure, "profile normalization failed");

  if (std::isfinite(nl.psi_at_zero())) {
    for (std::size_t k = 0; k < domain.size(); ++k) {
      if (prof.v[k] <= 0.0) continue;
      const CellIndex idx = domain.multi_index(k);
      for (int a = 0; a < domain.dim(); ++a) {
        const bool lower = idx[a] == 0 && domain.face_kind(Face{a, false}) == FaceKind::truncation;
        const bool upper = idx[a] == domain.cells(a) - 1 && domain.face_kind(Face{a, true}) == FaceKind::truncation;
        if (lower || upper)
          throw Error(ErrorCode::support_escapes_box, "compactly supported profile reaches a truncation face");
      }
    }
  }
  return prof;
}

double gaussian_halfspace_mass(double h) { return 0.5 * std::erfc(-h / std::numbers::sqrt2); }

double gaussian_normalizer(double h, int dim) {
  return std::pow(2.0 * std::numbers::pi, 0.5 * dim) * gaussian_halfspace_mass(-h);
}

}  // namespace entroflow
