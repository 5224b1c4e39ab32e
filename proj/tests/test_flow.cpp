#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"

#include "entroflow/error.hpp"
#include "entroflow/flow.hpp"
#include "entroflow/random_fields.hpp"

using namespace entroflow;

namespace {

double smoothstep(double t) {
  t = std::min(1.0, std::max(0.0, t));
  return 10 * std::pow(t, 3) - 15 * std::pow(t, 4) + 6 * std::pow(t, 5);
}

template <class F>
double simpson(F&& f, double a, double b, int n = 4000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
  return s * h / 3.0;
}

// Slopes of the affine pieces from G = x^{−(1−1/d)}U and G' = x^{−(2−1/d)}W.
std::pair<double, double> slope_oracle(const Nonlinearity& nl, double eps, int d) {
  const double p = 1.0 - 1.0 / d;
  auto W = [&](double x) { return nl.U2(x) + nl.U(x) / d; };
  auto G = [&](double x) { return std::pow(x, -p) * nl.U(x); };
  const double l0 = 0.5 * eps;
  const double ca = std::pow(l0, 1.0 - p) +
                    simpson([&](double x) { return (1 - smoothstep((x - l0) / l0)) * std::pow(x, -p) / d; }, l0, eps);
  const double ra = simpson([&](double x) { return smoothstep((x - l0) / l0) * std::pow(x, -p - 1) * W(x); }, l0, eps);
  const double r0 = 1.0 / eps, r1 = r0 + eps;
  const double cb = std::pow(r1, 1.0 - p) -
                    simpson([&](double x) { return smoothstep((x - r0) / eps) * std::pow(x, -p) / d; }, r0, r1);
  const double rb =
      G(r0) + simpson([&](double x) { return (1 - smoothstep((x - r0) / eps)) * std::pow(x, -p - 1) * W(x); }, r0, r1);
  return {(G(eps) - ra) / ca, rb / cb};
}

struct Boltzmann1d {
  Domain dom = Domain::half_space(1, 6.0, 128);
  Nonlinearity nl = make_nonlinearity(Family::boltzmann, 1.0, 1);
  ExtremalProfile v = extremal_profile(nl, make_shifted_quadratic(0.0, 0.0, 0.5, 1), dom, 1.0);
  DesingularizedNonlinearity dnl = desingularize(nl, 0.1, 1);
  FlowTarget target = target_from_profile(dnl, v.v);

  Field perturbed() const {
    Field u = Field::from_function(dom, [](const Point& x) { return 1.0 + 0.3 * std::cos(2 * std::numbers::pi * x[0] / 6.0); }) *
              v.v;
    u *= 1.0 / integrate(u);
    return u;
  }
};

}  // namespace

TEST_CASE("boltzmann needs no desingularization") {
  const DesingularizedNonlinearity d = desingularize(make_nonlinearity(Family::boltzmann, 1.0, 2), 0.1, 2);
  for (double x : {1e-8, 0.01, 1.0, 1e3}) CHECK(d.U(x) == x);
  CHECK(d.m() == 1.0);
  CHECK(d.M() == 1.0);
}

TEST_CASE("power-convex desingularization") {
  const Nonlinearity nl = make_nonlinearity(Family::power_convex, 2.0, 1);
  const DesingularizedNonlinearity d = desingularize(nl, 0.1, 1);
  CHECK(d.U(0.5) == 0.125);
  CHECK(d.U(0.5) == nl.U(0.5));
  CHECK(d.left_begin() == doctest::Approx(0.05));
  const double a = d.left_slope();
  CHECK(a > 0.0);
  for (double x : {1e-6, 0.01, 0.03, 0.05}) CHECK(d.U(x) == doctest::Approx(a * x).epsilon(1e-14));
  CHECK(d.dU(0.05) == doctest::Approx(a).epsilon(1e-6));
  // joins
  for (double x : {0.05, 0.1, 10.0, 10.1}) {
    CHECK(d.U(x - 1e-9) == doctest::Approx(d.U(x + 1e-9)).epsilon(1e-7));
    CHECK(d.dU(x - 1e-9) == doctest::Approx(d.dU(x + 1e-9)).epsilon(1e-6));
  }
  CHECK(d.m() > 0.0);
  CHECK(d.M() >= d.m());
}

TEST_CASE("affine slopes agree with the G identity") {
  struct Case {
    Family f;
    double alpha;
    int d;
    double eps;
  };
  for (const Case& c : {Case{Family::power_convex, 2.0, 1, 0.1}, Case{Family::power_convex, 2.0, 2, 0.05},
                        Case{Family::power_concave, 0.75, 2, 0.1}, Case{Family::sobolev, 0.0, 3, 0.1}}) {
    const Nonlinearity nl = make_nonlinearity(c.f, c.alpha, c.d);
    const DesingularizedNonlinearity d = desingularize(nl, c.eps, c.d);
    const auto [a, b] = slope_oracle(nl, c.eps, c.d);
    CAPTURE(nl.describe());
    CHECK(d.left_slope() == doctest::Approx(a).epsilon(1e-8));
    CHECK(d.right_slope() == doctest::Approx(b).epsilon(1e-8));
  }
}

TEST_CASE("psi_eps inverse round trip") {
  const DesingularizedNonlinearity d = desingularize(make_nonlinearity(Family::power_concave, 0.75, 2), 0.1, 2);
  for (double x : log_grid(1e-4, 1e4, 81)) CHECK(d.inverse_psi(d.psi(x)) == doctest::Approx(x).epsilon(1e-10));
}

TEST_CASE("choose_epsilon") {
  const Domain dom = Domain::half_space(1, 1.0, 4);
  const Field u0(dom, std::vector<double>{0.2, 0.4, 1.0, 2.0});
  const Field v(dom, std::vector<double>{0.5, 0.5, 0.5, 0.5});
  CHECK(choose_epsilon(0.3, u0, v) == doctest::Approx(0.05));
  CHECK(choose_epsilon(0.01, u0, v) == doctest::Approx(0.005));
}

TEST_CASE("stationary data stay put") {
  const Boltzmann1d s;
  FlowConfig cfg;
  cfg.end_time = 0.5;
  cfg.snapshot_interval = 0.05;
  const FlowTrace tr = run_flow(s.dnl, s.target, s.v.v, cfg);
  for (std::size_t k = 0; k < tr.t.size(); ++k) {
    CHECK(tr.entropy[k] == doctest::Approx(tr.entropy.front()).epsilon(1e-13));
    CHECK(tr.production[k] < 1e-20);
  }
  try {
    fit_decay_rate(tr, 0.0, 0.5);
    FAIL("no exception");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::degenerate_window);
  }
}

TEST_CASE("stationary family") {
  const Boltzmann1d s;
  const Field v0 = stationary_family(s.dnl, s.v.v, 0.0);
  for (std::size_t i = 0; i < v0.size(); ++i) CHECK(v0[i] == doctest::Approx(s.v.v[i]).epsilon(1e-14));
  const Field lo = stationary_family(s.dnl, s.v.v, -0.2), hi = stationary_family(s.dnl, s.v.v, 0.2);
  for (std::size_t i = 0; i < lo.size(); ++i) CHECK(lo[i] < hi[i]);

  FlowConfig cfg;
  cfg.end_time = 0.3;
  cfg.require_mass_match = false;
  const FlowTrace tr = run_flow(s.dnl, s.target, hi, cfg);
  double res = 0.0;
  for (std::size_t i = 0; i < hi.size(); ++i) res = std::max(res, std::abs(tr.final_u[i] - hi[i]));
  const double step = s.dom.spacing(0);
  CHECK(res <= 10 * step * step);
}

TEST_CASE("flow conserves mass, dissipates entropy and decays at rate 2C") {
  const Boltzmann1d s;
  FlowConfig cfg;
  cfg.end_time = 4.0;
  cfg.snapshot_interval = 0.05;
  const FlowTrace tr = run_flow(s.dnl, s.target, s.perturbed(), cfg);
  CHECK(tr.max_step_mass_change <= 1e-14);
  CHECK(tr.max_step_entropy_increase <= 1e-12);
  for (std::size_t k = 1; k < tr.t.size(); ++k) CHECK(tr.entropy[k] <= tr.entropy[k - 1] + 1e-12);
  CHECK(fit_decay_rate(tr, 1.0, 4.0) >= 1.9);

  std::ostringstream os;
  write_trace_csv(tr, os);
  const std::string csv = os.str();
  CHECK(csv.rfind("t,mass,entropy,production\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(tr.t.size() + 1));
}

TEST_CASE("fit_decay_rate on an exact exponential") {
  FlowTrace tr;
  for (int k = 0; k <= 100; ++k) {
    tr.t.push_back(0.01 * k);
    tr.production.push_back(std::exp(-3.0 * 0.01 * k));
  }
  CHECK(fit_decay_rate(tr, 0.0, 1.0) == doctest::Approx(3.0).epsilon(1e-9));
  CHECK_THROWS_AS(fit_decay_rate(tr, 0.0, 0.05), Error);
}

TEST_CASE("comparison principle") {
  const Boltzmann1d s;
  FlowConfig cfg;
  cfg.end_time = 0.3;
  cfg.require_mass_match = false;
  const Field u = s.perturbed();
  const ComparisonReport same = check_comparison(s.dnl, s.target, u, u, cfg);
  CHECK(same.min_gap == 0.0);

  const Field lo = stationary_family(s.dnl, s.v.v, -0.2), hi = stationary_family(s.dnl, s.v.v, 0.2);
  const ComparisonReport st = check_comparison(s.dnl, s.target, lo, hi, cfg);
  CHECK(st.min_gap == doctest::Approx(st.initial_gap).epsilon(1e-3));

  const double step = s.dom.spacing(0);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Field u2 = stationary_family(s.dnl, s.v.v, -1.0) + random_bumps(s.dom, seed) * 0.5;
    const Field u1 = u2 * 0.9 + stationary_family(s.dnl, s.v.v, -1.0) * 0.1;
    CHECK(check_comparison(s.dnl, s.target, u1, u2, cfg).min_gap >= -10 * step * step);
  }
  CHECK_THROWS_AS(check_comparison(s.dnl, s.target, u * 1.1, u, cfg), Error);
}

TEST_CASE("second derivative of the entropy") {
  const Boltzmann1d s;
  FlowConfig cfg;
  cfg.end_time = 0.25;
  CHECK(std::abs(entropy_derivative(s.dnl, s.target, s.v.v)) < 1e-20);
  CHECK(std::abs(entropy_second_derivative(s.dnl, s.target, s.v.v)) < 1e-12);
  const SecondDerivativeReport r = check_second_derivative_identity(s.dnl, s.target, s.perturbed(), cfg, {0.05, 0.1, 0.2});
  REQUIRE(r.probes.size() == 3);
  CHECK(r.max_rel_error <= 0.02);
  for (const IdentityProbe& p : r.probes) CHECK(p.formula > 0.0);
  CHECK_THROWS_AS(check_second_derivative_identity(s.dnl, s.target, s.perturbed(), cfg, {0.0005}), Error);
}
