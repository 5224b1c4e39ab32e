#include <cmath>
#include <numbers>

#include "doctest.h"

#include "entroflow/error.hpp"
#include "entroflow/inequalities.hpp"
#include "entroflow/random_fields.hpp"

using namespace entroflow;

namespace {

// ‖f‖_{4/3}/(‖f'‖₂^{3/8}‖f‖_{2/3}^{5/8}) on x ≥ 0 for f = (1 − x²)₊^{3/2}: every
// integral is a polynomial one, ∫f^{4/3} = 8/15, ∫f^{2/3} = 2/3, ∫f'² = 6/5.
double gns_closed_form_alpha2_d1() {
  const double q = std::pow(8.0 / 15.0, 3.0 / 4.0);
  const double g = std::sqrt(6.0 / 5.0);
  const double r = std::pow(2.0 / 3.0, 3.0 / 2.0);
  return q / (std::pow(g, 3.0 / 8.0) * std::pow(r, 5.0 / 8.0));
}

// Same quotient for (1 − x²)₊ through Beta functions.
double gns_quotient_parabola() {
  const double i43 = 0.5 * std::beta(0.5, 4.0 / 3.0 + 1.0);
  const double i23 = 0.5 * std::beta(0.5, 2.0 / 3.0 + 1.0);
  return std::pow(i43, 3.0 / 4.0) / (std::pow(std::sqrt(4.0 / 3.0), 3.0 / 8.0) * std::pow(i23, 15.0 / 16.0));
}

Field unit_gaussian(const Domain& dom, double h, double c) {
  Field u = Field::from_function(dom, [&](const Point& x) {
    double r2 = 0.0;
    for (int a = 0; a < dom.dim(); ++a) {
      const double y = a + 1 == dom.dim() ? x[a] + h : x[a];
      r2 += y * y;
    }
    return std::exp(-c * r2);
  });
  u *= 1.0 / integrate(u);
  return u;
}

}  // namespace

TEST_CASE("entropy inequality verifier") {
  const Domain dom = Domain::half_space(2, 10.0, 96);
  const Nonlinearity nl = make_nonlinearity(Family::power_concave, 0.75, 2);
  const Potential pot = make_shifted_quadratic(0.0, 0.2, 1.0, 2);
  const ExtremalProfile v = extremal_profile(nl, pot, dom, 1.0);
  const EntropyInequalityReport eq = verify_entropy_inequality(nl, pot, v, v.v);
  CHECK(std::abs(eq.numbers.deficit) < 1e-12);
  CHECK(eq.pass.value());
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const EntropyInequalityReport r = verify_entropy_inequality(nl, pot, v, random_bumps(dom, seed));
    CHECK(r.numbers.deficit >= -1e-8 * (1 + std::abs(r.numbers.rhs)));
    CHECK(r.pass.value());
  }

  const Domain d3 = Domain::half_space(3, 6.0, 24);
  const Nonlinearity sob = make_nonlinearity(Family::sobolev, 0.0, 3);
  const Potential p3 = make_shifted_quadratic(0.0, 0.0, 1.0, 3);
  const ExtremalProfile v3 = extremal_profile(sob, p3, d3, 1.0);
  CHECK(verify_entropy_inequality(sob, p3, v3, random_bumps(d3, 5)).numbers.deficit >= 0.0);

  const Nonlinearity off = make_nonlinearity(Family::power_concave, 0.4, 2, WindowPolicy::unchecked);
  const ExtremalProfile voff = extremal_profile(off, pot, dom, 1.0);
  CHECK_THROWS_AS(verify_entropy_inequality(off, pot, voff, voff.v), Error);
  const EntropyInequalityReport adv = verify_entropy_inequality(off, pot, voff, voff.v, 1e-8, true);
  CHECK(adv.advisory);
  CHECK_FALSE(adv.pass.has_value());
  CHECK_FALSE(adv.hypotheses_ok);
}

TEST_CASE("rescale") {
  const Domain dom = Domain::half_space(1, 12.0, 2048);
  const Field u = unit_gaussian(dom, 0.0, 0.5);
  const Field same = rescale(u, 1.0);
  for (std::size_t i = 0; i < u.size(); ++i) CHECK(same[i] == doctest::Approx(u[i]).epsilon(1e-14));
  const Field u2 = rescale(u, 2.0);
  CHECK(integrate(u2) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(fisher_information(u2) == doctest::Approx(4.0 * fisher_information(u)).epsilon(1e-6));

  const Domain d2 = Domain::half_space(2, 8.0, 256);
  const Field g = unit_gaussian(d2, 0.0, 0.5);
  const Field g2 = rescale(g, 2.0);
  CHECK(fisher_information(g2) == doctest::Approx(4.0 * fisher_information(g)).epsilon(1e-6));

  const Field wide = Field(dom, 1.0);
  try {
    rescale(wide, 2.0);
    FAIL("no exception");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::support_escapes_box);
  }
}

TEST_CASE("trace log-Sobolev") {
  const Domain dom = Domain::half_space(1, 10.0, 8192);
  for (double h : {-0.5, 0.0, 0.5}) {
    const TraceLogSobReport r = trace_logsob_report(unit_gaussian(dom, h, 0.5), h);
    CAPTURE(h);
    CHECK(std::abs(r.pre_deficit) <= 1e-6);
    CHECK(r.deficit >= -1e-8);
    CHECK(r.gaussian_mass == doctest::Approx(0.5 * std::erfc(h / std::sqrt(2.0))).epsilon(1e-14));
    CHECK(r.lambda == doctest::Approx(std::pow(r.fisher / r.d, -0.5)));
  }
  // h = 0: no trace term in the bound.
  const TraceLogSobReport r0 = trace_logsob_report(random_bumps(dom, 3), 0.0);
  CHECK(r0.trace > 0.0);
  CHECK(r0.pre_rhs == doctest::Approx(-1.0 - std::log(std::sqrt(2 * std::numbers::pi) * 0.5) + 0.5 * r0.fisher));
  CHECK(trace_logsob_rhs(r0, r0.lambda) == doctest::Approx(r0.rhs));
  for (double lam : {0.5, 0.9, 1.3, 2.0}) CHECK(trace_logsob_rhs(r0, lam) >= r0.rhs - 1e-12);
  for (std::uint64_t seed = 0; seed < 100; ++seed)
    for (double h : {-0.5, 0.0, 0.5}) {
      const TraceLogSobReport r = trace_logsob_report(random_bumps(dom, seed), h);
      CHECK(r.deficit >= -1e-8 * (1 + std::abs(r.rhs)));
      CHECK(r.pre_deficit >= -1e-8 * (1 + std::abs(r.pre_rhs)));
    }

  // The candidate written with exp(−‖x+he‖²) is not an equality case.
  const TraceLogSobReport st = trace_logsob_report(unit_gaussian(dom, 0.5, 1.0), 0.5);
  CHECK(st.pre_deficit > 1e-3);
}

TEST_CASE("trace GNS constants") {
  CHECK(gns_theta(2.0, 1) == doctest::Approx(3.0 / 8.0).epsilon(1e-15));
  const Domain dom = Domain::half_space(1, 3.0, 8192);
  const Nonlinearity nl = make_nonlinearity(Family::power_convex, 2.0, 1);
  const ExtremalProfile v = extremal_profile(nl, make_shifted_quadratic(0.0, 0.0, 1.0, 1), dom, 1.0);
  const TraceGnsReport r = trace_gns_report(v.v, 2.0, 0.0);
  CHECK(r.delta == 2.0);
  CHECK(r.theta == doctest::Approx(3.0 / 8.0));
  CHECK(r.A == doctest::Approx(2.0));
  CHECK(r.D == doctest::Approx(2.0 / 9.0));
  // B = ∫v(2β − v) with v = (β − x²)₊, β = (3/2)^{2/3}
  const double beta = std::pow(1.5, 2.0 / 3.0);
  CHECK(r.B == doctest::Approx(2 * beta - 8.0 / 15.0 * std::pow(beta, 2.5)).epsilon(1e-6));
  CHECK(std::abs(r.deficit) <= 1e-5);
  const double k = r.B * (r.delta - 1) / (r.D * (r.delta + 1));
  CHECK(r.a_h == doctest::Approx(r.B * std::pow(k, (1 - r.delta) / (2 * r.delta)) +
                                 r.D * std::pow(k, (r.delta + 1) / (2 * r.delta))));
  CHECK(r.b_h == doctest::Approx(std::pow(k, 1 / (2 * r.delta))));
  // At h = 0 the rescaled form is the λ-optimum of the intermediate one.
  CHECK(r.deficit_rescaled <= r.deficit + 1e-12);
}

TEST_CASE("trace GNS equality converges under refinement") {
  auto residual = [](int n, double h) {
    const Domain dom = Domain::half_space(1, 3.0, n);
    const Nonlinearity nl = make_nonlinearity(Family::power_convex, 2.0, 1);
    const ExtremalProfile v = extremal_profile(nl, make_shifted_quadratic(0.0, h, 1.0, 1), dom, 1.0);
    return std::abs(trace_gns_report(v.v, 2.0, h).deficit);
  };
  for (double h : {-0.3, 0.0, 0.3}) {
    const double r1 = residual(2048, h), r2 = residual(4096, h);
    CHECK(std::log2(r1 / r2) >= 1.0);
  }
}

TEST_CASE("GNS constant") {
  const double oracle = gns_closed_form_alpha2_d1();
  CHECK(oracle == doctest::Approx(0.8820396691605533).epsilon(1e-14));
  CHECK(gns_constant(2.0, 1, 16384) == doctest::Approx(oracle).epsilon(1e-8));

  const Domain dom = Domain::half_space(1, 8.0, 8192);
  const Field f = Field::from_function(dom, [](const Point& x) { return gns_extremizer(2.0, x, 1); });
  const GnsReport eq = verify_gns(f, 2.0, oracle);
  CHECK(std::abs(eq.rel_deficit) <= 1e-5);
  CHECK(gns_quotient(f * 2.0, 2.0) == doctest::Approx(gns_quotient(f, 2.0)).epsilon(1e-12));

  const Field gauss = Field::from_function(dom, [](const Point& x) { return std::exp(-x[0] * x[0]); });
  const GnsReport g = verify_gns(gauss, 2.0, oracle);
  CHECK(g.deficit > 0.0);
  CHECK(g.rel_deficit == doctest::Approx(0.0602564).epsilon(1e-5));

  // The profile (1 − x²)₊ itself is not extremal.
  const Field para = Field::from_function(dom, [](const Point& x) { return std::max(0.0, 1 - x[0] * x[0]); });
  CHECK(gns_quotient(para, 2.0) == doctest::Approx(gns_quotient_parabola()).epsilon(1e-5));
  CHECK(gns_quotient_parabola() < oracle - 1e-2);

  BumpOptions opt;
  opt.mass = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed)
    CHECK(gns_quotient(random_bumps(dom, seed, opt), 2.0) <= oracle * (1 + 1e-6));

  CHECK_THROWS_AS(verify_gns(Field(dom, 0.0), 2.0, oracle), Error);
  Field neg = f;
  neg[3] = -1.0;
  CHECK_THROWS_AS(verify_gns(neg, 2.0, oracle), Error);
}
