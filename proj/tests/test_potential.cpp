#include <cmath>
#include <numbers>

#include "doctest.h"

#include "entroflow/error.hpp"
#include "entroflow/potential.hpp"

using namespace entroflow;

namespace {

// Composite Simpson rule, independent of the library's quadrature.
template <class F>
double simpson(F&& f, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
  return s * h / 3.0;
}

double gauss_density(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

}  // namespace

TEST_CASE("gaussian_halfspace_mass") {
  CHECK(gaussian_halfspace_mass(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(gaussian_halfspace_mass(40.0) == doctest::Approx(1.0).epsilon(1e-15));
  const double oracle = simpson(gauss_density, -1.0, 40.0);
  CHECK(oracle == doctest::Approx(0.841344746).epsilon(1e-9));
  CHECK(gaussian_halfspace_mass(1.0) == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(gaussian_halfspace_mass(-0.7) == doctest::Approx(simpson(gauss_density, 0.7, 40.0)).epsilon(1e-12));
  for (double h : {-0.5, 0.0, 0.5})
    CHECK(gaussian_normalizer(h, 2) ==
          doctest::Approx(2 * std::numbers::pi * simpson(gauss_density, h, 40.0)).epsilon(1e-12));
}

TEST_CASE("shifted quadratic potential") {
  const Potential V = make_shifted_quadratic(0.3, 0.5, 2.0, 2);
  const Point x{0.4, 1.1, 0.0};
  CHECK(V.value(x) == doctest::Approx(0.3 + 2.0 * (0.16 + 1.6 * 1.6)));
  const Point g = V.gradient(x);
  CHECK(g[0] == doctest::Approx(4.0 * 0.4));
  CHECK(g[1] == doctest::Approx(4.0 * 1.6));
  CHECK(V.convexity() == 4.0);
  CHECK(V.bottom_normal_derivative(Point{0.1, 0.0, 0.0}) == doctest::Approx(-4.0 * 0.5));
  CHECK_THROWS_AS(make_shifted_quadratic(0.0, 0.0, -1.0, 1), Error);
}

TEST_CASE("boltzmann profile normalizer matches the Gaussian integral") {
  const Nonlinearity nl = make_nonlinearity(Family::boltzmann, 1.0, 1);
  const Domain dom = Domain::half_space(1, 12.0, 8192);
  for (double h : {-0.5, 0.0, 0.5}) {
    const ExtremalProfile v = extremal_profile(nl, make_shifted_quadratic(0.0, h, 0.5, 1), dom, 1.0);
    const double Z = simpson([&](double x) { return std::exp(-0.5 * (x + h) * (x + h)); }, 0.0, 40.0);
    CAPTURE(h);
    CHECK(v.beta == doctest::Approx(-std::log(Z)).epsilon(1e-6));
    CHECK(v.mass == doctest::Approx(1.0).epsilon(1e-12));
  }
  const Domain dom2 = Domain::half_space(2, 8.0, 256);
  const ExtremalProfile v2 = extremal_profile(make_nonlinearity(Family::boltzmann, 1.0, 2),
                                              make_shifted_quadratic(0.0, 0.5, 0.5, 2), dom2, 1.0);
  const double Z1 = simpson([&](double x) { return std::exp(-0.5 * (x + 0.5) * (x + 0.5)); }, 0.0, 40.0);
  CHECK(v2.beta == doctest::Approx(-std::log(std::sqrt(2 * std::numbers::pi) * Z1)).epsilon(1e-4));
}

TEST_CASE("power-convex profile is (beta - x^2)_+") {
  const Nonlinearity nl = make_nonlinearity(Family::power_convex, 2.0, 1);
  const Domain dom = Domain::half_space(1, 2.0, 8192);
  const ExtremalProfile v = extremal_profile(nl, make_shifted_quadratic(0.0, 0.0, 1.0, 1), dom, 1.0);
  const double beta = std::pow(1.5, 2.0 / 3.0);
  CHECK(beta == doctest::Approx(1.31037).epsilon(1e-5));
  CHECK(v.beta == doctest::Approx(beta).epsilon(1e-6));
  for (std::size_t i = 0; i < v.v.size(); i += 97) {
    const double x = dom.center(i)[0];
    CHECK(v.v[i] == doctest::Approx(std::max(v.beta - x * x, 0.0)).epsilon(1e-14));
  }
}

TEST_CASE("normalizer is idempotent") {
  const Domain dom = Domain::half_space(2, 3.0, 96);
  for (Family f : {Family::boltzmann, Family::power_convex, Family::power_concave}) {
    const Nonlinearity nl = make_nonlinearity(f, f == Family::power_concave ? 0.75 : 2.0, 2);
    const Potential V = make_shifted_quadratic(0.0, 0.3, 1.0, 2);
    const Domain& d = f == Family::power_convex ? dom : Domain::half_space(2, 10.0, 96);
    const ExtremalProfile a = extremal_profile(nl, V, d, 0.8);
    const ExtremalProfile b = extremal_profile(nl, V, d, a.mass);
    CHECK(b.beta == doctest::Approx(a.beta).epsilon(1e-10));
  }
}

TEST_CASE("compact support touching a truncation face is rejected") {
  const Nonlinearity nl = make_nonlinearity(Family::power_convex, 2.0, 1);
  try {
    extremal_profile(nl, make_shifted_quadratic(0.0, 0.0, 1.0, 1), Domain::half_space(1, 0.5, 64), 1.0);
    FAIL("no exception");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::support_escapes_box);
  }
}

TEST_CASE("solve_normalizer") {
  CHECK(solve_normalizer([](double b) { return std::exp(b); }, 2.0, 0.0) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(solve_normalizer([](double b) { return b > 5.0 ? INFINITY : b * b * b; }, 27.0, 100.0) ==
        doctest::Approx(3.0).epsilon(1e-12));
}
