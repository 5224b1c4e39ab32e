#include <cmath>
#include <numbers>

#include "doctest.h"

#include "entroflow/error.hpp"
#include "entroflow/grid.hpp"
#include "entroflow/random_fields.hpp"

using namespace entroflow;

namespace {

Domain cube(int d, double lo, double hi, int n) {
  Point a{}, b{};
  CellIndex c{1, 1, 1};
  for (int k = 0; k < d; ++k) {
    a[k] = lo;
    b[k] = hi;
    c[k] = n;
  }
  return Domain::box(d, a, b, c);
}

double half_norm2(const Point& x, int d) {
  double s = 0.0;
  for (int k = 0; k < d; ++k) s += x[k] * x[k];
  return 0.5 * s;
}

double max_interior_error(const Field& f, const std::function<double(const Point&)>& exact, int layers) {
  double e = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (f.domain().is_interior(i, layers)) e = std::max(e, std::abs(f[i] - exact(f.domain().center(i))));
  return e;
}

}  // namespace

TEST_CASE("domain layout") {
  const Domain d = Domain::half_space(2, 3.0, 10);
  CHECK(d.size() == 100);
  CHECK(d.lower(1) == 0.0);
  CHECK(d.lower(0) == -3.0);
  CHECK(d.spacing(0) == doctest::Approx(0.6));
  CHECK(d.spacing(1) == doctest::Approx(0.3));
  CHECK(d.face_kind(bottom_face(d)) == FaceKind::true_boundary);
  CHECK(d.face_kind(Face{1, true}) == FaceKind::truncation);
  CHECK(d.face_kind(Face{0, false}) == FaceKind::truncation);
  CHECK(d.stride(0) == 1);
  const CellIndex idx = d.multi_index(37);
  CHECK(idx[0] == 7);
  CHECK(idx[1] == 3);
  CHECK(d.flat_index(idx) == 37);
}

TEST_CASE("gradient, divergence, laplacian") {
  const Domain d = cube(2, -1.0, 1.0, 32);
  const VectorField g = gradient(Field(d, 3.5));
  for (const Field& c : g) CHECK(c.max_abs() == 0.0);

  const Field q = Field::from_function(d, [](const Point& x) { return half_norm2(x, 2); });
  CHECK(max_interior_error(laplacian(q), [](const Point&) { return 2.0; }, 1) < 1e-12);
  CHECK(max_interior_error(divergence(gradient(q)), [](const Point&) { return 2.0; }, 2) < 1e-12);

  double prev = 0.0;
  for (int n : {32, 64, 128}) {
    const Domain dn = cube(1, 0.0, 2.0 * std::numbers::pi, n);
    const Field s = Field::from_function(dn, [](const Point& x) { return std::sin(x[0]); });
    const double e = max_interior_error(laplacian(s), [](const Point& x) { return -std::sin(x[0]); }, 0);
    if (prev > 0.0) CHECK(prev / e > 3.5);
    prev = e;
  }
}

TEST_CASE("carre du champ") {
  const Domain d = cube(2, -1.0, 1.0, 24);
  const Field x1 = Field::from_function(d, [](const Point& x) { return x[0]; });
  const Field x2 = Field::from_function(d, [](const Point& x) { return x[1]; });
  CHECK(max_interior_error(gamma(x1, x1), [](const Point&) { return 1.0; }, 0) < 1e-12);
  CHECK(max_interior_error(gamma(x1, x2), [](const Point&) { return 0.0; }, 0) < 1e-12);
  const Field q = Field::from_function(d, [](const Point& x) { return half_norm2(x, 2); });
  CHECK(max_interior_error(gamma(q, q), [](const Point& x) { return 2.0 * half_norm2(x, 2); }, 0) < 1e-12);
}

TEST_CASE("gamma2") {
  const Domain d = cube(3, -1.0, 1.0, 12);
  const Field q = Field::from_function(d, [](const Point& x) { return half_norm2(x, 3); });
  CHECK(max_interior_error(gamma2(q, q), [](const Point&) { return 3.0; }, 0) < 1e-11);
  const Field lin = Field::from_function(d, [](const Point& x) { return 2.0 * x[0] - x[1] + 0.5 * x[2]; });
  CHECK(max_interior_error(gamma2(lin, lin), [](const Point&) { return 0.0; }, 0) < 1e-11);
  const Field a = random_band_limited(d, 3), b = random_band_limited(d, 4);
  CHECK(check_gamma2_forms(a, b).max_error < 0.05 * check_gamma2_forms(a, b).max_magnitude + 1e-3);
}

TEST_CASE("curvature-dimension condition") {
  for (int dim : {1, 2, 3}) {
    const Domain d = cube(dim, -1.0, 1.0, dim == 3 ? 12 : 32);
    const Field q = Field::from_function(d, [&](const Point& x) { return half_norm2(x, dim); });
    CHECK(std::abs(check_cd_condition(q).worst_margin) < 1e-12);
    const Field lin = Field::from_function(d, [](const Point& x) { return x[0] - 3.0 * x[1]; });
    CHECK(std::abs(check_cd_condition(lin).worst_margin) < 1e-12);
  }
  const Domain d = cube(2, -std::numbers::pi, std::numbers::pi, 64);
  const double step = d.max_spacing();
  for (std::uint64_t seed = 0; seed < 100; ++seed)
    CHECK(check_cd_condition(random_band_limited(d, seed)).worst_margin >= -10.0 * step * step);
}

TEST_CASE("hessian-gamma identity") {
  const Domain d = cube(2, -1.0, 1.0, 32);
  const Field f = Field::from_function(d, [](const Point& x) { return 1.5 * x[0] * x[0] + x[0] * x[1] - x[1] * x[1]; });
  const Field x1 = Field::from_function(d, [](const Point& x) { return x[0]; });
  const IdentityReport r = check_hessian_gamma_identity(f, x1, x1);
  CHECK(r.max_error < 1e-10);
  CHECK(r.max_magnitude == doctest::Approx(3.0).epsilon(1e-10));

  const Field lin = Field::from_function(d, [](const Point& x) { return x[0] + 2.0 * x[1]; });
  const Field g = random_band_limited(d, 1), h = random_band_limited(d, 2);
  const IdentityReport z = check_hessian_gamma_identity(lin, g, h);
  CHECK(z.max_magnitude < 1e-10);

  auto err = [](int n) {
    const Domain dn = cube(2, -std::numbers::pi, std::numbers::pi, n);
    return check_hessian_gamma_identity(random_band_limited(dn, 10), random_band_limited(dn, 11),
                                        random_band_limited(dn, 12))
        .max_error;
  };
  CHECK(std::log2(err(48) / err(96)) >= 1.0);
}

TEST_CASE("quadrature and traces") {
  CHECK(integrate(Field(cube(3, 0.0, 1.0, 7), 1.0)) == doctest::Approx(1.0).epsilon(1e-14));
  const Domain half = Domain::half_space(1, 12.0, 4096);
  const Field phi = Field::from_function(half, [](const Point& x) {
    return std::exp(-0.5 * x[0] * x[0]) / std::sqrt(2.0 * std::numbers::pi);
  });
  CHECK(integrate(phi) == doctest::Approx(0.5).epsilon(1e-10));

  Domain unit = Domain::box(2, Point{0, 0, 0}, Point{1, 1, 0}, CellIndex{16, 16, 1});
  unit.set_face_kind(Face{1, true}, FaceKind::truncation);
  CHECK(trace_integrate(Field(unit, 1.0), bottom_face(unit)) == doctest::Approx(1.0).epsilon(1e-14));
  try {
    trace_integrate(Field(unit, 1.0), Face{1, true});
    FAIL("no exception");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::trace_on_truncation_face);
  }

  // Quadratic extrapolation is exact for quadratics.
  const Field q = Field::from_function(unit, [](const Point& x) { return 1.0 + x[1] - 2.0 * x[1] * x[1]; });
  for (double v : face_values(q, bottom_face(unit))) CHECK(v == doctest::Approx(1.0).epsilon(1e-13));
  for (double v : face_values(q, Face{1, true})) CHECK(v == doctest::Approx(0.0).scale(1.0).epsilon(1e-13));
}

TEST_CASE("fields on different grids do not mix") {
  const Field a(cube(1, 0.0, 1.0, 8)), b(cube(1, 0.0, 1.0, 9));
  try {
    (void)(a + b);
    FAIL("no exception");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::dimension_mismatch);
  }
}

TEST_CASE("random fields are deterministic") {
  const Domain d = Domain::half_space(2, 4.0, 40);
  const Field a = random_bumps(d, 11), b = random_bumps(d, 11), c = random_bumps(d, 12);
  CHECK(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
  CHECK_FALSE(std::equal(a.values().begin(), a.values().end(), c.values().begin()));
  CHECK(integrate(a) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(a.all_positive());
}
