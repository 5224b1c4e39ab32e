#include "entroflow/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "entroflow/error.hpp"
#include "entroflow/summation.hpp"

namespace entroflow {

namespace {

int face_slot(const Face& face) noexcept { return 2 * face.axis + (face.upper ? 1 : 0); }

template <class Fn>
void for_each_line(const Domain& domain, int axis, Fn&& fn) {
  // Visit the first cell of every grid line parallel to `axis`.
  CellIndex counts{1, 1, 1};
  for (int a = 0; a < domain.dim(); ++a) counts[a] = a == axis ? 1 : domain.cells(a);
  for (int k = 0; k < counts[2]; ++k)
    for (int j = 0; j < counts[1]; ++j)
      for (int i = 0; i < counts[0]; ++i) fn(domain.flat_index({i, j, k}));
}

void derivative_line(const double* f, const char* mask, std::size_t base, std::size_t stride,
                     int n, double h, double* out) {
  auto at = [&](int i) { return f[base + i * stride]; };
  auto in = [&](int i) { return i >= 0 && i < n && (mask == nullptr || mask[base + i * stride] != 0); };
  for (int i = 0; i < n; ++i) {
    double& o = out[base + i * stride];
    if (!in(i)) {
      o = 0.0;
      continue;
    }
    const bool l1 = in(i - 1), r1 = in(i + 1);
    if (l1 && r1) {
      o = (at(i + 1) - at(i - 1)) / (2.0 * h);
    } else if (r1 && in(i + 2)) {
      o = (-3.0 * at(i) + 4.0 * at(i + 1) - at(i + 2)) / (2.0 * h);
    } else if (l1 && in(i - 2)) {
      o = (3.0 * at(i) - 4.0 * at(i - 1) + at(i - 2)) / (2.0 * h);
    } else if (r1) {
      o = (at(i + 1) - at(i)) / h;
    } else if (l1) {
      o = (at(i) - at(i - 1)) / h;
    } else {
      o = 0.0;
    }
  }
}

void second_derivative_line(const double* f, std::size_t base, std::size_t stride, int n,
                            double h, double* out) {
  auto at = [&](int i) { return f[base + i * stride]; };
  const double h2 = h * h;
  if (n < 3) {
    for (int i = 0; i < n; ++i) out[base + i * stride] = 0.0;
    return;
  }
  if (n == 3) {
    const double v = (at(0) - 2.0 * at(1) + at(2)) / h2;
    for (int i = 0; i < n; ++i) out[base + i * stride] = v;
    return;
  }
  for (int i = 1; i + 1 < n; ++i) out[base + i * stride] = (at(i - 1) - 2.0 * at(i) + at(i + 1)) / h2;
  out[base] = (2.0 * at(0) - 5.0 * at(1) + 4.0 * at(2) - at(3)) / h2;
  const int m = n - 1;
  out[base + m * stride] = (2.0 * at(m) - 5.0 * at(m - 1) + 4.0 * at(m - 2) - at(m - 3)) / h2;
}

Field apply_partial(const Field& f, const char* mask, int axis) {
  const Domain& dom = f.domain();
  if (axis < 0 || axis >= dom.dim())
    throw Error(ErrorCode::dimension_mismatch, "derivative axis out of range");
  Field out(dom);
  const double* src = f.values().data();
  double* dst = out.values().data();
  for_each_line(dom, axis, [&](std::size_t base) {
    derivative_line(src, mask, base, dom.stride(axis), dom.cells(axis), dom.spacing(axis), dst);
  });
  return out;
}

// Cells touching the face, ordered by distance (nearest first), for every
// face cell.
template <class Fn>
void for_each_face_cell(const Domain& dom, const Face& face, Fn&& fn) {
  const int n = dom.cells(face.axis);
  const std::size_t s = dom.stride(face.axis);
  for_each_line(dom, face.axis, [&](std::size_t base) {
    if (face.upper) {
      fn(base + static_cast<std::size_t>(n - 1) * s, -static_cast<std::ptrdiff_t>(s), n);
    } else {
      fn(base, static_cast<std::ptrdiff_t>(s), n);
    }
  });
}

double extrapolate(const double* f, std::size_t first, std::ptrdiff_t step, int n) {
  auto at = [&](int k) { return f[static_cast<std::ptrdiff_t>(first) + k * step]; };
  if (n >= 3) return (15.0 * at(0) - 10.0 * at(1) + 3.0 * at(2)) / 8.0;
  if (n == 2) return 1.5 * at(0) - 0.5 * at(1);
  return at(0);
}

}  // namespace

// --- Domain -----------------------------------------------------------------

Domain Domain::box(int dim, Point lower, Point upper, CellIndex cells, FaceKind kind) {
  if (dim < 1 || dim > max_dim)
    throw Error(ErrorCode::parameter_out_of_range, "dimension must be 1, 2 or 3");
  Domain d;
  d.dim_ = dim;
  std::size_t stride = 1;
  for (int a = 0; a < max_dim; ++a) {
    if (a < dim) {
      if (cells[a] < 1) throw Error(ErrorCode::parameter_out_of_range, "need at least one cell per axis");
      if (!(upper[a] > lower[a]))
        throw Error(ErrorCode::parameter_out_of_range, "box upper bound must exceed lower bound");
      d.lower_[a] = lower[a];
      d.upper_[a] = upper[a];
      d.cells_[a] = cells[a];
      d.spacing_[a] = (upper[a] - lower[a]) / cells[a];
    } else {
      d.lower_[a] = d.upper_[a] = 0.0;
      d.cells_[a] = 1;
      d.spacing_[a] = 1.0;
    }
    d.stride_[a] = stride;
    stride *= static_cast<std::size_t>(d.cells_[a]);
  }
  d.size_ = stride;
  d.face_kinds_.fill(kind);
  return d;
}

Domain Domain::half_space(int dim, double length, int cells_per_axis) {
  if (!(length > 0.0)) throw Error(ErrorCode::parameter_out_of_range, "box length must be positive");
  Point lo{}, hi{};
  CellIndex cells{1, 1, 1};
  for (int a = 0; a < dim && a < max_dim; ++a) {
    lo[a] = a + 1 == dim ? 0.0 : -length;
    hi[a] = length;
    cells[a] = cells_per_axis;
  }
  Domain d = box(dim, lo, hi, cells, FaceKind::truncation);
  d.set_face_kind(Face{dim - 1, false}, FaceKind::true_boundary);
  return d;
}

double Domain::min_spacing() const noexcept {
  double m = spacing_[0];
  for (int a = 1; a < dim_; ++a) m = std::min(m, spacing_[a]);
  return m;
}

double Domain::max_spacing() const noexcept {
  double m = spacing_[0];
  for (int a = 1; a < dim_; ++a) m = std::max(m, spacing_[a]);
  return m;
}

double Domain::cell_volume() const noexcept {
  double v = 1.0;
  for (int a = 0; a < dim_; ++a) v *= spacing_[a];
  return v;
}

CellIndex Domain::multi_index(std::size_t flat) const noexcept {
  CellIndex idx{0, 0, 0};
  for (int a = max_dim - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat / stride_[a]);
    flat -= static_cast<std::size_t>(idx[a]) * stride_[a];
  }
  return idx;
}

std::size_t Domain::flat_index(const CellIndex& idx) const noexcept {
  return static_cast<std::size_t>(idx[0]) * stride_[0] + static_cast<std::size_t>(idx[1]) * stride_[1] +
         static_cast<std::size_t>(idx[2]) * stride_[2];
}

Point Domain::center(const CellIndex& idx) const noexcept {
  Point p{};
  for (int a = 0; a < dim_; ++a) p[a] = lower_[a] + (idx[a] + 0.5) * spacing_[a];
  return p;
}

Point Domain::center(std::size_t flat) const noexcept { return center(multi_index(flat)); }

FaceKind Domain::face_kind(const Face& face) const noexcept { return face_kinds_[face_slot(face)]; }

void Domain::set_face_kind(const Face& face, FaceKind kind) noexcept { face_kinds_[face_slot(face)] = kind; }

std::vector<Face> Domain::faces() const {
  std::vector<Face> out;
  for (int a = 0; a < dim_; ++a) {
    out.push_back(Face{a, false});
    out.push_back(Face{a, true});
  }
  return out;
}

bool Domain::is_interior(std::size_t flat, int layers) const noexcept {
  const CellIndex idx = multi_index(flat);
  for (int a = 0; a < dim_; ++a)
    if (idx[a] < layers || idx[a] >= cells_[a] - layers) return false;
  return true;
}

std::string Domain::describe() const {
  std::ostringstream os;
  for (int a = 0; a < dim_; ++a) os << (a ? "x" : "") << cells_[a];
  os << " on ";
  for (int a = 0; a < dim_; ++a) os << (a ? "x" : "") << "[" << lower_[a] << "," << upper_[a] << "]";
  return os.str();
}

// --- Field ------------------------------------------------------------------

Field::Field(Domain domain, double value) : domain_(std::move(domain)), values_(domain_.size(), value) {}

Field::Field(Domain domain, std::vector<double> values) : domain_(std::move(domain)), values_(std::move(values)) {
  if (values_.size() != domain_.size())
    throw Error(ErrorCode::dimension_mismatch, "field size does not match its domain");
}

double Field::min() const { return *std::min_element(values_.begin(), values_.end()); }
double Field::max() const { return *std::max_element(values_.begin(), values_.end()); }

double Field::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

bool Field::all_positive() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v > 0.0; });
}

bool Field::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

void require_same_domain(const Field& a, const Field& b, const char* where) {
  if (!(a.domain() == b.domain()))
    throw Error(ErrorCode::dimension_mismatch, std::string(where) + ": fields live on different grids");
}

Field& Field::operator+=(const Field& other) {
  require_same_domain(*this, other, "operator+=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

Field& Field::operator-=(const Field& other) {
  require_same_domain(*this, other, "operator-=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

Field& Field::operator*=(const Field& other) {
  require_same_domain(*this, other, "operator*=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] *= other.values_[i];
  return *this;
}

Field& Field::operator*=(double s) noexcept {
  for (double& v : values_) v *= s;
  return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(Field a, const Field& b) { return a *= b; }
Field operator*(Field a, double s) { return a *= s; }
Field operator*(double s, Field a) { return a *= s; }

// --- HessianField -----------------------------------------------------------

HessianField::HessianField(int dim, std::vector<Field> upper_triangle)
    : dim_(dim), upper_(std::move(upper_triangle)) {
  if (upper_.size() != static_cast<std::size_t>(dim * (dim + 1) / 2))
    throw Error(ErrorCode::dimension_mismatch, "Hessian needs d(d+1)/2 components");
}

const Field& HessianField::entry(int i, int j) const noexcept {
  if (i > j) std::swap(i, j);
  return upper_[static_cast<std::size_t>(i * dim_ - i * (i - 1) / 2 + (j - i))];
}

// --- operators --------------------------------------------------------------

Field partial(const Field& f, int axis) { return apply_partial(f, nullptr, axis); }

Field masked_partial(const Field& f, std::span<const char> mask, int axis) {
  if (mask.size() != f.size()) throw Error(ErrorCode::dimension_mismatch, "mask size mismatch");
  return apply_partial(f, mask.data(), axis);
}

Field partial2(const Field& f, int axis) {
  const Domain& dom = f.domain();
  if (axis < 0 || axis >= dom.dim())
    throw Error(ErrorCode::dimension_mismatch, "derivative axis out of range");
  Field out(dom);
  const double* src = f.values().data();
  double* dst = out.values().data();
  for_each_line(dom, axis, [&](std::size_t base) {
    second_derivative_line(src, base, dom.stride(axis), dom.cells(axis), dom.spacing(axis), dst);
  });
  return out;
}

VectorField gradient(const Field& f) {
  VectorField g;
  g.reserve(static_cast<std::size_t>(f.domain().dim()));
  for (int a = 0; a < f.domain().dim(); ++a) g.push_back(partial(f, a));
  return g;
}

Field divergence(const VectorField& F) {
  if (F.empty() || static_cast<int>(F.size()) != F.front().domain().dim())
    throw Error(ErrorCode::dimension_mismatch, "divergence needs one component per axis");
  Field out(F.front().domain());
  for (int a = 0; a < static_cast<int>(F.size()); ++a) out += partial(F[static_cast<std::size_t>(a)], a);
  return out;
}

Field laplacian(const Field& f) {
  Field out(f.domain());
  for (int a = 0; a < f.domain().dim(); ++a) out += partial2(f, a);
  return out;
}

HessianField hessian(const Field& f) {
  const int d = f.domain().dim();
  std::vector<Field> comps;
  const VectorField g = gradient(f);
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      // Tensor-product stencils along different axes commute, so the mixed
      // entry is symmetric by construction.
      comps.push_back(i == j ? partial2(f, i) : partial(g[static_cast<std::size_t>(i)], j));
    }
  }
  return HessianField(d, std::move(comps));
}

Field gamma(const VectorField& ga, const VectorField& gb) {
  if (ga.size() != gb.size() || ga.empty())
    throw Error(ErrorCode::dimension_mismatch, "gamma: gradient sizes differ");
  Field out(ga.front().domain());
  for (std::size_t a = 0; a < ga.size(); ++a) {
    require_same_domain(ga[a], gb[a], "gamma");
    auto o = out.values();
    auto x = ga[a].values();
    auto y = gb[a].values();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] += x[i] * y[i];
  }
  return out;
}

Field gamma(const Field& a, const Field& b) {
  require_same_domain(a, b, "gamma");
  return gamma(gradient(a), gradient(b));
}

Field gamma2(const Field& a, const Field& b) {
  require_same_domain(a, b, "gamma2");
  const int d = a.domain().dim();
  const HessianField ha = hessian(a);
  const HessianField hb = &a == &b ? ha : hessian(b);
  Field out(a.domain());
  auto o = out.values();
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      auto x = ha.entry(i, j).values();
      auto y = hb.entry(i, j).values();
      for (std::size_t k = 0; k < o.size(); ++k) o[k] += x[k] * y[k];
    }
  }
  return out;
}

Field gamma2_from_laplacian(const Field& a, const Field& b) {
  require_same_domain(a, b, "gamma2_from_laplacian");
  Field out = laplacian(gamma(a, b));
  out -= gamma(a, laplacian(b));
  out -= gamma(b, laplacian(a));
  out *= 0.5;
  return out;
}

Field hessian_form(const HessianField& hess, const VectorField& g, const VectorField& h) {
  const int d = hess.dim();
  if (static_cast<int>(g.size()) != d || static_cast<int>(h.size()) != d)
    throw Error(ErrorCode::dimension_mismatch, "hessian_form: vector sizes differ from Hessian");
  Field out(g.front().domain());
  auto o = out.values();
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      auto H = hess.entry(i, j).values();
      auto gi = g[static_cast<std::size_t>(i)].values();
      auto hj = h[static_cast<std::size_t>(j)].values();
      for (std::size_t k = 0; k < o.size(); ++k) o[k] += H[k] * gi[k] * hj[k];
    }
  }
  return out;
}

CdReport check_cd_condition(const Field& a, int excluded_layers) {
  const Domain& dom = a.domain();
  const int d = dom.dim();
  const HessianField h = hessian(a);
  CdReport rep;
  rep.worst_margin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < dom.size(); ++k) {
    if (!dom.is_interior(k, excluded_layers)) continue;
    double g2 = 0.0, lap = 0.0;
    for (int i = 0; i < d; ++i) {
      lap += h.entry(i, i)[k];
      for (int j = 0; j < d; ++j) g2 += h.entry(i, j)[k] * h.entry(i, j)[k];
    }
    const double margin = g2 - lap * lap / d;
    ++rep.cells_checked;
    if (margin < rep.worst_margin) {
      rep.worst_margin = margin;
      rep.worst_cell = k;
    }
  }
  if (rep.cells_checked == 0) rep.worst_margin = 0.0;
  return rep;
}

namespace {

IdentityReport compare_on_interior(const Field& lhs, const Field& rhs, int layers) {
  const Domain& dom = lhs.domain();
  IdentityReport rep;
  for (std::size_t k = 0; k < dom.size(); ++k) {
    if (!dom.is_interior(k, layers)) continue;
    ++rep.cells_checked;
    rep.max_magnitude = std::max(rep.max_magnitude, std::abs(lhs[k]));
    const double err = std::abs(lhs[k] - rhs[k]);
    if (err > rep.max_error) {
      rep.max_error = err;
      rep.worst_cell = k;
    }
  }
  return rep;
}

}  // namespace

IdentityReport check_hessian_gamma_identity(const Field& f, const Field& g, const Field& h,
                                            int excluded_layers) {
  require_same_domain(f, g, "check_hessian_gamma_identity");
  require_same_domain(f, h, "check_hessian_gamma_identity");
  const VectorField gf = gradient(f), gg = gradient(g), gh = gradient(h);
  const Field lhs = hessian_form(hessian(f), gg, gh);

  const Field gfh = gamma(gf, gh);
  const Field gfg = gamma(gf, gg);
  const Field ggh = gamma(gg, gh);
  Field rhs = gamma(gg, gradient(gfh));
  rhs += gamma(gh, gradient(gfg));
  rhs -= gamma(gf, gradient(ggh));
  rhs *= 0.5;
  return compare_on_interior(lhs, rhs, excluded_layers);
}

IdentityReport check_gamma2_forms(const Field& a, const Field& b, int excluded_layers) {
  return compare_on_interior(gamma2(a, b), gamma2_from_laplacian(a, b), excluded_layers);
}

// --- quadrature -------------------------------------------------------------

double integrate(const Field& f) { return accurate_sum(f.values()) * f.domain().cell_volume(); }

std::vector<double> face_values(const Field& f, const Face& face) {
  const Domain& dom = f.domain();
  if (face.axis < 0 || face.axis >= dom.dim()) throw Error(ErrorCode::dimension_mismatch, "face axis out of range");
  std::vector<double> out;
  const double* src = f.values().data();
  for_each_face_cell(dom, face, [&](std::size_t first, std::ptrdiff_t step, int n) {
    out.push_back(extrapolate(src, first, step, n));
  });
  return out;
}

std::vector<double> face_normal_values(const VectorField& F, const Face& face) {
  if (face.axis < 0 || face.axis >= static_cast<int>(F.size()))
    throw Error(ErrorCode::dimension_mismatch, "face axis out of range");
  std::vector<double> v = face_values(F[static_cast<std::size_t>(face.axis)], face);
  for (double& x : v) x *= face.normal_sign();
  return v;
}

double face_sum(const Domain& dom, const Face& face, std::span<const double> values) {
  double area = 1.0;
  for (int a = 0; a < dom.dim(); ++a)
    if (a != face.axis) area *= dom.spacing(a);
  return accurate_sum(values) * area;
}

double face_integral(const Field& f, const Face& face) {
  const std::vector<double> v = face_values(f, face);
  return face_sum(f.domain(), face, v);
}

double trace_integrate(const Field& f, const Face& face) {
  if (f.domain().face_kind(face) != FaceKind::true_boundary)
    throw Error(ErrorCode::trace_on_truncation_face, "trace requested on an artificial truncation face");
  return face_integral(f, face);
}

Face bottom_face(const Domain& domain) noexcept { return Face{domain.dim() - 1, false}; }

}  // namespace entroflow
