#pragma once

// Cell-centered grids on axis-aligned boxes, finite-difference operators and
// the carré du champ calculus built on them.

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace entroflow {

inline constexpr int max_dim = 3;

/// Point in R^d; coordinates past the domain dimension are zero.
using Point = std::array<double, max_dim>;
using CellIndex = std::array<int, max_dim>;

enum class FaceKind {
  true_boundary,  // part of the boundary of the convex set being discretized
  truncation,     // artificial cutoff of an unbounded set
};

struct Face {
  int axis = 0;
  bool upper = false;

  /// Sign of the outer normal along `axis`.
  double normal_sign() const noexcept { return upper ? 1.0 : -1.0; }
  bool operator==(const Face&) const = default;
};

class Domain {
 public:
  /// Box [lower, upper] with `cells[a]` cells along each active axis; every
  /// face gets the same classification.
  static Domain box(int dim, Point lower, Point upper, CellIndex cells,
                    FaceKind kind = FaceKind::true_boundary);

  /// Truncated half space [-L, L]^{d-1} x [0, L]; only {x_d = 0} is a true
  /// boundary.
  static Domain half_space(int dim, double length, int cells_per_axis);

  int dim() const noexcept { return dim_; }
  int cells(int axis) const noexcept { return cells_[axis]; }
  double spacing(int axis) const noexcept { return spacing_[axis]; }
  double lower(int axis) const noexcept { return lower_[axis]; }
  double upper(int axis) const noexcept { return upper_[axis]; }
  double min_spacing() const noexcept;
  double max_spacing() const noexcept;
  double cell_volume() const noexcept;
  std::size_t size() const noexcept { return size_; }
  std::size_t stride(int axis) const noexcept { return stride_[axis]; }

  CellIndex multi_index(std::size_t flat) const noexcept;
  std::size_t flat_index(const CellIndex& idx) const noexcept;
  Point center(std::size_t flat) const noexcept;
  Point center(const CellIndex& idx) const noexcept;

  FaceKind face_kind(const Face& face) const noexcept;
  void set_face_kind(const Face& face, FaceKind kind) noexcept;
  std::vector<Face> faces() const;

  /// True when the cell is at least `layers` cells away from every face.
  bool is_interior(std::size_t flat, int layers) const noexcept;

  /// Human readable "n0xn1 on [a,b]x[c,d]".
  std::string describe() const;

  bool operator==(const Domain&) const = default;

 private:
  int dim_ = 1;
  Point lower_{};
  Point upper_{};
  CellIndex cells_{1, 1, 1};
  Point spacing_{1.0, 1.0, 1.0};
  std::array<std::size_t, max_dim> stride_{1, 1, 1};
  std::size_t size_ = 1;
  std::array<FaceKind, 2 * max_dim> face_kinds_{};
};

/// Real values at the cell centers of a domain.
class Field {
 public:
  Field() = default;
  explicit Field(Domain domain, double value = 0.0);
  Field(Domain domain, std::vector<double> values);

  template <class Fn>
  static Field from_function(const Domain& domain, Fn&& fn) {
    Field f(domain);
    for (std::size_t i = 0; i < domain.size(); ++i) f.values_[i] = fn(domain.center(i));
    return f;
  }

  const Domain& domain() const noexcept { return domain_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  double& operator[](std::size_t i) noexcept { return values_[i]; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  double min() const;
  double max() const;
  double max_abs() const;
  bool all_positive() const noexcept;
  bool all_finite() const noexcept;

  template <class Fn>
  Field map(Fn&& fn) const {
    Field out(domain_);
    for (std::size_t i = 0; i < values_.size(); ++i) out.values_[i] = fn(values_[i]);
    return out;
  }

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(const Field& other);
  Field& operator*=(double s) noexcept;

 private:
  Domain domain_;
  std::vector<double> values_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(Field a, const Field& b);
Field operator*(Field a, double s);
Field operator*(double s, Field a);

/// Throws dimension_mismatch unless both fields live on the same grid.
void require_same_domain(const Field& a, const Field& b, const char* where);

/// One component per active axis.
using VectorField = std::vector<Field>;

/// Symmetric discrete Hessian; entry(i, j) == entry(j, i) exactly.
class HessianField {
 public:
  HessianField(int dim, std::vector<Field> upper_triangle);
  int dim() const noexcept { return dim_; }
  const Field& entry(int i, int j) const noexcept;

 private:
  int dim_;
  std::vector<Field> upper_;  // row-major upper triangle
};

// --- finite differences -----------------------------------------------------

/// First derivative along `axis`: centered in the interior, one-sided second
/// order next to the box faces.
Field partial(const Field& f, int axis);

/// First derivative restricted to cells where mask != 0: stencils never reach
/// into masked-out cells (one-sided second order, first order when only one
/// neighbour is available, zero for isolated cells). Cells outside the mask
/// get 0.
Field masked_partial(const Field& f, std::span<const char> mask, int axis);

/// Second derivative along `axis` (one-sided second order at the faces).
Field partial2(const Field& f, int axis);

VectorField gradient(const Field& f);
Field divergence(const VectorField& F);
Field laplacian(const Field& f);
HessianField hessian(const Field& f);

// --- Γ-calculus -------------------------------------------------------------

/// Γ(a, b) = ∇a·∇b.
Field gamma(const Field& a, const Field& b);
Field gamma(const VectorField& grad_a, const VectorField& grad_b);

/// Γ₂(a, b) = tr((∇²a)ᵀ ∇²b) from the discrete Hessians.
Field gamma2(const Field& a, const Field& b);

/// Γ₂ through its defining form ½(ΔΓ(a,b) − Γ(a,Δb) − Γ(b,Δa)).
Field gamma2_from_laplacian(const Field& a, const Field& b);

/// ∇²f(g, h) = Σ_ij ∂_ij f g_i h_j.
Field hessian_form(const HessianField& hess, const VectorField& g, const VectorField& h);

struct CdReport {
  double worst_margin = 0.0;      // min over interior cells of Γ₂(a) − (Δa)²/d
  std::size_t worst_cell = 0;
  std::size_t cells_checked = 0;
};

/// Curvature-dimension CD(0,d) check, interior cells only.
CdReport check_cd_condition(const Field& a, int excluded_layers = 1);

struct IdentityReport {
  double max_error = 0.0;
  double max_magnitude = 0.0;  // max |lhs| over checked cells, for scale
  std::size_t worst_cell = 0;
  std::size_t cells_checked = 0;
};

/// max |∇²f(∇g,∇h) − ½(Γ(g,Γ(f,h)) + Γ(h,Γ(f,g)) − Γ(f,Γ(g,h)))| on interior
/// cells.
IdentityReport check_hessian_gamma_identity(const Field& f, const Field& g, const Field& h,
                                            int excluded_layers = 2);

/// max |Γ₂ (Hessian form) − Γ₂ (Laplacian form)| on interior cells.
IdentityReport check_gamma2_forms(const Field& a, const Field& b, int excluded_layers = 2);

// --- quadrature ------------------------------------------------------------

/// Cell quadrature Σ f_i |cell|.
double integrate(const Field& f);

/// Values extrapolated to a face (quadratic through the three nearest cell
/// centers); one entry per face cell, in flat order of the remaining axes.
std::vector<double> face_values(const Field& f, const Face& face);

/// Outer normal component of a vector field extrapolated to a face.
std::vector<double> face_normal_values(const VectorField& F, const Face& face);

/// (d−1)-dimensional integral of face values over a face (d = 1: the value).
double face_sum(const Domain& domain, const Face& face, std::span<const double> values);

/// Boundary integral of f over any face.
double face_integral(const Field& f, const Face& face);

/// Boundary integral of f over a true-boundary face; throws
/// trace_on_truncation_face otherwise.
double trace_integrate(const Field& f, const Face& face);

/// The {x_d = lower} face.
Face bottom_face(const Domain& domain) noexcept;

}  // namespace entroflow
