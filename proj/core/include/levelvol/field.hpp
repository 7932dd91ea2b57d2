#pragma once

#include "levelvol/types.hpp"
#include "levelvol/voxel_grid.hpp"

#include <functional>
#include <memory>
#include <string_view>
#include <vector>

namespace levelvol {

enum class FieldKind {
  standard_form_a,
  standard_form_b,
  standard_form_c,
  gaussian_mixture,
  voxel_interpolant,
  custom,
};

std::string_view to_string(FieldKind kind);

/// Local normal forms around a point of interest:
///   a: F = eta                              (regular point, last coordinate is eta)
///   b: F = sum xi_i^2 - sum eta_j^2         (interior critical point, p + q = n)
///   c: F = zeta + sum xi_i^2 - sum eta_j^2  (critical point of f on the boundary
///                                            zeta = 0, p + q = n - 1)
/// Coordinates are ordered (xi_1..xi_p, eta_1..eta_q[, zeta]).
enum class StandardForm { a, b, c };

std::string_view to_string(StandardForm form);
StandardForm parse_standard_form(std::string_view text);

struct GaussianComponent {
  Point center;
  double width = 1.0;
  double amplitude = 1.0;
};

/// Closed-form local part of a blended field.
struct LocalForm {
  std::function<double(const Point&)> value;
  std::function<Vector(const Point&)> gradient;
  std::function<Matrix(const Point&)> hessian;
};

/// Smooth scalar field on R^n with exact first and second derivatives.
///
/// Immutable; copies share the underlying representation and may be used
/// from several threads at once.
class ScalarField {
 public:
  class Impl;

  int dimension() const noexcept;
  FieldKind kind() const noexcept;
  /// Kind-specific coefficients (see the factory functions).
  const std::vector<double>& parameters() const noexcept;

  double eval(const Point& x) const;
  Vector gradient(const Point& x) const;
  /// Full symmetric matrix.
  Matrix hessian(const Point& x) const;

  double operator()(const Point& x) const { return eval(x); }

  /// No dimension check; `x` must hold dimension() values.
  double eval_unchecked(const double* x) const;

  explicit ScalarField(std::shared_ptr<const Impl> impl);

 private:
  std::shared_ptr<const Impl> impl_;
};

class ScalarField::Impl {
 public:
  virtual ~Impl() = default;
  virtual double value(const double* x) const = 0;
  virtual void derivatives(const double* x, Vector& grad, Matrix& hess) const = 0;

  int n = 0;
  FieldKind kind = FieldKind::custom;
  std::vector<double> parameters;
};

/// Blended standard form: equals `offset + F` on the ball of radius
/// envelope_radius / 2 and decays to zero outside radius envelope_radius.
///
/// Parameters are stored as (form, p, q, n, envelope_radius, offset, negate).
/// With `negate` the local part is -F, which turns a type (p, q) point into
/// type (q, p); it exists so maxima can be built from the minimum form.
ScalarField make_standard_form(StandardForm form, int p, int q, int n, double envelope_radius,
                               double offset = 0.0, bool negate = false);

/// Smallest offset for which the blended standard form is positive on R^n.
double class_c_offset(StandardForm form, double envelope_radius);

/// sum_i amplitude_i * exp(-|x - center_i|^2 / width_i^2).
ScalarField make_gaussian_mixture(int n, std::vector<GaussianComponent> components);

/// Blends an arbitrary local form exactly like make_standard_form does.
ScalarField make_blended(int n, LocalForm local, double envelope_radius, double offset = 0.0);

/// Tensor-product Catmull-Rom interpolant of the grid. C1 everywhere,
/// exact at voxel centers and exact for data sampled from polynomials of
/// degree <= 2 in each coordinate (away from the outermost voxel layer).
/// Outside the grid the value is extended as a constant along each axis.
ScalarField make_voxel_interpolant(VoxelGrid grid);

/// x -> field(Q^T x) for an orthogonal Q.
ScalarField make_rotated(ScalarField field, Matrix rotation);

/// values[i] = field(center of voxel i).
VoxelGrid sample_to_grid(const ScalarField& field, const std::vector<int>& dims,
                         const std::vector<double>& spacing, const Point& origin);

}  // namespace levelvol
