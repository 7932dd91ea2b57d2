#pragma once

#include "levelvol/types.hpp"

#include <functional>
#include <memory>
#include <string_view>
#include <vector>

namespace levelvol {

enum class DomainKind { ball, slab, box, implicit };

std::string_view to_string(DomainKind kind);

/// Compact region V = {g <= 0} inside a known bounding box.
///
/// Immutable and shareable like ScalarField.
class Domain {
 public:
  class Impl;

  int dimension() const noexcept;
  DomainKind kind() const noexcept;
  const std::vector<double>& parameters() const noexcept;
  const Box& bounding_box() const noexcept;
  /// False for the box domain, whose boundary has corners. Boundary critical
  /// point searches are skipped for non-smooth domains.
  bool smooth_boundary() const noexcept;

  double constraint(const Point& x) const;
  Vector constraint_gradient(const Point& x) const;
  Matrix constraint_hessian(const Point& x) const;
  bool contains(const Point& x) const { return constraint(x) <= 0.0; }

  double constraint_unchecked(const double* x) const;

  explicit Domain(std::shared_ptr<const Impl> impl);

 private:
  std::shared_ptr<const Impl> impl_;
};

class Domain::Impl {
 public:
  virtual ~Impl() = default;
  virtual double g(const double* x) const = 0;
  virtual void derivatives(const double* x, Vector& grad, Matrix& hess) const = 0;

  int n = 0;
  DomainKind kind = DomainKind::implicit;
  Box box;
  bool smooth = true;
  std::vector<double> parameters;
};

/// |x - center|^2 - radius^2 <= 0. Parameters: (radius, center...).
Domain make_ball(const Point& center, double radius);

/// Flat-bottomed slab: 0 <= zeta <= height (zeta is the last coordinate),
/// closed off sideways by a smooth wall starting at |xi - axis| = flat_radius:
///   g = -zeta (height - zeta) + steepness * E(|xi - axis|^2 - flat_radius^2),
///   E(t) = t exp(-1/t) for t > 0, 0 otherwise.
/// The bottom is exactly {zeta = 0} for |xi - axis| <= flat_radius. An
/// empty axis means the origin.
/// Parameters: (flat_radius, height, steepness, axis...).
Domain make_slab(int n, double flat_radius, double height, double steepness, const Point& axis = {});

/// Axis-aligned box. Not smooth; intended as the whole-grid domain.
Domain make_box(const Box& box);

struct ImplicitConstraint {
  std::function<double(const Point&)> g;
  std::function<Vector(const Point&)> gradient;
  std::function<Matrix(const Point&)> hessian;
};

struct DomainCheckOptions {
  int surface_samples_per_face = 64;
  int shell_samples = 512;
  /// Minimum |grad g| accepted on the zero set.
  double regularity_tol = 1e-6;
};

/// Wraps a user constraint after checking that V is compact inside `box`
/// (g > 0 on the box surface), non-empty, and that |grad g| stays above
/// regularity_tol on points of the zero set. Throws InvalidArgument.
Domain make_implicit(int n, ImplicitConstraint constraint, const Box& box,
                     const DomainCheckOptions& options = {});

/// Re-runs the compactness and regularity checks on any smooth domain.
void validate_domain(const Domain& domain, const DomainCheckOptions& options = {});

namespace detail {
/// index-th point of the Halton sequence scaled into `box`.
Point halton_point(std::size_t index, const Box& box);
}  // namespace detail

}  // namespace levelvol
