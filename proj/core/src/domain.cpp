#include "levelvol/domain.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace levelvol {

std::string_view to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::ball: return "ball";
    case DomainKind::slab: return "slab";
    case DomainKind::box: return "box";
    case DomainKind::implicit: return "implicit";
  }
  return "unknown";
}

Domain::Domain(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

int Domain::dimension() const noexcept { return impl_->n; }
DomainKind Domain::kind() const noexcept { return impl_->kind; }
const std::vector<double>& Domain::parameters() const noexcept { return impl_->parameters; }
const Box& Domain::bounding_box() const noexcept { return impl_->box; }
bool Domain::smooth_boundary() const noexcept { return impl_->smooth; }

double Domain::constraint(const Point& x) const {
  require_dimension(x, impl_->n, "constraint");
  return impl_->g(x.data());
}

double Domain::constraint_unchecked(const double* x) const { return impl_->g(x); }

Vector Domain::constraint_gradient(const Point& x) const {
  require_dimension(x, impl_->n, "constraint_gradient");
  Vector g(impl_->n);
  Matrix h(impl_->n, impl_->n);
  impl_->derivatives(x.data(), g, h);
  return g;
}

Matrix Domain::constraint_hessian(const Point& x) const {
  require_dimension(x, impl_->n, "constraint_hessian");
  Vector g(impl_->n);
  Matrix h(impl_->n, impl_->n);
  impl_->derivatives(x.data(), g, h);
  return h;
}

namespace {

class BallDomain final : public Domain::Impl {
 public:
  BallDomain(Point c, double r) : c_(std::move(c)), r2_(r * r) {
    n = static_cast<int>(c_.size());
    kind = DomainKind::ball;
    box = {c_.array() - r, c_.array() + r};
    const double pad = 1e-3 * r;
    box.lo.array() -= pad;
    box.hi.array() += pad;
    parameters.push_back(r);
    parameters.insert(parameters.end(), c_.data(), c_.data() + n);
  }

  double g(const double* x) const override {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += (x[i] - c_[i]) * (x[i] - c_[i]);
    return s - r2_;
  }
  void derivatives(const double* x, Vector& grad, Matrix& hess) const override {
    grad = 2.0 * (Eigen::Map<const Vector>(x, n) - c_);
    hess = 2.0 * Matrix::Identity(n, n);
  }

 private:
  Point c_;
  double r2_;
};

class SlabDomain final : public Domain::Impl {
 public:
  SlabDomain(int dim, double a, double h, double k, const Point& axis) : a2_(a * a), h_(h), k_(k), c_(axis) {
    n = dim;
    kind = DomainKind::slab;
    parameters = {a, h, k};
    for (int i = 0; i < n - 1; ++i) parameters.push_back(c_[i]);
    // Wall position where steepness * E(t) exceeds the largest interior
    // value h^2/4 of zeta (h - zeta).
    const double target = h * h / (4.0 * k);
    auto fn = [target](double t) { return t * std::exp(-1.0 / t) - target; };
    boost::math::tools::eps_tolerance<double> tol(50);
    double hi = 1.0;
    while (fn(hi) < 0.0) hi *= 2.0;
    std::uintmax_t iters = 200;
    const auto root = boost::math::tools::toms748_solve(fn, 1e-3, hi, tol, iters);
    const double rmax = std::sqrt(a2_ + root.second);
    const double pad = 0.05 * h;
    box = {Vector::Constant(n, -(rmax + pad)), Vector::Constant(n, rmax + pad)};
    box.lo.head(n - 1) += c_;
    box.hi.head(n - 1) += c_;
    box.lo[n - 1] = -pad;
    box.hi[n - 1] = h + pad;
  }

  double g(const double* x) const override {
    double s = 0.0;
    for (int i = 0; i < n - 1; ++i) s += (x[i] - c_[i]) * (x[i] - c_[i]);
    const double z = x[n - 1];
    const double t = s - a2_;
    const double wall = t > 0.0 ? t * std::exp(-1.0 / t) : 0.0;
    return -z * (h_ - z) + k_ * wall;
  }

  void derivatives(const double* x, Vector& grad, Matrix& hess) const override {
    grad.setZero(n);
    hess.setZero(n, n);
    double s = 0.0;
    for (int i = 0; i < n - 1; ++i) s += (x[i] - c_[i]) * (x[i] - c_[i]);
    const double z = x[n - 1];
    grad[n - 1] = 2.0 * z - h_;
    hess(n - 1, n - 1) = 2.0;
    const double t = s - a2_;
    if (t <= 0.0) return;
    const double e = std::exp(-1.0 / t);
    const double d1 = k_ * e * (1.0 + 1.0 / t);
    const double d2 = k_ * e / (t * t * t);
    for (int i = 0; i < n - 1; ++i) {
      const double xi = x[i] - c_[i];
      grad[i] = 2.0 * d1 * xi;
      hess(i, i) += 2.0 * d1;
      for (int j = 0; j < n - 1; ++j) hess(i, j) += 4.0 * d2 * xi * (x[j] - c_[j]);
    }
  }

 private:
  double a2_;
  double h_;
  double k_;
  Point c_;
};

class BoxDomain final : public Domain::Impl {
 public:
  explicit BoxDomain(const Box& b) {
    n = b.dimension();
    kind = DomainKind::box;
    box = b;
    smooth = false;
    for (int d = 0; d < n; ++d) {
      parameters.push_back(b.lo[d]);
      parameters.push_back(b.hi[d]);
    }
  }

  double g(const double* x) const override {
    double m = -std::numeric_limits<double>::infinity();
    for (int d = 0; d < n; ++d) m = std::max({m, box.lo[d] - x[d], x[d] - box.hi[d]});
    return m;
  }

  void derivatives(const double* x, Vector& grad, Matrix& hess) const override {
    grad.setZero(n);
    hess.setZero(n, n);
    double m = -std::numeric_limits<double>::infinity();
    for (int d = 0; d < n; ++d) {
      if (box.lo[d] - x[d] > m) {
        m = box.lo[d] - x[d];
        grad.setZero();
        grad[d] = -1.0;
      }
      if (x[d] - box.hi[d] > m) {
        m = x[d] - box.hi[d];
        grad.setZero();
        grad[d] = 1.0;
      }
    }
  }
};

class ImplicitDomain final : public Domain::Impl {
 public:
  ImplicitDomain(int dim, ImplicitConstraint c, const Box& b) : c_(std::move(c)) {
    n = dim;
    kind = DomainKind::implicit;
    box = b;
  }

  double g(const double* x) const override { return c_.g(Eigen::Map<const Vector>(x, n)); }
  void derivatives(const double* x, Vector& grad, Matrix& hess) const override {
    const Point p = Eigen::Map<const Vector>(x, n);
    grad = c_.gradient(p);
    hess = c_.hessian(p);
  }

 private:
  ImplicitConstraint c_;
};

// Van der Corput radical inverse; dimension d uses the d-th prime.
double radical_inverse(std::size_t i, int base) {
  double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % static_cast<std::size_t>(base));
    i /= static_cast<std::size_t>(base);
    f *= inv;
  }
  return r;
}

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};

}  // namespace

namespace detail {

Point halton_point(std::size_t index, const Box& box) {
  const int n = box.dimension();
  Point x(n);
  for (int d = 0; d < n; ++d) {
    const int base = kPrimes[d % 12] + (d / 12) * 41;
    x[d] = box.lo[d] + (box.hi[d] - box.lo[d]) * radical_inverse(index + 1, base);
  }
  return x;
}

}  // namespace detail

using detail::halton_point;

void validate_domain(const Domain& domain, const DomainCheckOptions& options) {
  const int n = domain.dimension();
  const Box& box = domain.bounding_box();
  if (box.dimension() != n) throw InvalidArgument("domain: bounding box dimension mismatch");
  for (int d = 0; d < n; ++d)
    if (!(box.hi[d] > box.lo[d])) throw InvalidArgument("domain: bounding box is empty along axis " + std::to_string(d));

  // Compactness: g > 0 on every face of the bounding box.
  Box face_box{Vector(n - 1 > 0 ? n - 1 : 1), Vector(n - 1 > 0 ? n - 1 : 1)};
  for (int d = 0; d < n; ++d) {
    for (int side = 0; side < 2; ++side) {
      const double fixed = side == 0 ? box.lo[d] : box.hi[d];
      const int samples = n == 1 ? 1 : options.surface_samples_per_face;
      for (int k = 0; k < n - 1; ++k) {
        const int axis = k < d ? k : k + 1;
        face_box.lo[k] = box.lo[axis];
        face_box.hi[k] = box.hi[axis];
      }
      for (int i = 0; i < samples; ++i) {
        Point x(n);
        if (n > 1) {
          const Point y = halton_point(static_cast<std::size_t>(i), face_box);
          for (int k = 0; k < n - 1; ++k) x[k < d ? k : k + 1] = y[k];
        }
        x[d] = fixed;
        const double g = domain.constraint_unchecked(x.data());
        if (!(g > 0.0))
          throw InvalidArgument("domain: not compact inside its bounding box (g = " + std::to_string(g) +
                                " <= 0 on the box surface, axis " + std::to_string(d) + ")");
      }
    }
  }

  if (!domain.smooth_boundary()) return;

  // Non-empty and regular: project interior/exterior sample pairs onto g = 0.
  bool found_inside = false;
  int projected = 0;
  for (int i = 0; i < options.shell_samples; ++i) {
    Point x = halton_point(static_cast<std::size_t>(i), box);
    if (domain.constraint_unchecked(x.data()) <= 0.0) found_inside = true;
    for (int it = 0; it < 60; ++it) {
      const double g = domain.constraint_unchecked(x.data());
      const Vector grad = domain.constraint_gradient(x);
      const double gn2 = grad.squaredNorm();
      if (std::abs(g) <= 1e-12 * (1.0 + std::abs(g))) break;
      if (gn2 <= options.regularity_tol * options.regularity_tol) break;
      x -= (g / gn2) * grad;
      if (!box.contains(x)) break;
    }
    if (!box.contains(x)) continue;
    const double g = domain.constraint_unchecked(x.data());
    if (std::abs(g) > 1e-8) continue;
    ++projected;
    const double gn = domain.constraint_gradient(x).norm();
    if (gn < options.regularity_tol)
      throw InvalidArgument("domain: boundary is not regular (|grad g| = " + std::to_string(gn) +
                            " on the zero set)");
  }
  if (!found_inside) throw InvalidArgument("domain: V = {g <= 0} appears to be empty");
  (void)projected;
}

Domain make_ball(const Point& center, double radius) {
  if (center.size() < 1) throw InvalidArgument("make_ball: empty center");
  if (!(radius > 0.0)) throw InvalidArgument("make_ball: radius must be > 0");
  return Domain(std::make_shared<BallDomain>(center, radius));
}

Domain make_slab(int n, double flat_radius, double height, double steepness, const Point& axis) {
  if (n < 2) throw InvalidArgument("make_slab: needs n >= 2");
  if (!(flat_radius > 0.0) || !(height > 0.0) || !(steepness > 0.0))
    throw InvalidArgument("make_slab: flat_radius, height and steepness must be > 0");
  const Point c = axis.size() == 0 ? Point(Point::Zero(n - 1)) : axis;
  if (c.size() != n - 1) throw InvalidArgument("make_slab: axis needs n - 1 coordinates");
  if (!c.allFinite()) throw InvalidArgument("make_slab: axis must be finite");
  return Domain(std::make_shared<SlabDomain>(n, flat_radius, height, steepness, c));
}

Domain make_box(const Box& box) {
  if (box.dimension() < 1 || box.hi.size() != box.lo.size()) throw InvalidArgument("make_box: malformed box");
  for (int d = 0; d < box.dimension(); ++d)
    if (!(box.hi[d] > box.lo[d])) throw InvalidArgument("make_box: empty along axis " + std::to_string(d));
  return Domain(std::make_shared<BoxDomain>(box));
}

Domain make_implicit(int n, ImplicitConstraint constraint, const Box& box, const DomainCheckOptions& options) {
  if (n < 1) throw InvalidArgument("make_implicit: dimension must be positive");
  if (!constraint.g || !constraint.gradient || !constraint.hessian)
    throw InvalidArgument("make_implicit: g, gradient and hessian are all required");
  if (box.dimension() != n || box.hi.size() != n) throw InvalidArgument("make_implicit: bounding box dimension mismatch");
  Domain d(std::make_shared<ImplicitDomain>(n, std::move(constraint), box));
  validate_domain(d, options);
  return d;
}

}  // namespace levelvol
