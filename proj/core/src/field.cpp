#include "levelvol/field.hpp"

#include "levelvol/smooth_step.hpp"

#include <array>
#include <cmath>
#include <string>
#include <utility>

namespace levelvol {

std::string_view to_string(FieldKind kind) {
  switch (kind) {
    case FieldKind::standard_form_a: return "standard_form_a";
    case FieldKind::standard_form_b: return "standard_form_b";
    case FieldKind::standard_form_c: return "standard_form_c";
    case FieldKind::gaussian_mixture: return "gaussian_mixture";
    case FieldKind::voxel_interpolant: return "voxel_interpolant";
    case FieldKind::custom: return "custom";
  }
  return "unknown";
}

std::string_view to_string(StandardForm form) {
  switch (form) {
    case StandardForm::a: return "a";
    case StandardForm::b: return "b";
    case StandardForm::c: return "c";
  }
  return "?";
}

StandardForm parse_standard_form(std::string_view text) {
  if (text == "a") return StandardForm::a;
  if (text == "b") return StandardForm::b;
  if (text == "c") return StandardForm::c;
  throw InvalidArgument("unknown standard form '" + std::string(text) + "' (expected a, b or c)");
}

ScalarField::ScalarField(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

int ScalarField::dimension() const noexcept { return impl_->n; }
FieldKind ScalarField::kind() const noexcept { return impl_->kind; }
const std::vector<double>& ScalarField::parameters() const noexcept { return impl_->parameters; }

double ScalarField::eval(const Point& x) const {
  require_dimension(x, impl_->n, "eval");
  return impl_->value(x.data());
}

double ScalarField::eval_unchecked(const double* x) const { return impl_->value(x); }

Vector ScalarField::gradient(const Point& x) const {
  require_dimension(x, impl_->n, "gradient");
  Vector g(impl_->n);
  Matrix h(impl_->n, impl_->n);
  impl_->derivatives(x.data(), g, h);
  return g;
}

Matrix ScalarField::hessian(const Point& x) const {
  require_dimension(x, impl_->n, "hessian");
  Vector g(impl_->n);
  Matrix h(impl_->n, impl_->n);
  impl_->derivatives(x.data(), g, h);
  return h;
}

namespace {

// Radial envelope shared by all blended fields:
//   f(x) = offset * G(s) + b(s) * F(x),  s = |x|^2
// with b == 1 for s <= r_in^2, b == 0 for s >= r_out^2, T(s) = exp(-s / R^2)
// and G = T + b (1 - T), so G == 1 on the inner ball.
struct Envelope {
  double radius = 1.0;  // R
  double inner2 = 0.25;
  double outer2 = 1.0;

  explicit Envelope(double r) : radius(r), inner2(0.25 * r * r), outer2(r * r) {}

  struct Radial {
    detail::Jet bump;
    detail::Jet floor;  // G
  };

  Radial at(double s) const {
    const double width = outer2 - inner2;
    const detail::Jet step = detail::smooth_step((s - inner2) / width);
    const detail::Jet b{1.0 - step.v, -step.d1 / width, -step.d2 / (width * width)};
    const double r2 = radius * radius;
    const double t = std::exp(-s / r2);
    const detail::Jet tail{t, -t / r2, t / (r2 * r2)};
    detail::Jet g;
    g.v = tail.v + b.v * (1.0 - tail.v);
    g.d1 = tail.d1 * (1.0 - b.v) + b.d1 * (1.0 - tail.v);
    g.d2 = tail.d2 * (1.0 - b.v) - 2.0 * tail.d1 * b.d1 + b.d2 * (1.0 - tail.v);
    return {b, g};
  }
};

class BlendedBase : public ScalarField::Impl {
 public:
  BlendedBase(double radius, double offset) : env_(radius), offset_(offset) {}

  double value(const double* x) const final {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += x[i] * x[i];
    if (s <= env_.inner2) return offset_ + local_value(x);
    if (s >= env_.outer2) return offset_ * std::exp(-s / (env_.radius * env_.radius));
    const auto r = env_.at(s);
    return offset_ * r.floor.v + r.bump.v * local_value(x);
  }

  void derivatives(const double* x, Vector& grad, Matrix& hess) const final {
    Eigen::Map<const Vector> xv(x, n);
    const double s = xv.squaredNorm();
    if (s >= env_.outer2) {
      const double r2 = env_.radius * env_.radius;
      const double t = offset_ * std::exp(-s / r2);
      grad = (-2.0 * t / r2) * xv;
      hess = (4.0 * t / (r2 * r2)) * xv * xv.transpose() - (2.0 * t / r2) * Matrix::Identity(n, n);
      return;
    }
    Vector lg(n);
    Matrix lh(n, n);
    const double lv = local_derivatives(x, lg, lh);
    if (s <= env_.inner2) {
      grad = lg;
      hess = lh;
      return;
    }
    const auto r = env_.at(s);
    const Matrix xxT = xv * xv.transpose();
    const Matrix id = Matrix::Identity(n, n);
    grad = 2.0 * (offset_ * r.floor.d1 + r.bump.d1 * lv) * xv + r.bump.v * lg;
    hess = offset_ * (4.0 * r.floor.d2 * xxT + 2.0 * r.floor.d1 * id) +
           lv * (4.0 * r.bump.d2 * xxT + 2.0 * r.bump.d1 * id) +
           2.0 * r.bump.d1 * (xv * lg.transpose() + lg * xv.transpose()) + r.bump.v * lh;
  }

 protected:
  virtual double local_value(const double* x) const = 0;
  virtual double local_derivatives(const double* x, Vector& grad, Matrix& hess) const = 0;

 private:
  Envelope env_;
  double offset_;
};

class StandardFormField final : public BlendedBase {
 public:
  StandardFormField(StandardForm form, int p, int q, int dim, double radius, double offset, bool negate)
      : BlendedBase(radius, offset), form_(form), p_(p), q_(q), sign_(negate ? -1.0 : 1.0) {
    n = dim;
  }

 protected:
  double local_value(const double* x) const override {
    double f = 0.0;
    switch (form_) {
      case StandardForm::a:
        f = x[n - 1];
        break;
      case StandardForm::b:
      case StandardForm::c:
        for (int i = 0; i < p_; ++i) f += x[i] * x[i];
        for (int i = p_; i < p_ + q_; ++i) f -= x[i] * x[i];
        if (form_ == StandardForm::c) f += x[n - 1];
        break;
    }
    return sign_ * f;
  }

  double local_derivatives(const double* x, Vector& grad, Matrix& hess) const override {
    grad.setZero(n);
    hess.setZero(n, n);
    if (form_ == StandardForm::a || form_ == StandardForm::c) grad[n - 1] = sign_;
    if (form_ != StandardForm::a) {
      for (int i = 0; i < p_ + q_; ++i) {
        const double s = (i < p_ ? 1.0 : -1.0) * sign_;
        grad[i] = 2.0 * s * x[i];
        hess(i, i) = 2.0 * s;
      }
    }
    return local_value(x);
  }

 private:
  StandardForm form_;
  int p_;
  int q_;
  double sign_;
};

class CustomBlendedField final : public BlendedBase {
 public:
  CustomBlendedField(int dim, LocalForm local, double radius, double offset)
      : BlendedBase(radius, offset), local_(std::move(local)) {
    n = dim;
    kind = FieldKind::custom;
  }

 protected:
  double local_value(const double* x) const override {
    return local_.value(Eigen::Map<const Vector>(x, n));
  }
  double local_derivatives(const double* x, Vector& grad, Matrix& hess) const override {
    const Point p = Eigen::Map<const Vector>(x, n);
    grad = local_.gradient(p);
    hess = local_.hessian(p);
    return local_.value(p);
  }

 private:
  LocalForm local_;
};

class GaussianMixtureField final : public ScalarField::Impl {
 public:
  GaussianMixtureField(int dim, std::vector<GaussianComponent> comps) : comps_(std::move(comps)) {
    n = dim;
    kind = FieldKind::gaussian_mixture;
    for (const auto& c : comps_) {
      parameters.push_back(c.amplitude);
      parameters.push_back(c.width);
      parameters.insert(parameters.end(), c.center.data(), c.center.data() + n);
    }
  }

  double value(const double* x) const override {
    double f = 0.0;
    for (const auto& c : comps_) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) {
        const double d = x[i] - c.center[i];
        s += d * d;
      }
      f += c.amplitude * std::exp(-s / (c.width * c.width));
    }
    return f;
  }

  void derivatives(const double* x, Vector& grad, Matrix& hess) const override {
    Eigen::Map<const Vector> xv(x, n);
    grad.setZero(n);
    hess.setZero(n, n);
    for (const auto& c : comps_) {
      const Vector d = xv - c.center;
      const double w2 = c.width * c.width;
      const double e = c.amplitude * std::exp(-d.squaredNorm() / w2);
      grad += (-2.0 * e / w2) * d;
      hess += (4.0 * e / (w2 * w2)) * d * d.transpose();
      hess.diagonal().array() -= 2.0 * e / w2;
    }
  }

 private:
  std::vector<GaussianComponent> comps_;
};

// Catmull-Rom (cubic convolution, a = -1/2) weights for taps -1, 0, 1, 2.
struct CubicWeights {
  std::array<double, 4> w{};
  std::array<double, 4> d1{};
  std::array<double, 4> d2{};
  std::array<int, 4> idx{};
};

CubicWeights cubic_weights(double x, double origin, double spacing, int dim, bool with_derivatives) {
  CubicWeights cw;
  double u = (x - origin) / spacing;
  bool clamped = false;
  if (u <= 0.0) {
    u = 0.0;
    clamped = true;
  } else if (u >= dim - 1) {
    u = dim - 1;
    clamped = true;
  }
  const double base = std::floor(u);
  const double t = u - base;
  const int i0 = static_cast<int>(base);
  for (int k = 0; k < 4; ++k) {
    int j = i0 - 1 + k;
    if (j < 0) j = 0;
    if (j > dim - 1) j = dim - 1;
    cw.idx[k] = j;
  }
  const double t2 = t * t;
  const double t3 = t2 * t;
  cw.w = {0.5 * (-t3 + 2.0 * t2 - t), 0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
          0.5 * (-3.0 * t3 + 4.0 * t2 + t), 0.5 * (t3 - t2)};
  if (with_derivatives && !clamped) {
    const double is = 1.0 / spacing;
    cw.d1 = {0.5 * (-3.0 * t2 + 4.0 * t - 1.0) * is, 0.5 * (9.0 * t2 - 10.0 * t) * is,
             0.5 * (-9.0 * t2 + 8.0 * t + 1.0) * is, 0.5 * (3.0 * t2 - 2.0 * t) * is};
    const double is2 = is * is;
    cw.d2 = {0.5 * (-6.0 * t + 4.0) * is2, 0.5 * (18.0 * t - 10.0) * is2,
             0.5 * (-18.0 * t + 8.0) * is2, 0.5 * (6.0 * t - 2.0) * is2};
  }
  return cw;
}

class VoxelInterpolantField final : public ScalarField::Impl {
 public:
  explicit VoxelInterpolantField(VoxelGrid grid) : grid_(std::move(grid)) {
    grid_.validate();
    n = grid_.dimension();
    kind = FieldKind::voxel_interpolant;
    strides_.resize(n);
    std::size_t s = 1;
    for (int d = 0; d < n; ++d) {
      strides_[d] = s;
      s *= static_cast<std::size_t>(grid_.dims[d]);
    }
    for (int d = 0; d < n; ++d) {
      parameters.push_back(grid_.dims[d]);
      parameters.push_back(grid_.spacing[d]);
      parameters.push_back(grid_.origin[d]);
    }
  }

  double value(const double* x) const override {
    std::array<CubicWeights, 8> small;
    std::vector<CubicWeights> big;
    CubicWeights* cw = small.data();
    if (n > static_cast<int>(small.size())) {
      big.resize(n);
      cw = big.data();
    }
    for (int d = 0; d < n; ++d) cw[d] = cubic_weights(x[d], grid_.origin[d], grid_.spacing[d], grid_.dims[d], false);
    return accumulate(cw, n - 1, 0, 1.0);
  }

  void derivatives(const double* x, Vector& grad, Matrix& hess) const override {
    std::vector<CubicWeights> cw(n);
    for (int d = 0; d < n; ++d) cw[d] = cubic_weights(x[d], grid_.origin[d], grid_.spacing[d], grid_.dims[d], true);
    grad.setZero(n);
    hess.setZero(n, n);
    const std::size_t taps = std::size_t{1} << (2 * n);
    std::vector<int> k(n, 0);
    for (std::size_t t = 0; t < taps; ++t) {
      std::size_t flat = 0;
      for (int d = 0; d < n; ++d) flat += strides_[d] * static_cast<std::size_t>(cw[d].idx[k[d]]);
      const double v = grid_.values[flat];
      for (int a = 0; a < n; ++a) {
        double g = v;
        for (int d = 0; d < n; ++d) g *= (d == a ? cw[d].d1[k[d]] : cw[d].w[k[d]]);
        grad[a] += g;
        for (int b = a; b < n; ++b) {
          double h = v;
          for (int d = 0; d < n; ++d) {
            if (d == a && d == b) h *= cw[d].d2[k[d]];
            else if (d == a || d == b) h *= cw[d].d1[k[d]];
            else h *= cw[d].w[k[d]];
          }
          hess(a, b) += h;
        }
      }
      for (int d = 0; d < n; ++d) {
        if (++k[d] < 4) break;
        k[d] = 0;
      }
    }
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < a; ++b) hess(a, b) = hess(b, a);
  }

 private:
  double accumulate(const CubicWeights* cw, int axis, std::size_t offset, double weight) const {
    double sum = 0.0;
    for (int k = 0; k < 4; ++k) {
      const double w = cw[axis].w[k];
      if (w == 0.0) continue;
      const std::size_t off = offset + strides_[axis] * static_cast<std::size_t>(cw[axis].idx[k]);
      if (axis == 0) sum += weight * w * grid_.values[off];
      else sum += accumulate(cw, axis - 1, off, weight * w);
    }
    return sum;
  }

  VoxelGrid grid_;
  std::vector<std::size_t> strides_;
};

class RotatedField final : public ScalarField::Impl {
 public:
  RotatedField(ScalarField base, Matrix q) : base_(std::move(base)), q_(std::move(q)) {
    n = base_.dimension();
    kind = FieldKind::custom;
  }

  double value(const double* x) const override {
    const Point y = q_.transpose() * Eigen::Map<const Vector>(x, n);
    return base_.eval_unchecked(y.data());
  }

  void derivatives(const double* x, Vector& grad, Matrix& hess) const override {
    const Point y = q_.transpose() * Eigen::Map<const Vector>(x, n);
    grad = q_ * base_.gradient(y);
    hess = q_ * base_.hessian(y) * q_.transpose();
  }

 private:
  ScalarField base_;
  Matrix q_;
};

double max_local_magnitude(StandardForm form, double radius) {
  switch (form) {
    case StandardForm::a: return radius;
    case StandardForm::b: return radius * radius;
    case StandardForm::c: return radius + radius * radius;
  }
  return radius;
}

}  // namespace

ScalarField make_standard_form(StandardForm form, int p, int q, int n, double envelope_radius, double offset,
                               bool negate) {
  if (n < 1) throw InvalidArgument("make_standard_form: dimension must be positive");
  if (!(envelope_radius > 0.0)) throw InvalidArgument("make_standard_form: envelope_radius must be > 0");
  if (p < 0 || q < 0) throw InvalidArgument("make_standard_form: p and q must be non-negative");
  switch (form) {
    case StandardForm::a:
      p = 0;
      q = 0;
      break;
    case StandardForm::b:
      if (p + q != n)
        throw InvalidArgument("make_standard_form: form b needs p + q = n (got p + q = " + std::to_string(p + q) +
                              ", n = " + std::to_string(n) + ")");
      break;
    case StandardForm::c:
      if (n < 2) throw InvalidArgument("make_standard_form: form c needs n >= 2");
      if (p + q != n - 1)
        throw InvalidArgument("make_standard_form: form c needs p + q = n - 1 (got p + q = " +
                              std::to_string(p + q) + ", n = " + std::to_string(n) + ")");
      break;
  }
  auto impl = std::make_shared<StandardFormField>(form, p, q, n, envelope_radius, offset, negate);
  impl->kind = form == StandardForm::a   ? FieldKind::standard_form_a
               : form == StandardForm::b ? FieldKind::standard_form_b
                                         : FieldKind::standard_form_c;
  impl->parameters = {static_cast<double>(static_cast<int>(form)), static_cast<double>(p), static_cast<double>(q),
                      static_cast<double>(n), envelope_radius, offset, negate ? 1.0 : 0.0};
  return ScalarField(std::move(impl));
}

double class_c_offset(StandardForm form, double envelope_radius) {
  // On the annulus where the bump is below one, 1 - T >= 1 - exp(-1/4).
  return max_local_magnitude(form, envelope_radius) / (1.0 - std::exp(-0.25));
}

ScalarField make_gaussian_mixture(int n, std::vector<GaussianComponent> components) {
  if (n < 1) throw InvalidArgument("make_gaussian_mixture: dimension must be positive");
  for (const auto& c : components) {
    require_dimension(c.center, n, "make_gaussian_mixture");
    if (!(c.width > 0.0)) throw InvalidArgument("make_gaussian_mixture: widths must be > 0");
  }
  return ScalarField(std::make_shared<GaussianMixtureField>(n, std::move(components)));
}

ScalarField make_blended(int n, LocalForm local, double envelope_radius, double offset) {
  if (n < 1) throw InvalidArgument("make_blended: dimension must be positive");
  if (!(envelope_radius > 0.0)) throw InvalidArgument("make_blended: envelope_radius must be > 0");
  if (!local.value || !local.gradient || !local.hessian)
    throw InvalidArgument("make_blended: value, gradient and hessian are all required");
  return ScalarField(std::make_shared<CustomBlendedField>(n, std::move(local), envelope_radius, offset));
}

ScalarField make_voxel_interpolant(VoxelGrid grid) {
  return ScalarField(std::make_shared<VoxelInterpolantField>(std::move(grid)));
}

ScalarField make_rotated(ScalarField field, Matrix rotation) {
  const int n = field.dimension();
  if (rotation.rows() != n || rotation.cols() != n) throw InvalidArgument("make_rotated: rotation has wrong shape");
  return ScalarField(std::make_shared<RotatedField>(std::move(field), std::move(rotation)));
}

VoxelGrid sample_to_grid(const ScalarField& field, const std::vector<int>& dims, const std::vector<double>& spacing,
                         const Point& origin) {
  const int n = field.dimension();
  if (static_cast<int>(dims.size()) != n || static_cast<int>(spacing.size()) != n || origin.size() != n)
    throw InvalidArgument("sample_to_grid: dims, spacing and origin must match the field dimension");
  for (int d : dims)
    if (d <= 0) throw InvalidArgument("sample_to_grid: zero-sized dimension");
  VoxelGrid grid{dims, spacing, origin, {}};
  grid.values.resize(grid.size());
  grid.validate();
  Point x(n);
  for (std::size_t i = 0; i < grid.values.size(); ++i) {
    x = grid.voxel_center(i);
    grid.values[i] = field.eval_unchecked(x.data());
  }
  return grid;
}

}  // namespace levelvol
