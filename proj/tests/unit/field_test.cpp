#include <levelvol/field.hpp>
#include <levelvol/morse.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace levelvol;

namespace {

Point pt(std::initializer_list<double> v) {
  Point x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) x[i++] = d;
  return x;
}

void expect_derivatives_match(const ScalarField& f, const Point& x, double tol) {
  const double e = 1e-5;
  const Vector g = f.gradient(x);
  const Matrix h = f.hessian(x);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Point a = x, b = x;
    a[i] += e;
    b[i] -= e;
    EXPECT_NEAR(g[i], (f.eval(a) - f.eval(b)) / (2 * e), tol) << "gradient " << i;
    const Vector gd = (f.gradient(a) - f.gradient(b)) / (2 * e);
    for (Eigen::Index j = 0; j < x.size(); ++j) EXPECT_NEAR(h(j, i), gd[j], tol) << "hessian " << j << i;
  }
  EXPECT_LE((h - h.transpose()).norm(), 1e-12);
}

}  // namespace

TEST(StandardForm, MinimumAtOrigin) {
  const auto f = make_standard_form(StandardForm::b, 2, 0, 2, 4.0);
  const Point o = Point::Zero(2);
  EXPECT_DOUBLE_EQ(f.eval(o), 0.0);
  EXPECT_EQ(f.gradient(o).norm(), 0.0);
  const Signature s = signature(f.hessian(o), 1e-12);
  EXPECT_EQ(s.p, 2);
  EXPECT_EQ(s.q, 0);
}

TEST(StandardForm, SaddleValues) {
  const auto f = make_standard_form(StandardForm::b, 1, 1, 2, 4.0);
  EXPECT_DOUBLE_EQ(f.eval(pt({1, 1})), 0.0);
  EXPECT_DOUBLE_EQ(f.gradient(Point::Zero(2)).norm(), 0.0);
  const Matrix h = f.hessian(Point::Zero(2));
  EXPECT_DOUBLE_EQ(h(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(h(1, 1), -2.0);
  EXPECT_DOUBLE_EQ(h(0, 1), 0.0);
  // (2, 1) lies in the inner ball once the envelope is wide enough.
  EXPECT_DOUBLE_EQ(make_standard_form(StandardForm::b, 1, 1, 2, 8.0).eval(pt({2, 1})), 3.0);
}

TEST(StandardForm, BoundaryForm) {
  const auto f = make_standard_form(StandardForm::c, 1, 0, 2, 4.0);
  EXPECT_NEAR(f.eval(pt({0.1, 0.2})), 0.21, 1e-15);
}

TEST(StandardForm, RegularForm) {
  EXPECT_DOUBLE_EQ(make_standard_form(StandardForm::a, 1, 0, 2, 8.0).eval(pt({3.2, 0.5})), 0.5);
}

TEST(StandardForm, NegateSwapsType) {
  const auto f = make_standard_form(StandardForm::b, 2, 1, 3, 4.0, 0.0, true);
  const Signature s = signature(f.hessian(Point::Zero(3)), 1e-12);
  EXPECT_EQ(s.p, 1);
  EXPECT_EQ(s.q, 2);
}

TEST(StandardForm, RejectsBadTypes) {
  EXPECT_THROW(make_standard_form(StandardForm::b, 1, 1, 3, 4.0), InvalidArgument);
  EXPECT_THROW(make_standard_form(StandardForm::c, 1, 1, 2, 4.0), InvalidArgument);
  EXPECT_THROW(make_standard_form(StandardForm::c, 0, 0, 1, 4.0), InvalidArgument);
  EXPECT_THROW(make_standard_form(StandardForm::b, 1, 1, 2, 4.0).eval(Point::Zero(3)), InvalidArgument);
}

TEST(StandardForm, DerivativesMatchFiniteDifferences) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-3.5, 3.5);
  for (auto [form, p, q, n] : {std::tuple{StandardForm::b, 1, 2, 3}, std::tuple{StandardForm::c, 1, 1, 3},
                               std::tuple{StandardForm::a, 0, 0, 2}}) {
    const auto f = make_standard_form(form, p, q, n, 4.0, 0.3);
    for (int t = 0; t < 20; ++t) {
      Point x(n);
      for (int i = 0; i < n; ++i) x[i] = u(rng);
      expect_derivatives_match(f, x, 1e-5);
    }
  }
}

TEST(StandardForm, DecaysBeyondEnvelope) {
  const double r = 4.0;
  const auto f = make_standard_form(StandardForm::b, 1, 1, 2, r, class_c_offset(StandardForm::b, r));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  double prev = std::numeric_limits<double>::infinity();
  for (double scale : {2.0, 4.0, 8.0}) {
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      Point x(2);
      x << g(rng), g(rng);
      x *= scale * r / x.norm();
      worst = std::max(worst, std::abs(f.eval(x)));
    }
    EXPECT_LE(worst, prev);
    prev = worst;
  }
  EXPECT_LT(prev, 1e-6);
}

TEST(GaussianMixture, ValueAndDerivatives) {
  const auto one = make_gaussian_mixture(2, {{Point::Zero(2), 1.0, 2.5}});
  EXPECT_DOUBLE_EQ(one.eval(Point::Zero(2)), 2.5);
  const auto unit = make_gaussian_mixture(2, {{Point::Zero(2), 1.0, 1.0}});
  EXPECT_EQ(unit.gradient(Point::Zero(2)).norm(), 0.0);
  EXPECT_TRUE(unit.hessian(Point::Zero(2)).isApprox(-2.0 * Matrix::Identity(2, 2)));
  const auto two = make_gaussian_mixture(2, {{pt({-0.5, 0}), 0.4, 1.0}, {pt({0.6, 0.1}), 0.3, 0.3}});
  expect_derivatives_match(two, pt({0.1, -0.2}), 1e-6);
}

TEST(VoxelInterpolant, ExactOnQuadratics) {
  const auto f = make_standard_form(StandardForm::b, 1, 1, 2, 8.0);
  const VoxelGrid g = sample_to_grid(f, {16, 16}, {0.125, 0.125}, pt({-0.9375, -0.9375}));
  const auto fi = make_voxel_interpolant(g);
  for (const Point& x : {pt({0.0, 0.0}), pt({0.31, -0.17}), pt({-0.5, 0.44})}) {
    EXPECT_NEAR(fi.eval(x), f.eval(x), 1e-12);
    EXPECT_NEAR((fi.gradient(x) - f.gradient(x)).norm(), 0.0, 1e-11);
  }
  expect_derivatives_match(fi, pt({0.123, 0.456}), 1e-5);
}

TEST(VoxelInterpolant, ConstantGrid) {
  VoxelGrid g{{2, 2}, {1.0, 1.0}, Point::Zero(2), {1, 1, 1, 1}};
  EXPECT_DOUBLE_EQ(make_voxel_interpolant(g).eval(pt({0.5, 0.5})), 1.0);
}

TEST(SampleToGrid, LineAlongEta) {
  const auto f = make_standard_form(StandardForm::a, 0, 0, 1, 4.0);
  const VoxelGrid g = sample_to_grid(f, {3}, {1.0}, pt({-1.0}));
  ASSERT_EQ(g.values.size(), 3u);
  EXPECT_DOUBLE_EQ(g.values[0], -1.0);
  EXPECT_DOUBLE_EQ(g.values[1], 0.0);
  EXPECT_DOUBLE_EQ(g.values[2], 1.0);
  EXPECT_THROW(sample_to_grid(f, {0}, {1.0}, pt({0.0})), InvalidArgument);
}

TEST(Rotated, PreservesHessianSpectrum) {
  const auto f = make_standard_form(StandardForm::b, 1, 1, 2, 4.0);
  Matrix q(2, 2);
  const double c = std::cos(0.3), s = std::sin(0.3);
  q << c, -s, s, c;
  const auto r = make_rotated(f, q);
  EXPECT_NEAR(r.eval(q * pt({0.2, 0.1})), f.eval(pt({0.2, 0.1})), 1e-15);
  const Signature sig = signature(r.hessian(Point::Zero(2)), 1e-12);
  EXPECT_EQ(sig.p, 1);
  EXPECT_EQ(sig.q, 1);
}
