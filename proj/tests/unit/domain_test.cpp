#include <levelvol/domain.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace levelvol;

TEST(Ball, ConstraintAndBox) {
  Point c(2);
  c << 0.1, -0.2;
  const Domain d = make_ball(c, 0.5);
  EXPECT_EQ(d.kind(), DomainKind::ball);
  EXPECT_TRUE(d.smooth_boundary());
  EXPECT_TRUE(d.contains(c));
  Point x = c;
  x[0] += 0.5;
  EXPECT_NEAR(d.constraint(x), 0.0, 1e-15);
  EXPECT_TRUE(d.constraint_gradient(x).isApprox(Vector::Unit(2, 0)));
  EXPECT_NEAR(d.bounding_box().volume(), 1.0, 0.01);
  EXPECT_GE(d.bounding_box().volume(), 1.0);
  EXPECT_THROW(make_ball(c, 0.0), InvalidArgument);
  EXPECT_THROW(d.constraint(Point::Zero(3)), InvalidArgument);
}

TEST(Slab, FlatBottomIsZetaZero) {
  const Domain d = make_slab(3, 0.6, 0.7, 100.0);
  for (double r : {0.0, 0.3, 0.59}) {
    Point x(3);
    x << r, 0.0, 0.0;
    EXPECT_EQ(d.constraint(x), 0.0);
    x[2] = 0.1;
    EXPECT_LT(d.constraint(x), 0.0);
    x[2] = -0.01;
    EXPECT_GT(d.constraint(x), 0.0);
  }
  Point far(3);
  far << 0.9, 0.0, 0.35;
  EXPECT_GT(d.constraint(far), 0.0);
  validate_domain(d);
}

TEST(Slab, AxisShiftsTheWall) {
  Point axis(1);
  axis << 0.3;
  const Domain d = make_slab(2, 0.5, 0.7, 100.0, axis);
  Point inside(2), outside(2);
  inside << 0.75, 0.3;
  outside << -0.6, 0.3;
  EXPECT_LT(d.constraint(inside), 0.0);
  EXPECT_GT(d.constraint(outside), 0.0);
  EXPECT_THROW(make_slab(2, 0.5, 0.7, 100.0, Point::Zero(2)), InvalidArgument);
  EXPECT_THROW(make_slab(1, 0.5, 0.7, 100.0), InvalidArgument);
}

TEST(Box, NotSmooth) {
  const Domain d = make_box({Vector::Zero(2), Vector::Ones(2)});
  EXPECT_FALSE(d.smooth_boundary());
  Point x(2);
  x << 0.5, 0.5;
  EXPECT_TRUE(d.contains(x));
  x << 1.5, 0.5;
  EXPECT_FALSE(d.contains(x));
}

TEST(Implicit, AcceptsEllipse) {
  ImplicitConstraint c{[](const Point& x) { return x[0] * x[0] / 4 + x[1] * x[1] - 1; },
                       [](const Point& x) {
                         Vector g(2);
                         g << x[0] / 2, 2 * x[1];
                         return g;
                       },
                       [](const Point&) {
                         Matrix h = Matrix::Zero(2, 2);
                         h(0, 0) = 0.5;
                         h(1, 1) = 2;
                         return h;
                       }};
  const Domain d = make_implicit(2, c, {Vector::Constant(2, -3), Vector::Constant(2, 3)});
  EXPECT_EQ(d.kind(), DomainKind::implicit);
  EXPECT_TRUE(d.contains(Point::Zero(2)));
}

TEST(Implicit, RejectsNonCompact) {
  // Half-plane x0 <= 0 reaches the box surface.
  ImplicitConstraint c{[](const Point& x) { return x[0]; }, [](const Point&) { return Vector(Vector::Unit(2, 0)); },
                       [](const Point&) { return Matrix(Matrix::Zero(2, 2)); }};
  EXPECT_THROW(make_implicit(2, c, {Vector::Constant(2, -1), Vector::Constant(2, 1)}), InvalidArgument);
}

TEST(Implicit, RejectsEmpty) {
  ImplicitConstraint c{[](const Point& x) { return 1.0 + x.squaredNorm(); },
                       [](const Point& x) { return Vector(2 * x); },
                       [](const Point&) { return Matrix(2 * Matrix::Identity(2, 2)); }};
  EXPECT_THROW(make_implicit(2, c, {Vector::Constant(2, -1), Vector::Constant(2, 1)}), InvalidArgument);
}
