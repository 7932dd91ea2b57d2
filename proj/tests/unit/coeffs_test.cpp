#include <levelvol/coeffs.hpp>
#include <levelvol/quadrature.hpp>
#include <levelvol/types.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace levelvol;

TEST(Classify, ParityRule) {
  EXPECT_EQ(classify(2, 2).kind, DiscontinuityKind::jump);
  EXPECT_EQ(classify(2, 2).break_order, 2);
  EXPECT_EQ(classify(1, 1).kind, DiscontinuityKind::log_like);
  EXPECT_EQ(classify(1, 1).break_order, 1);
  EXPECT_EQ(classify(1, 2).kind, DiscontinuityKind::root_like);
  EXPECT_EQ(classify(1, 2).break_order, 2);
  EXPECT_EQ(classify(3, 0).kind, DiscontinuityKind::root_like);
  EXPECT_EQ(classify(2, 0, true).kind, DiscontinuityKind::jump);
  EXPECT_EQ(classify(2, 0, true).break_order, 2);
  EXPECT_EQ(classify(1, 0, true).kind, DiscontinuityKind::root_like);
  EXPECT_EQ(classify(1, 0, true).break_order, 2);
  EXPECT_THROW(classify(0, 0), InvalidArgument);
}

TEST(Sigma, SmallCases) {
  EXPECT_EQ(sigma1(1, 1), 0);
  EXPECT_EQ(sigma2(1, 1), 1);
}

TEST(Sigma, ParityLaws) {
  for (int p = 1; p <= 8; ++p) {
    for (int q = 1; q <= 8; ++q) {
      if (q % 2 == 1) {
        EXPECT_EQ(sigma1(p, q), 0) << p << "," << q;
      }
      if (p % 2 == 0 || q % 2 == 0) {
        EXPECT_EQ(sigma2(p, q), 0) << p << "," << q;
      }
      const Expansion e = expansion(p, q);
      EXPECT_EQ(e.gamma_plus, e.gamma_minus) << p << "," << q;
    }
  }
}

TEST(Expansion, SpecValues) {
  EXPECT_EQ(expansion(1, 1).gamma, Rational(1) / 2);
  EXPECT_EQ(to_string(expansion(1, 1).gamma), "1/2");
  EXPECT_EQ(expansion(2, 2).beta, 0);
  EXPECT_EQ(expansion(1, 2).singular_power, Rational(3) / 2);
  EXPECT_EQ(to_string(Rational(-3) / 2), "-3/2");
  EXPECT_EQ(to_string(Rational(0)), "0/1");
  EXPECT_THROW(expansion(0, 2), InvalidArgument);
}

TEST(Expansion, AlphaSwapLaw) {
  for (int p = 1; p <= 6; ++p)
    for (int q = 1; q <= 6; ++q) EXPECT_EQ(expansion(p, q).alpha_plus, -expansion(q, p).alpha_minus) << p << q;
}

TEST(Expansion, BoundaryDeltaIsPrintedGamma) {
  for (int p = 1; p <= 5; ++p)
    for (int q = 1; q <= 5; ++q) {
      EXPECT_EQ(expansion(p, q, true).delta, printed_gamma(p, q));
      EXPECT_EQ(expansion(p, q).gamma, printed_gamma(p, q));
    }
}

TEST(EvalI, SpecValues) {
  const Expansion e = expansion(1, 1);
  EXPECT_DOUBLE_EQ(eval_I(e, 0.0), 0.5);
  EXPECT_NEAR(eval_I(e, 0.25), 0.5 + 0.125 + 0.25 * std::log(2.0), 1e-14);
  EXPECT_THROW(eval_I(e, 1.0), InvalidArgument);
  EXPECT_THROW(eval_I(e, -1.5), InvalidArgument);
}

TEST(Oracle, SpecValues) {
  EXPECT_NEAR(oracle_I(1, 1, false, 0.0, 1e-10), 0.5, 1e-12);
  EXPECT_NEAR(oracle_I(1, 1, false, -0.09), -0.09 * std::log(1 / 0.3) + 0.91 / 2, 1e-12);
  EXPECT_THROW(oracle_I(1, 1, false, 1.0), InvalidArgument);
  EXPECT_THROW(oracle_I(0, 1, false, 0.1), InvalidArgument);
}

TEST(Oracle, MatchesExpansion) {
  for (int b = 0; b < 2; ++b)
    for (int p = 1; p <= 4; ++p)
      for (int q = 1; q <= 4; ++q) {
        const Expansion e = expansion(p, q, b == 1);
        for (double h : {-0.3, -0.1, -0.05, -0.01, 0.01, 0.05, 0.1, 0.3})
          EXPECT_NEAR(eval_I(e, h), oracle_I(p, q, b == 1, h), 1e-12) << p << q << b << " h=" << h;
      }
}

TEST(OneSidedDerivative, JumpAndDivergence) {
  // (2,2): second derivative jumps by 2 (alpha_plus - alpha_minus) * 2.
  const Expansion e = expansion(2, 2);
  const double jump = one_sided_derivative_at_zero(e, 2, 1) - one_sided_derivative_at_zero(e, 2, -1);
  EXPECT_NEAR(jump, 2.0 * (e.alpha_plus - e.alpha_minus).convert_to<double>(), 1e-14);
  EXPECT_TRUE(std::isinf(one_sided_derivative_at_zero(expansion(1, 1), 1, 1)));
  EXPECT_TRUE(std::isinf(one_sided_derivative_at_zero(expansion(1, 2), 2, 1)));
  EXPECT_TRUE(std::isfinite(one_sided_derivative_at_zero(expansion(1, 2), 1, 1)));
}

TEST(CoeffTable, Rows) {
  std::ostringstream s;
  write_coeff_table(s, 2, 2);
  std::istringstream in(s.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "p,q,boundary,gamma,alpha_plus,alpha_minus,beta,delta,singular_power,kind");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    if (line.rfind("1,1,", 0) == 0) {
      EXPECT_NE(line.find(",-1/1,"), std::string::npos) << line;
    }
    if (line.rfind("1,2,", 0) == 0 || line.rfind("2,2,", 0) == 0) {
      EXPECT_NE(line.find(",0/1,,"), std::string::npos) << line;
    }
  }
  EXPECT_EQ(rows, 4);
  std::ostringstream b;
  write_coeff_table(b, 1, 1, true);
  EXPECT_NE(b.str().find("\n1,1,1,"), std::string::npos);
}
