#include <seqlab/complexity.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace seqlab;

namespace {

// Direct sum of C* (i+1)^1.75 R^i |c_i| for exp, far past any truncation.
double exp_c_s(double R) {
  double s = 0.0, fact = 1.0;
  for (int i = 0; i < 60; ++i) {
    if (i > 0) fact *= i;
    s += std::pow(i + 1.0, 1.75) * std::pow(R, i) / fact;
  }
  return kComplexityScale * s;
}

}  // namespace

TEST(Taylor, MonomialAndQuadraticCoefficients) {
  const TaylorSeries m2 = taylor_preset("monomial:2");
  ASSERT_EQ(m2.coeffs.size(), 3u);
  EXPECT_EQ(m2.coeffs[0], 0.0);
  EXPECT_EQ(m2.coeffs[1], 0.0);
  EXPECT_EQ(m2.coeffs[2], 1.0);
  EXPECT_TRUE(m2.is_polynomial());
  const TaylorSeries q = taylor_preset("quadratic_2z_minus_z2");
  ASSERT_EQ(q.coeffs.size(), 3u);
  EXPECT_EQ(q.coeffs[1], 2.0);
  EXPECT_EQ(q.coeffs[2], -1.0);
  EXPECT_DOUBLE_EQ(q(0.5), 0.75);
  EXPECT_DOUBLE_EQ(q.derivative(0.5), 1.0);
}

TEST(Taylor, EntireFunctionsTruncateAccurately) {
  for (const char* name : {"exp", "sin", "cos"}) {
    const TaylorSeries s = taylor_preset(name, 1.0);
    EXPECT_FALSE(s.is_polynomial()) << name;
    EXPECT_GE(s.K(), 10u) << name;
  }
  const TaylorSeries e = taylor_preset("exp", 1.0);
  for (double z : {-1.0, -0.3, 0.0, 0.7, 1.0}) EXPECT_NEAR(e(z), std::exp(z), 1e-14);
  const TaylorSeries c = taylor_preset("cos_pi", 1.0);
  EXPECT_NEAR(c(1.0), -1.0, 1e-12);
  EXPECT_THROW(taylor_preset("tan"), std::invalid_argument);
  EXPECT_THROW(taylor_preset("monomial:x"), std::invalid_argument);
}

TEST(Complexity, ZeroSeries) {
  const TaylorSeries zero{"zero", {0.0}, {}};
  const ComplexityReport r = complexity_report(zero, 1.0, 0.1);
  EXPECT_EQ(r.c_s, 0.0);
  EXPECT_EQ(r.c_eps, 0.0);
  EXPECT_EQ(r.log_c_s, -std::numeric_limits<double>::infinity());
}

TEST(Complexity, SquareExactValues) {
  const ComplexityReport r = complexity_report(taylor_preset("monomial:2"), 1.0, std::exp(-2.0));
  EXPECT_NEAR(r.c_s, 1e4 * std::pow(3.0, 1.75), 1e-6);
  EXPECT_NEAR(r.c_s, 68385.2117, 1e-3);
  // (C*)^2 + (sqrt(2 / 2) C*)^2
  EXPECT_NEAR(r.c_eps, 2e8, 1e-4);
  EXPECT_EQ(r.truncation_tail_bound, 0.0);
}

TEST(Complexity, MonomialFormula) {
  for (int n = 1; n <= 5; ++n) {
    const ComplexityReport r = complexity_report(taylor_preset("monomial:" + std::to_string(n)), 1.0, 0.1);
    EXPECT_NEAR(r.c_s, 1e4 * std::pow(n + 1.0, 1.75), 1e-8 * r.c_s) << n;
    const double expect_eps = std::pow(1e4, n) * (1.0 + std::pow(std::log(10.0) / n, n / 2.0));
    EXPECT_NEAR(r.c_eps, expect_eps, 1e-10 * expect_eps) << n;
  }
}

TEST(Complexity, ExpMatchesDirectSum) {
  const ComplexityReport r = complexity_report(taylor_preset("exp", 1.0), 1.0, 0.1);
  EXPECT_NEAR(r.c_s, exp_c_s(1.0), 1e-9 * r.c_s);
  EXPECT_NEAR(r.c_s, 1.06e5, 0.01 * 1.06e5);
  EXPECT_LT(r.truncation_tail_bound, 1e-10 * r.c_s);
}

TEST(Complexity, MonotoneInRadius) {
  for (const char* name : {"exp", "sin", "monomial:3"}) {
    double last_s = -1e300, last_e = -1e300;
    for (double R : {0.25, 0.5, 1.0, 2.0}) {
      const ComplexityReport r = complexity_report(taylor_preset(name, R), R, 0.1);
      EXPECT_GT(r.log_c_s, last_s) << name << " R=" << R;
      EXPECT_GT(r.log_c_eps, last_e) << name << " R=" << R;
      last_s = r.log_c_s;
      last_e = r.log_c_eps;
    }
  }
}

TEST(Complexity, RejectsBadArguments) {
  const TaylorSeries s = taylor_preset("monomial:2");
  EXPECT_THROW(complexity_report(s, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(complexity_report(s, 1.0, 0.0), std::invalid_argument);
  EXPECT_THROW(complexity_report(s, -1.0, 0.1), std::invalid_argument);
}
