#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "bicons/numerics.hpp"

using namespace bicons;

namespace {

// Plain bisection to the last representable bracket; the oracle for Brent.
template <class F>
double bisect(F f, double a, double b) {
  double fa = f(a);
  for (int i = 0; i < 200; ++i) {
    const double m = 0.5 * (a + b);
    if (m == a || m == b) break;
    const double fm = f(m);
    if ((fm < 0.0) == (fa < 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

TEST(Roots, BrentMatchesBisection) {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> shift(-2.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    const double c = shift(rng);
    auto f = [c](double x) { return std::tanh(x - c) + 0.1 * (x - c) * (x - c) * (x - c); };
    const double r = find_bracketed_root(f, {-5.0, 5.0});
    EXPECT_NEAR(r, bisect(f, -5.0, 5.0), 2e-12);
    EXPECT_NEAR(r, c, 2e-12);
  }
}

TEST(Roots, NoSignChangeThrows) {
  auto f = [](double x) { return x * x + 1.0; };
  try {
    find_bracketed_root(f, {-1.0, 1.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NoSignChange);
  }
}

TEST(Roots, ExpandBracketFindsSignChange) {
  auto f = [](double x) { return x - 37.5; };
  const RootBracket b = expand_bracket_upward(f, 0.0, 1.0);
  EXPECT_LE(f(b.a) * f(b.b), 0.0);
  EXPECT_NEAR(find_bracketed_root(f, b), 37.5, 1e-11);
}

TEST(Quadrature, AdaptiveSmooth) {
  const auto r = integrate_adaptive([](double x) { return std::exp(x) * std::cos(3 * x); }, 0.0, 2.0, 1e-13);
  const double exact = (std::exp(2.0) * (std::cos(6.0) + 3 * std::sin(6.0)) - 1.0) / 10.0;
  EXPECT_NEAR(r.value, exact, 1e-12);
}

TEST(Quadrature, InverseSquareRootEndpoints) {
  QuadratureSpec upper;
  upper.upper_exponent = -0.5;
  upper.abs_tol = 1e-13;
  EXPECT_NEAR(integrate_singular([](double, double, double dhi) { return 1.0 / std::sqrt(dhi); }, 0.0, 1.0, upper), 2.0, 1e-11);

  QuadratureSpec both = upper;
  both.lower_exponent = -0.5;
  auto arcsine = [](double, double dlo, double dhi) { return 1.0 / std::sqrt(dlo * dhi); };
  EXPECT_NEAR(integrate_singular(arcsine, 0.0, 1.0, both), std::numbers::pi, 1e-10);
}

TEST(Quadrature, TanhSinhAgreesWithTransformedScheme) {
  auto f = [](double t, double, double dhi) { return std::exp(t) / std::sqrt(dhi); };
  QuadratureSpec spec;
  spec.upper_exponent = -0.5;
  spec.abs_tol = 1e-13;
  const double a = integrate_singular(f, 0.0, 1.0, spec);
  const double b = integrate_tanh_sinh(f, 0.0, 1.0, 1e-13).value;
  EXPECT_NEAR(a, b, 1e-10);
}

TEST(Quadrature, ReversedLimitsFlipSign) {
  auto f = [](double x) { return x * x; };
  EXPECT_NEAR(integrate_adaptive(f, 1.0, 0.0, 1e-14).value, -1.0 / 3.0, 1e-14);
}

TEST(FiniteDifferences, SymmetricAndOneSided) {
  auto f = [](double x) { return std::sin(x); };
  const double x = 0.7;
  EXPECT_NEAR(fd_derivative(f, x, 1, 1e-2), std::cos(x), 1e-9);
  EXPECT_NEAR(fd_derivative(f, x, 2, 1e-2), -std::sin(x), 1e-8);
  EXPECT_NEAR(fd_derivative(f, x, 3, 1e-2), -std::cos(x), 1e-6);
  EXPECT_NEAR(fd_derivative(f, x, 1, 1e-3, Side::left), std::cos(x), 1e-9);
  EXPECT_NEAR(fd_derivative(f, x, 1, 1e-3, Side::right), std::cos(x), 1e-9);
  EXPECT_NEAR(fd_derivative(f, x, 2, 1e-3, Side::right), -std::sin(x), 1e-5);
}

// One Richardson step on a second-order stencil gives fourth order: halving h
// in the truncation regime cuts the error by about 16.
TEST(FiniteDifferences, RichardsonOrderOnSmoothFunction) {
  auto f = [](double x) { return std::exp(std::sin(x)); };
  auto exact = [](double x) { return std::cos(x) * std::exp(std::sin(x)); };
  const double x = 0.3;
  const double e1 = std::fabs(fd_derivative(f, x, 1, 0.2) - exact(x));
  const double e2 = std::fabs(fd_derivative(f, x, 1, 0.1) - exact(x));
  const double ratio = e1 / e2;
  EXPECT_GT(ratio, 12.0);
  EXPECT_LT(ratio, 20.0);
}

TEST(FiniteDifferences, DomainGuard) {
  auto f = [](double x) { return std::sqrt(x); };
  try {
    fd_derivative(f, 0.001, 1, 0.01, Side::symmetric, Interval{0.0, 1.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::StencilOutOfDomain);
  }
  EXPECT_NEAR(fd_derivative(f, 0.5, 1, 0.01, Side::symmetric, Interval{0.0, 1.0}), 0.5 / std::sqrt(0.5), 1e-8);
}

TEST(CumulativeTable, ValuesAndInverse) {
  CumulativeIntegral F([](double z) { return 1.0 + z * z; }, uniform_nodes(0.0, 2.0, 33));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int i = 0; i < 100; ++i) {
    const double z = u(rng);
    const double v = z + z * z * z / 3.0;
    EXPECT_NEAR(F(z), v, 1e-13);
    EXPECT_NEAR(F.inverse(v), z, 1e-12);
  }
  EXPECT_THROW(F(-0.1), Error);
}

TEST(CumulativeTable, MonotoneInversion) {
  auto g = [](double x) { return x * x * x + x; };
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 50; ++i) {
    const double x = u(rng);
    EXPECT_NEAR(invert_monotone(g, g(x), {-4.0, 4.0}), x, 1e-12);
  }
}

TEST(CumulativeTable, UnbuiltTableThrows) {
  const CumulativeIntegral F;
  try {
    F(0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::TableNotFrozen);
  }
}
