#include <cmath>
#include <map>
#include <memory>
#include <random>

#include <gtest/gtest.h>

#include "bicons/intrinsic.hpp"

using namespace bicons;

namespace {

const IntrinsicParams& family(double c) {
  static std::map<double, std::unique_ptr<IntrinsicParams>> cache;
  auto& slot = cache[c];
  if (!slot) slot = std::make_unique<IntrinsicParams>(c);
  return *slot;
}

double bisect_T_zero(double c) {
  double a = 1e-3, b = 10.0;
  for (int i = 0; i < 200; ++i) {
    const double m = 0.5 * (a + b);
    if (m == a || m == b) break;
    (T_eval(m, c) > 0.0 ? a : b) = m;
  }
  return 0.5 * (a + b);
}

// rho1 = -int_{xi00}^{xi01} sqrt(3 / (tau^2 T(tau))) dtau by tanh-sinh in the
// original variable. Near xi01, T(xi01 - w) is expanded around its zero so the
// integrand sees the exact distance w.
double rho1_tanh_sinh(const IntrinsicParams& p) {
  const double a = p.xi01(), c = p.cminus1();
  auto f = [a, c](double tau, double, double w) {
    const double T = -std::pow(a, 8.0 / 3.0) * std::expm1((8.0 / 3.0) * std::log1p(-w / a)) - c * w * (2.0 * a - w);
    return std::sqrt(3.0 / (tau * tau * T));
  };
  return -integrate_tanh_sinh(f, p.xi00(), a, 1e-13).value;
}

}  // namespace

TEST(Roots, ClosedFormForZeroConstant) { EXPECT_NEAR(xi01(0.0), std::pow(3.0, 3.0 / 8.0), 1e-10); }

TEST(Roots, BrentAgreesWithBisection) {
  for (double c : {-3.0, -1.0, 0.0, 0.5, 1.0, 4.0}) {
    const double r = xi01(c);
    EXPECT_NEAR(r, bisect_T_zero(c), 1e-12) << c;
    EXPECT_NEAR(T_eval(r, c), 0.0, 1e-11) << c;
  }
}

TEST(Roots, BoundForPositiveConstant) { EXPECT_GT(xi01(1.0), std::pow(0.75, 1.5)); }

TEST(Roots, GrowsWithConstant) {
  double prev = 0.0;
  for (double c = -4.0; c <= 4.0; c += 0.25) {
    const double r = xi01(c);
    EXPECT_GT(r, prev);
    prev = r;
  }
}

TEST(Rho, EndpointValueIsNegativeAndFinite) {
  for (double c : {-1.0, 0.0, 1.0}) {
    const double r = family(c).rho1();
    EXPECT_TRUE(std::isfinite(r));
    EXPECT_LT(r, 0.0);
    EXPECT_DOUBLE_EQ(family(c).rho(family(c).xi01()), r);
  }
}

TEST(Rho, TwoQuadratureSchemesAgree) {
  for (double c : {-1.0, 0.0, 1.0}) EXPECT_NEAR(family(c).rho1(), rho1_tanh_sinh(family(c)), 1e-8) << c;
}

TEST(Rho, LogarithmicDivergenceAtZero) {
  for (double c : {-1.0, 0.0, 1.0}) {
    const auto& p = family(c);
    EXPECT_GT(p.rho(1e-40), 90.0);
    EXPECT_GT(p.rho_at_log_xi(-1100.0), 1e3);
    // The tail integrand tends to 1, so rho grows like -log xi.
    EXPECT_NEAR(p.rho_at_log_xi(-600.0) - p.rho_at_log_xi(-500.0), 100.0, 1e-6);
  }
}

TEST(Rho, StrictlyDecreasingAndInvertible) {
  std::mt19937_64 rng(2024);
  for (double c : {-1.0, 0.0, 1.0}) {
    const auto& p = family(c);
    std::uniform_real_distribution<double> u(1e-6, p.xi01());
    for (int i = 0; i < 200; ++i) {
      double x = u(rng), y = u(rng);
      if (x > y) std::swap(x, y);
      if (x == y) continue;
      EXPECT_GT(p.rho(x), p.rho(y));
      EXPECT_NEAR(p.xi_of_rho(p.rho(x)), x, 1e-10 * std::max(1.0, x));
    }
  }
}

TEST(Rho, OutOfDomainThrows) {
  const auto& p = family(0.0);
  EXPECT_THROW(p.rho(0.0), Error);
  EXPECT_THROW(p.rho(p.xi01() * 1.01), Error);
  EXPECT_THROW(T_eval(-1.0, 0.0), Error);
}

TEST(Curvature, ClosedFormMatchesWarpedProduct) {
  for (double c : {-1.0, 0.0, 1.0}) {
    const auto& p = family(c);
    for (int i = 0; i < 100; ++i) {
      const double w = -3.0 + 6.0 * (i + 0.5) / 100.0;
      EXPECT_NEAR(tilde_K(w, p), tilde_K_fd(w, p), 1e-6) << "C-1 = " << c << ", omega = " << w;
    }
  }
}

TEST(Curvature, SeamValueAndFlatGradient) {
  for (double c : {-1.0, 0.0, 1.0}) {
    const auto& p = family(c);
    EXPECT_NEAR(tilde_K(0.0, p), -std::pow(p.xi01(), 8.0 / 3.0) / 9.0 - 1.0, 1e-8);
    auto K = [&](double w) { return tilde_K(w, p); };
    EXPECT_LT(std::fabs(fd_derivative(K, 0.0, 1, 1e-3)), 1e-6);
  }
}

TEST(Curvature, GaussFormulaDerivative) {
  for (double xi : {0.2, 0.7, 1.1}) {
    const GaussK g = gauss_K(xi, 0.0);
    auto K = [](double x) { return -std::pow(x, 8.0 / 3.0) / 9.0 - 1.0; };
    EXPECT_NEAR(g.dK, fd_derivative(K, xi, 1, 1e-3), 1e-10);
  }
}

TEST(Warping, EvenWithMinimumOnTheSeam) {
  const auto& p = family(1.0);
  EXPECT_NEAR(p.Gamma(0.0), 1.0 / p.xi01(), 1e-14);
  for (double w : {0.01, 0.5, 2.0, 7.0}) {
    EXPECT_DOUBLE_EQ(p.Gamma(w), p.Gamma(-w));
    EXPECT_GT(p.Gamma(w), p.Gamma(0.0));
  }
}

TEST(Completeness, CertificateHolds) {
  for (double c : {-1.0, 0.0, 1.0}) {
    const CompletenessReport r = completeness_certificate(family(c));
    EXPECT_TRUE(r.passed);
    EXPECT_GE(r.min_gamma, r.lower_bound - 1e-12);
    EXPECT_LT(r.seam_residual, 1e-6);
    EXPECT_LT(r.seam_drift, 1e-6);
  }
}

TEST(ShapeCandidate, DeterminantTraceAndCodazzi) {
  for (double c : {-1.0, 0.0, 1.0}) {
    const auto& p = family(c);
    for (int i = 0; i < 60; ++i) {
      const double a = 0.05 + (3.0 - 0.05) * i / 59.0;
      for (double w : {a, -a}) {
        const ShapeCandidate s = shape_and_codazzi(w, p);
        EXPECT_NEAR(s.lambda1 * s.lambda2, 1.0 + s.K, 1e-14 * std::fabs(s.K));
        EXPECT_NEAR(s.lambda1 + s.lambda2, 2.0 / std::sqrt(3.0) * std::sqrt(-1.0 - s.K), 1e-14 * std::fabs(s.K));
        EXPECT_LT(std::fabs(s.codazzi), 1e-5);
      }
    }
  }
}

TEST(ConformalChart, MetricMatchesClosedForm) {
  for (double c : {-1.0, 0.0, 1.0}) {
    for (double frac : {0.2, 0.5, 0.8}) {
      const double xi = frac * xi01(c);
      const MetricComponents a = metric_via_sigma_chart(xi, c);
      const MetricComponents b = metric_closed_form(xi, c);
      EXPECT_NEAR(a.g11, b.g11, 1e-7 * b.g11);
      EXPECT_NEAR(a.g22, b.g22, 1e-12 * b.g22);
    }
  }
}
