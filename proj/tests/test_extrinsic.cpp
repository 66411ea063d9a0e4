#include <cmath>
#include <map>
#include <memory>
#include <random>

#include <gtest/gtest.h>

#include "bicons/extrinsic.hpp"

using namespace bicons;

namespace {

const CaseParams& family(double c) {
  static std::map<double, std::unique_ptr<CaseParams>> cache;
  auto& slot = cache[c];
  if (!slot) slot = std::make_unique<CaseParams>(c);
  return *slot;
}

double bisect_P_zero(double c) {
  double a = c > 0.0 ? 9.0 * c * c / 4096.0 * 1.0000001 : 1e-9, b = 10.0;
  for (int i = 0; i < 200; ++i) {
    const double m = 0.5 * (a + b);
    if (m == a || m == b) break;
    (P_reduced(m, c) > 0.0 ? a : b) = m;
  }
  return 0.5 * (a + b);
}

// mu0 between two interior curvatures, straight Gauss-Kronrod on the defining integrand.
double mu0_oracle(const CaseParams& p, double k_from, double k_to) {
  auto f = [&](double t) { return CaseParams::mu0_integrand(p.ctilde(), t); };
  return integrate_adaptive(f, k_from, k_to, 1e-14, 1e-14).value;
}

// mu01 - mu0(kappa00), with the endpoint zero of P handled through the exact
// distance to kappa01.
double mu01_oracle(const CaseParams& p) {
  const double b = p.kappa01(), c = p.ctilde();
  auto f = [b, c](double t, double, double w) {
    return CaseParams::A(c, t) * std::pow(t, 0.75) / std::sqrt(w * CaseParams::q(b, c, w));
  };
  return integrate_tanh_sinh(f, p.kappa00(), b, 1e-12).value;
}

const double kFamilies[] = {-1.0, 0.0, 1.0};

}  // namespace

TEST(Roots, ZeroConstantGivesOneThird) { EXPECT_NEAR(kappa01(0.0), 1.0 / 3.0, 1e-12); }

TEST(Roots, BrentAgreesWithBisection) {
  for (double c : {-5.0, -1.0, 0.5, 1.0, 3.0, 10.0}) {
    const double k = kappa01(c);
    EXPECT_NEAR(k, bisect_P_zero(c), 1e-12) << c;
    EXPECT_NEAR(P_eval(k, c) / (k * k), 0.0, 1e-12) << c;
  }
}

TEST(Roots, LowerBoundForPositiveConstant) { EXPECT_GT(kappa01(1.0), 9.0 / 4096.0); }

TEST(Roots, PositiveBetweenZeroAndRoot) {
  for (double c : kFamilies) {
    const double k = kappa01(c);
    for (int i = 1; i < 50; ++i) EXPECT_GT(P_eval(k * i / 50.0, c), 0.0);
    EXPECT_LT(P_eval(k * 1.01, c), 0.0);
  }
}

TEST(AngleTable, MatchesDirectQuadrature) {
  for (double c : kFamilies) {
    const auto& p = family(c);
    EXPECT_NEAR(p.mu01() - p.mu0(p.kappa00()), mu01_oracle(p), 1e-10) << c;
    for (double frac : {0.01, 0.1, 0.3, 0.7, 0.95}) {
      const double k = frac * p.kappa01();
      EXPECT_NEAR(p.mu0(k) - p.mu0(p.kappa00()), mu0_oracle(p, p.kappa00(), k), 1e-10) << c << " " << frac;
    }
  }
}

TEST(AngleTable, IncreasingAndInvertible) {
  std::mt19937_64 rng(314);
  for (double c : kFamilies) {
    const auto& p = family(c);
    std::uniform_real_distribution<double> u(1e-8, p.kappa01());
    for (int i = 0; i < 200; ++i) {
      double a = u(rng), b = u(rng);
      if (a > b) std::swap(a, b);
      if (a == b) continue;
      EXPECT_LT(p.mu0(a), p.mu0(b));
      EXPECT_NEAR(p.kappa_of_mu0(p.mu0(a)), a, 1e-9 * p.kappa01());
    }
  }
}

TEST(AngleTable, LimitsAreFinite) {
  for (double c : kFamilies) {
    const auto& p = family(c);
    EXPECT_TRUE(std::isfinite(p.mu01()));
    EXPECT_TRUE(std::isfinite(p.mu0m1()));
    EXPECT_LT(p.mu0m1(), p.mu01());
    EXPECT_NEAR(p.mu0(1e-14), p.mu0m1(), 1e-9);
    EXPECT_DOUBLE_EQ(p.mu0(p.kappa01()), p.mu01());
  }
}

TEST(Immersion, LiesOnHyperboloid) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (double c : kFamilies) {
    const auto& p = family(c);
    for (int i = 0; i < 200; ++i) {
      const double k = p.kappa01() * (0.01 + 0.98 * unit(rng));
      const double mu = p.mu0(k) * (unit(rng) < 0.5 ? 1.0 : -1.0) + (unit(rng) < 0.5 ? 0.0 : 2.0 * p.mu01());
      const double v = -2.0 + 4.0 * unit(rng);
      const MinkowskiVec X = immersion_point(k, mu, v, p);
      EXPECT_LT(hyperboloid_defect(X), 1e-10 * std::max(1.0, X.x4 * X.x4)) << c;
      EXPECT_GT(X.x4, 0.0);
    }
  }
}

TEST(Immersion, AlternativeCoefficientLeavesHyperboloid) {
  const auto& p = family(-1.0);
  const double k = 0.5 * p.kappa01();
  const MinkowskiVec X = immersion_point(k, p.mu0(k), 1.0, p, CoefficientVariant::two_root2_thirds);
  EXPECT_GT(hyperboloid_defect(X), 1e-3);
}

TEST(Immersion, ProfileIsTheHalfSpaceImage) {
  for (double c : kFamilies) {
    const auto& p = family(c);
    for (double frac : {0.1, 0.5, 0.9}) {
      const double k = frac * p.kappa01();
      const double mu = p.mu0(k);
      const PlanePoint q = profile_half_space(k, mu, p);
      const HalfSpacePoint h = to_half_space(immersion_point(k, mu, 0.0, p));
      EXPECT_NEAR(h.u, 0.0, 1e-14);
      EXPECT_NEAR(q.x, h.v, 1e-12);
      EXPECT_NEAR(q.y, h.w, 1e-12);
    }
  }
}

TEST(Immersion, OnlyCanonicalFrame) {
  const auto& p = family(1.0);
  const CaseFrame canon = CaseFrame::canonical(CaseTag::positive);
  EXPECT_NO_THROW(immersion_X(0.5 * p.kappa01(), 0.3, p.first_branch(), p, canon));
  CaseFrame rotated = canon;
  rotated.c1 = {0, 0, 1, 0};
  try {
    immersion_X(0.5 * p.kappa01(), 0.3, p.first_branch(), p, rotated);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::WrongCase);
  }
  EXPECT_THROW(immersion_X(p.kappa01() * 1.1, 0.3, p.first_branch(), p, canon), Error);
}

TEST(Immersion, RadiusUndefinedForZeroConstant) {
  try {
    R_of_kappa(0.1, family(0.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ZeroCaseHasNoR);
  }
}

TEST(Gluing, SlopeAndPointClosedForms) {
  const auto& p = family(1.0);
  const GluedProfile g = glue_profiles(p);
  EXPECT_NEAR(g.match[0].left, g.slope_closed_form, 1e-6);
  EXPECT_NEAR(g.match[0].right, g.slope_closed_form, 1e-6);
  EXPECT_LT(g.glue_closed_form_gap, 1e-12);
}

TEST(Gluing, BranchesMatchAndCurveIsSimple) {
  for (double c : kFamilies) {
    const GluedProfile g = glue_profiles(family(c));
    EXPECT_LT(g.branch_limit_gap, 1e-8);
    EXPECT_LT(g.match[0].gap, 1e-6);
    EXPECT_LT(g.match[1].gap, 1e-4);
    EXPECT_LT(g.match[2].gap, 1e-2);
    EXPECT_FALSE(g.self_intersection);
    EXPECT_GT(g.min_y, 0.0);
    // Both ends reach the ideal boundary y = 0 only in the limit kappa -> 0.
    EXPECT_EQ(g.end_height, 0.0);
    EXPECT_LT(g.approach_gap, 1e-3);
  }
}

TEST(Gluing, TightToleranceReportsMismatch) {
  GlueOptions o;
  o.tol = {1e-6, 1e-4, 1e-12};
  try {
    glue_profiles(family(1.0), o);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::GlueMismatch);
  }
}

TEST(Gluing, SelfIntersectionDetector) {
  std::vector<PlanePoint> arc, loop;
  for (int i = 0; i <= 100; ++i) {
    const double a = std::numbers::pi * i / 100.0;
    arc.push_back({std::cos(a), std::sin(a)});
    // Lemniscate-like curve crossing itself at the origin.
    const double b = 2.0 * std::numbers::pi * i / 100.0 + 0.01;
    loop.push_back({std::sin(b), std::sin(b) * std::cos(b)});
  }
  EXPECT_FALSE(polyline_self_intersects(arc));
  EXPECT_TRUE(polyline_self_intersects(loop));
}

TEST(ZeroConstant, InversionSymmetryBetweenBranches) {
  const auto& p = family(0.0);
  const GluedProfile g = glue_profiles(p);
  ASSERT_EQ(g.branch1.size(), g.branch2.size());
  for (std::size_t i = 0; i < g.branch1.size(); i += 7) {
    const PlanePoint m = zero_case_mirror({g.branch1[i].x, g.branch1[i].y}, p.mu01());
    EXPECT_NEAR(m.x, g.branch2[i].x, 1e-10 * std::max(1.0, std::fabs(m.x)));
    EXPECT_NEAR(m.y, g.branch2[i].y, 1e-10 * std::max(1.0, m.y));
  }
}

TEST(ZeroConstant, ArcLengthMatchesClosedForm) {
  const auto& p = family(0.0);
  const ArcLengthProfile arc(p, 0.05 * p.kappa01());
  const double u_top = u_of_kappa_case0(1.0 / 3.0, 1, 0.0);
  for (double frac : {0.1, 0.4, 0.8}) {
    const double k = frac * p.kappa01();
    const double t = std::sqrt(p.kappa01() - k);
    EXPECT_NEAR(arc.u_of_t(t) - arc.u_of_t(0.0), std::fabs(u_of_kappa_case0(k, 1, 0.0) - u_top), 1e-8) << frac;
  }
}

TEST(FirstIntegral, HoldsAlongArcLengthProfile) {
  for (double c : kFamilies) {
    const auto& p = family(c);
    const ArcLengthProfile arc(p, 0.05 * p.kappa01());
    const FirstIntegralStats s = first_integral_residual(arc);
    EXPECT_LT(s.max_residual, 1e-6) << c;
    EXPECT_LT(s.max_speed_error, 1e-6) << c;
    EXPECT_EQ(s.samples, 200);
  }
}
