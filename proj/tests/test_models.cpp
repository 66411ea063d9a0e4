#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "bicons/models.hpp"

using namespace bicons;

namespace {

// Points of H^3 at geodesic distance up to r_max from (0,0,0,1), uniform
// direction.
struct HyperboloidGen {
  std::mt19937_64 rng;
  double r_max;

  MinkowskiVec point() {
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_real_distribution<double> r(0.0, r_max);
    double a = n(rng), b = n(rng), c = n(rng);
    const double len = std::sqrt(a * a + b * b + c * c);
    const double s = r(rng);
    return {std::sinh(s) * a / len, std::sinh(s) * b / len, std::sinh(s) * c / len, std::cosh(s)};
  }

  MinkowskiVec tangent(const MinkowskiVec& x) {
    std::normal_distribution<double> n(0.0, 1.0);
    return project_to_tangent(x, {n(rng), n(rng), n(rng), n(rng)});
  }
};

}  // namespace

TEST(Minkowski, InnerProductSignature) {
  const MinkowskiVec e4{0, 0, 0, 1}, e1{1, 0, 0, 0};
  EXPECT_EQ(minkowski_inner(e4, e4), -1.0);
  EXPECT_EQ(minkowski_inner(e1, e1), 1.0);
  EXPECT_EQ(hyperboloid_defect(e4), 0.0);
}

TEST(Minkowski, HyperboloidPointRejectsOffShell) {
  EXPECT_NO_THROW(HyperboloidPoint(MinkowskiVec{0, 0, 0, 1}));
  try {
    HyperboloidPoint(MinkowskiVec{0, 0, 0, 1.1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::HyperboloidConstraintViolated);
  }
  EXPECT_THROW(HyperboloidPoint(MinkowskiVec{0, 0, 0, -1}), Error);
}

TEST(Minkowski, TangentProjectionIsOrthogonal) {
  HyperboloidGen gen{std::mt19937_64(3), 4.0};
  for (int i = 0; i < 100; ++i) {
    const MinkowskiVec x = gen.point();
    const MinkowskiVec t = gen.tangent(x);
    EXPECT_NEAR(minkowski_inner(x, t), 0.0, 1e-9 * std::max(1.0, x.x4 * euclidean_norm(t)));
  }
}

TEST(HalfSpace, RoundTripFromHyperboloid) {
  HyperboloidGen gen{std::mt19937_64(42), 5.0};
  for (int i = 0; i < 500; ++i) {
    const MinkowskiVec x = gen.point();
    const MinkowskiVec y = from_half_space_vec(to_half_space(x));
    const double scale = std::max(1.0, x.x4);
    EXPECT_NEAR(x.x1, y.x1, 1e-12 * scale);
    EXPECT_NEAR(x.x2, y.x2, 1e-12 * scale);
    EXPECT_NEAR(x.x3, y.x3, 1e-12 * scale);
    EXPECT_NEAR(x.x4, y.x4, 1e-12 * scale);
  }
}

TEST(HalfSpace, RoundTripFromHalfSpace) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> uv(-3.0, 3.0), lw(-3.0, 2.0);
  for (int i = 0; i < 500; ++i) {
    const HalfSpacePoint p{uv(rng), uv(rng), std::exp(lw(rng))};
    const HyperboloidPoint x = from_half_space(p);
    const HalfSpacePoint q = to_half_space(x);
    EXPECT_NEAR(p.u, q.u, 1e-12 * std::max(1.0, std::fabs(p.u)));
    EXPECT_NEAR(p.v, q.v, 1e-12 * std::max(1.0, std::fabs(p.v)));
    EXPECT_NEAR(p.w, q.w, 1e-12 * p.w);
  }
}

TEST(HalfSpace, OriginMapsToUnitHeight) {
  const HalfSpacePoint p = to_half_space(MinkowskiVec{0, 0, 0, 1});
  EXPECT_EQ(p.u, 0.0);
  EXPECT_EQ(p.v, 0.0);
  EXPECT_EQ(p.w, 2.0);
}

TEST(HalfSpace, ErrorsAtTheIdealBoundary) {
  try {
    from_half_space_vec({0.0, 0.0, 0.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NonPositiveHeight);
  }
  try {
    to_half_space(MinkowskiVec{-1, 0, 0, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DenominatorUnderflow);
  }
}

TEST(HalfSpace, MapIsAnIsometry) {
  HyperboloidGen gen{std::mt19937_64(5), 2.0};
  for (int i = 0; i < 100; ++i) {
    const HyperboloidPoint x(gen.point());
    const TangentVec t1 = make_tangent(x, gen.tangent(x.vec()));
    const TangentVec t2 = make_tangent(x, gen.tangent(x.vec()));
    EXPECT_LT(isometry_residual(x, t1, t2), 1e-8);
  }
}

TEST(CaseFrame, CanonicalGramMatrices) {
  for (CaseTag tag : {CaseTag::positive, CaseTag::negative, CaseTag::zero}) {
    const CaseFrame f = CaseFrame::canonical(tag);
    const auto g = f.gram();
    const auto e = CaseFrame::expected_gram(tag);
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(g[k], e[k], 1e-15) << case_name(tag);
  }
  EXPECT_EQ(case_of(2.0), CaseTag::positive);
  EXPECT_EQ(case_of(-0.5), CaseTag::negative);
  EXPECT_EQ(case_of(0.0), CaseTag::zero);
}
