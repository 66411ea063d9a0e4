#pragma once

// Minkowski space R^4_1, the hyperboloid and upper half-space models of H^3
// and the standard map between them.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "bicons/error.hpp"

namespace bicons {

struct MinkowskiVec {
  double x1 = 0.0, x2 = 0.0, x3 = 0.0, x4 = 0.0;

  double& operator[](int i) { return i == 0 ? x1 : i == 1 ? x2 : i == 2 ? x3 : x4; }
  double operator[](int i) const { return i == 0 ? x1 : i == 1 ? x2 : i == 2 ? x3 : x4; }

  MinkowskiVec& operator+=(const MinkowskiVec& o) {
    x1 += o.x1; x2 += o.x2; x3 += o.x3; x4 += o.x4;
    return *this;
  }
  MinkowskiVec& operator-=(const MinkowskiVec& o) {
    x1 -= o.x1; x2 -= o.x2; x3 -= o.x3; x4 -= o.x4;
    return *this;
  }
  MinkowskiVec& operator*=(double s) {
    x1 *= s; x2 *= s; x3 *= s; x4 *= s;
    return *this;
  }
};

inline MinkowskiVec operator+(MinkowskiVec a, const MinkowskiVec& b) { return a += b; }
inline MinkowskiVec operator-(MinkowskiVec a, const MinkowskiVec& b) { return a -= b; }
inline MinkowskiVec operator-(MinkowskiVec a) { return a *= -1.0; }
inline MinkowskiVec operator*(double s, MinkowskiVec a) { return a *= s; }
inline MinkowskiVec operator*(MinkowskiVec a, double s) { return a *= s; }
inline MinkowskiVec operator/(MinkowskiVec a, double s) { return a *= 1.0 / s; }

/// <x, y> = x1 y1 + x2 y2 + x3 y3 - x4 y4
inline double minkowski_inner(const MinkowskiVec& x, const MinkowskiVec& y) {
  return x.x1 * y.x1 + x.x2 * y.x2 + x.x3 * y.x3 - x.x4 * y.x4;
}

/// Plain Euclidean length in R^4, used only for relative scaling.
inline double euclidean_norm(const MinkowskiVec& x) {
  return std::sqrt(x.x1 * x.x1 + x.x2 * x.x2 + x.x3 * x.x3 + x.x4 * x.x4);
}

inline double hyperboloid_defect(const MinkowskiVec& x) { return std::fabs(minkowski_inner(x, x) + 1.0); }

/// A point of H^3 = {<x,x> = -1, x4 > 0}.
class HyperboloidPoint {
 public:
  explicit HyperboloidPoint(const MinkowskiVec& x, double tol = 1e-10) : x_(x) {
    if (!(hyperboloid_defect(x) <= tol * std::max(1.0, x.x4 * x.x4)) || !(x.x4 > 0.0)) {
      throw Error(Errc::HyperboloidConstraintViolated,
                  "<x,x> + 1 = " + std::to_string(minkowski_inner(x, x) + 1.0) + ", x4 = " + std::to_string(x.x4));
    }
  }

  const MinkowskiVec& vec() const { return x_; }

 private:
  MinkowskiVec x_;
};

struct HalfSpacePoint {
  double u = 0.0, v = 0.0, w = 1.0;
};

struct TangentVec {
  MinkowskiVec base;
  MinkowskiVec dir;
};

/// Removes the component of v along x so that <x, result> = 0 (x on H^3).
inline MinkowskiVec project_to_tangent(const MinkowskiVec& x, const MinkowskiVec& v) {
  return v + minkowski_inner(x, v) * x;
}

inline TangentVec make_tangent(const HyperboloidPoint& p, const MinkowskiVec& v) {
  return {p.vec(), project_to_tangent(p.vec(), v)};
}

/// (x2, x3, x4 coordinates dropped) -> (2x2, 2x3, 2) / (x1 + x4).
inline HalfSpacePoint to_half_space(const MinkowskiVec& x) {
  const double d = x.x1 + x.x4;
  if (!(std::fabs(d) >= 1e-300)) throw Error(Errc::DenominatorUnderflow, "x1 + x4 vanishes");
  return {2.0 * x.x2 / d, 2.0 * x.x3 / d, 2.0 / d};
}

inline HalfSpacePoint to_half_space(const HyperboloidPoint& p) { return to_half_space(p.vec()); }

/// Inverse of to_half_space.
inline MinkowskiVec from_half_space_vec(const HalfSpacePoint& p) {
  if (!(p.w > 0.0)) throw Error(Errc::NonPositiveHeight, "half-space height w = " + std::to_string(p.w));
  const double s = 2.0 / p.w;  // x1 + x4
  const double x2 = p.u / p.w;
  const double x3 = p.v / p.w;
  const double d = -(1.0 + x2 * x2 + x3 * x3) / s;  // x1 - x4
  return {0.5 * (s + d), x2, x3, 0.5 * (s - d)};
}

inline HyperboloidPoint from_half_space(const HalfSpacePoint& p) { return HyperboloidPoint(from_half_space_vec(p)); }

/// |<t1,t2> - g_H(d delta t1, d delta t2)| with g_H = (du^2 + dv^2 + dw^2)/w^2
/// and the differential of the half-space map taken by a Richardson-refined
/// central difference along straight lines in R^4.
inline double isometry_residual(const MinkowskiVec& x, const MinkowskiVec& t1, const MinkowskiVec& t2,
                                double h = 1e-5) {
  auto push = [&](const MinkowskiVec& t) {
    auto diff = [&](double step) {
      const HalfSpacePoint a = to_half_space(x + step * t);
      const HalfSpacePoint b = to_half_space(x - step * t);
      return std::array<double, 3>{(a.u - b.u) / (2 * step), (a.v - b.v) / (2 * step), (a.w - b.w) / (2 * step)};
    };
    const auto c = diff(h);
    const auto f = diff(0.5 * h);
    return std::array<double, 3>{(4 * f[0] - c[0]) / 3, (4 * f[1] - c[1]) / 3, (4 * f[2] - c[2]) / 3};
  };
  const HalfSpacePoint p = to_half_space(x);
  const auto d1 = push(t1);
  const auto d2 = push(t2);
  const double g = (d1[0] * d2[0] + d1[1] * d2[1] + d1[2] * d2[2]) / (p.w * p.w);
  return std::fabs(minkowski_inner(t1, t2) - g);
}

inline double isometry_residual(const HyperboloidPoint& x, const TangentVec& t1, const TangentVec& t2,
                                double h = 1e-5) {
  return isometry_residual(x.vec(), t1.dir, t2.dir, h);
}

enum class CaseTag { positive, negative, zero };

inline CaseTag case_of(double ctilde) {
  return ctilde > 0.0 ? CaseTag::positive : ctilde < 0.0 ? CaseTag::negative : CaseTag::zero;
}

inline const char* case_name(CaseTag tag) {
  switch (tag) {
    case CaseTag::positive: return "positive";
    case CaseTag::negative: return "negative";
    case CaseTag::zero: return "zero";
  }
  return "?";
}

/// The two constant vectors that pin down each surface family.
struct CaseFrame {
  MinkowskiVec c1;
  MinkowskiVec c2;
  CaseTag tag;

  /// c1 = e1, c2 = e2 (positive); c1 = e2, c2 = e1 + sqrt2 e4 (negative);
  /// c1 = e1 + e4, c2 = e2 (zero).
  static CaseFrame canonical(CaseTag tag) {
    switch (tag) {
      case CaseTag::positive: return {{1, 0, 0, 0}, {0, 1, 0, 0}, tag};
      case CaseTag::negative: return {{0, 1, 0, 0}, {1, 0, 0, std::numbers::sqrt2}, tag};
      case CaseTag::zero: return {{1, 0, 0, 1}, {0, 1, 0, 0}, tag};
    }
    throw Error(Errc::WrongCase, "unknown case tag");
  }

  /// Expected Gram matrix {<c1,c1>, <c1,c2>, <c2,c2>} for the tag.
  static std::array<double, 3> expected_gram(CaseTag tag) {
    switch (tag) {
      case CaseTag::positive: return {1, 0, 1};
      case CaseTag::negative: return {1, 0, -1};
      case CaseTag::zero: return {0, 0, 1};
    }
    return {0, 0, 0};
  }

  std::array<double, 3> gram() const {
    return {minkowski_inner(c1, c1), minkowski_inner(c1, c2), minkowski_inner(c2, c2)};
  }
};

}  // namespace bicons
