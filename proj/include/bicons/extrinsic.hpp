#pragma once

// The three explicit surface families in H^3 indexed by the sign of the
// constant C~: first integral P, the angle integral mu0, profile curves in the
// hyperboloid and half-space models, immersions and the two-branch gluing.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "bicons/error.hpp"
#include "bicons/models.hpp"
#include "bicons/numerics.hpp"

namespace bicons {

/// P(kappa)/kappa^2 = 16/9 - 16 kappa^2 + C~ kappa^{3/2}.
inline double P_reduced(double kappa, double ctilde) {
  return 16.0 / 9.0 - 16.0 * kappa * kappa + ctilde * std::pow(kappa, 1.5);
}

/// P(kappa) = (16/9) kappa^2 - 16 kappa^4 + C~ kappa^{7/2}.
inline double P_eval(double kappa, double ctilde) {
  if (!(kappa > 0.0)) throw Error(Errc::NonPositiveKappa, "kappa = " + std::to_string(kappa));
  return kappa * kappa * P_reduced(kappa, ctilde);
}

/// Positive zero of P, found on P/kappa^2 so the double zero at 0 is gone.
/// For C~ > 0 the reduced polynomial peaks at (3C~)^2/2^12 and the zero lies
/// beyond it; for C~ = 0 it is exactly 1/3.
inline double kappa01(double ctilde) {
  if (ctilde == 0.0) return 1.0 / 3.0;
  auto p = [&](double k) { return P_reduced(k, ctilde); };
  const double lo = ctilde > 0.0 ? (3.0 * ctilde) * (3.0 * ctilde) / 4096.0 : 0.0;
  const double start = std::max(lo * 2.0, 0.5);
  const RootBracket br = expand_bracket_upward(p, lo, start);
  return find_bracketed_root(p, br, {4.0 * std::numeric_limits<double>::epsilon() * br.b, 400});
}

/// u(kappa) = sign (3/4) log(kappa / (1 + sqrt(1 - 9 kappa^2))) + C, the
/// arc-length parameter of the C~ = 0 profile.
inline double u_of_kappa_case0(double kappa, int sign, double C) {
  if (!(kappa > 0.0 && kappa <= 1.0 / 3.0)) throw Error(Errc::OutOfDomain, "kappa must lie in (0, 1/3]");
  const double r = std::sqrt(std::max(0.0, 1.0 - 9.0 * kappa * kappa));
  return (sign >= 0 ? 1.0 : -1.0) * 0.75 * std::log(kappa / (1.0 + r)) + C;
}

/// Which of the two constants multiplies (c1 sinh v + c2 cosh v - c2) in the
/// C~ < 0 immersion: 4/(3 sqrt(-C~) kappa^{3/4}), or the
/// alternative 2 sqrt2/(3 sqrt(-C~) kappa^{3/4}).
enum class CoefficientVariant { four_thirds, two_root2_thirds };

inline const char* variant_name(CoefficientVariant v) {
  return v == CoefficientVariant::four_thirds ? "4/3" : "2sqrt2/3";
}

/// mu = sign * mu0(kappa) + c0.
struct Branch {
  int sign = 1;
  double c0 = 0.0;
};

/// One extrinsic family. mu0(kappa) = int_{kappa00}^{kappa} A(t) t^{3/4} / sqrt(p(t)) dt
/// with A = 36 sqrt|C~| / (9 C~ t^{3/2} + 16) (A = 3 when C~ = 0) is tabulated
/// on two charts: s = sqrt(kappa01 - kappa) on [kappa00, kappa01] and
/// lambda = -log kappa on (0, kappa00].
class CaseParams {
 public:
  explicit CaseParams(double ctilde, std::optional<double> kappa00 = std::nullopt, int nodes_per_chart = 2048)
      : ctilde_(ctilde), tag_(case_of(ctilde)), kappa01_(bicons::kappa01(ctilde)) {
    kappa00_ = kappa00.value_or(0.5 * kappa01_);
    if (!(kappa00_ > 0.0 && kappa00_ < kappa01_)) throw Error(Errc::OutOfDomain, "kappa00 must lie in (0, kappa01)");
    if (nodes_per_chart < 8) throw Error(Errc::OutOfRange, "need at least 8 table nodes per chart");
    s00_ = std::sqrt(kappa01_ - kappa00_);
    lambda00_ = -std::log(kappa00_);
    const double b = kappa01_, c = ctilde_;
    near_ = CumulativeIntegral([b, c](double u) { return near_integrand(b, c, u); },
                               uniform_nodes(0.0, s00_, nodes_per_chart));
    far_ = CumulativeIntegral([c](double l) { return far_integrand(c, l); },
                              uniform_nodes(lambda00_, lambda00_ + kFarSpan, nodes_per_chart));
    mu01_ = near_.values().back();
    const double k_last = std::exp(-(lambda00_ + kFarSpan));
    const double tail = integrate_adaptive([c](double t) { return t > 0.0 ? mu0_integrand(c, t) : 0.0; }, 0.0,
                                           k_last, 1e-300, 1e-15)
                            .value;
    mu0m1_ = -(far_.values().back() + tail);
    if (tag_ == CaseTag::negative) {
      // 16 + 9 C~ kappa^{3/2} decreases in kappa; it must stay positive up to kappa01.
      if (!(16.0 + 9.0 * ctilde_ * std::pow(kappa01_, 1.5) > 0.0)) {
        throw Error(Errc::RadicandNonPositive, "16 + 9 C~ kappa01^{3/2} <= 0");
      }
    }
  }

  double ctilde() const { return ctilde_; }
  CaseTag tag() const { return tag_; }
  double kappa01() const { return kappa01_; }
  double kappa00() const { return kappa00_; }
  double mu01() const { return mu01_; }    ///< lim mu0 as kappa -> kappa01
  double mu0m1() const { return mu0m1_; }  ///< lim mu0 as kappa -> 0
  /// C-1 = (3^{3/4}/16) C~, the constant of the matching intrinsic family.
  double cminus1_link() const { return std::pow(3.0, 0.75) / 16.0 * ctilde_; }

  Branch first_branch() const { return {1, 0.0}; }
  Branch second_branch() const { return {-1, 2.0 * mu01_}; }

  double P(double kappa) const { return P_eval(kappa, ctilde_); }

  /// p(kappa01 - w)/w with p = P/kappa^2, free of cancellation for small w.
  static double q(double b, double c, double w) {
    if (w == 0.0) return 32.0 * b - 1.5 * c * std::sqrt(b);
    return 16.0 * (2.0 * b - w) + c * std::pow(b, 1.5) * std::expm1(1.5 * std::log1p(-w / b)) / w;
  }
  double q(double w) const { return q(kappa01_, ctilde_, w); }

  static double A(double c, double t) {
    if (c == 0.0) return 3.0;
    return 36.0 * std::sqrt(std::fabs(c)) / (9.0 * c * std::pow(t, 1.5) + 16.0);
  }

  /// d mu0 / d kappa at t in (0, kappa01).
  static double mu0_integrand(double c, double t) { return A(c, t) * std::pow(t, 0.75) / std::sqrt(P_reduced(t, c)); }
  double mu0_integrand(double t) const { return mu0_integrand(ctilde_, t); }

  /// s-chart integrand: 2 A(t) t^{3/4} / sqrt(q(u^2)), t = kappa01 - u^2.
  static double near_integrand(double b, double c, double u) {
    const double w = u * u;
    const double t = b - w;
    return 2.0 * A(c, t) * std::pow(t, 0.75) / std::sqrt(q(b, c, w));
  }

  /// lambda-chart integrand: A(t) t^{7/4} / sqrt(p(t)), t = e^{-lambda}.
  static double far_integrand(double c, double lambda) {
    const double t = std::exp(-lambda);
    return A(c, t) * std::pow(t, 1.75) / std::sqrt(P_reduced(t, c));
  }

  const CumulativeIntegral& near_table() const { return near_; }
  const CumulativeIntegral& far_table() const { return far_; }

  /// mu01 - mu0(kappa01 - s^2), odd in s when continued to s < 0.
  double mu_gap_of_s(double s) const { return s >= 0.0 ? near_(s) : -near_(-s); }

  /// Same, for any |s| < sqrt(kappa01), switching to the far chart past s00.
  double mu_gap_of_s_any(double s) const {
    const double a = std::fabs(s);
    const double g = a <= s00_ ? near_(a) : mu01_ - mu0(kappa01_ - a * a);
    return s >= 0.0 ? g : -g;
  }

  double mu0(double kappa) const {
    if (!(kappa > 0.0 && kappa <= kappa01_)) throw Error(Errc::OutOfDomain, "mu0 needs kappa in (0, kappa01]");
    if (kappa >= kappa00_) return mu01_ - near_(std::sqrt(kappa01_ - kappa));
    return -far_(-std::log(kappa));
  }

  /// kappa with mu0(kappa) = mu01 - gap, for gap in [0, mu01 - mu0m1).
  double kappa_of_gap(double gap) const {
    if (gap < 0.0) throw Error(Errc::OutOfRange, "negative gap");
    if (gap <= mu01_) {
      const double s = near_.inverse(gap);
      return kappa01_ - s * s;
    }
    const double target = gap - mu01_;  // = -mu0
    if (!(target < -mu0m1_)) throw Error(Errc::OutOfRange, "mu0 at or beyond its limit at kappa = 0");
    return std::exp(-far_.inverse(target));
  }

  double kappa_of_mu0(double mu) const { return kappa_of_gap(mu01_ - mu); }

  /// Parameter interval of the glued curve, where the angle mu itself is the
  /// parameter: branch (+,0) covers (mu0m1, mu01], branch (-,2 mu01) covers
  /// [mu01, 2 mu01 - mu0m1).
  Interval glued_range() const { return {mu0m1_, 2.0 * mu01_ - mu0m1_}; }

  /// kappa along the glued curve: kappa0 evaluated at the distance |m - mu01|.
  double kappa_of_glued(double m) const { return kappa_of_gap(std::fabs(m - mu01_)); }

 private:
  static constexpr double kFarSpan = 25.0;

  double ctilde_;
  CaseTag tag_;
  double kappa01_;
  double kappa00_ = 0.0;
  double s00_ = 0.0;
  double lambda00_ = 0.0;
  double mu01_ = 0.0;
  double mu0m1_ = 0.0;
  CumulativeIntegral near_;
  CumulativeIntegral far_;
};

/// R(kappa) for C~ != 0: sqrt(9 C~ kappa^{3/2} + 16) / (3 sqrt|C~| kappa^{3/4}).
inline double R_of_kappa(double kappa, const CaseParams& p) {
  if (p.tag() == CaseTag::zero) throw Error(Errc::ZeroCaseHasNoR, "R is undefined when C~ = 0");
  if (!(kappa > 0.0)) throw Error(Errc::NonPositiveKappa, "kappa = " + std::to_string(kappa));
  const double rad = 9.0 * p.ctilde() * std::pow(kappa, 1.5) + 16.0;
  if (!(rad > 0.0)) throw Error(Errc::RadicandNonPositive, "9 C~ kappa^{3/2} + 16 <= 0");
  return std::sqrt(rad) / (3.0 * std::sqrt(std::fabs(p.ctilde())) * std::pow(kappa, 0.75));
}

inline double mu_on_branch(double kappa, const Branch& b, const CaseParams& p) {
  return b.sign * p.mu0(kappa) + b.c0;
}

struct PlanePoint {
  double x = 0.0, y = 0.0;
};

/// Half-space image (x, y) of the profile at curvature kappa and angle mu.
/// kappa = 0 is accepted and gives the limit point on y = 0.
inline PlanePoint profile_half_space(double kappa, double mu, const CaseParams& p) {
  if (kappa < 0.0) throw Error(Errc::OutOfDomain, "kappa < 0");
  const double c = p.ctilde();
  const double k34 = std::pow(kappa, 0.75);
  switch (p.tag()) {
    case CaseTag::positive: {
      const double S = std::sqrt(9.0 * c * std::pow(kappa, 1.5) + 16.0);
      const double den = 4.0 + S * std::cosh(mu);
      return {2.0 * S * std::sinh(mu) / den, 6.0 * std::sqrt(c) * k34 / den};
    }
    case CaseTag::negative: {
      const double S = std::sqrt(9.0 * c * std::pow(kappa, 1.5) + 16.0);
      const double den = (1.0 + std::numbers::sqrt2) * (4.0 + S * std::sin(mu));
      return {2.0 * S * std::cos(mu) / den, 6.0 * std::sqrt(-c) * k34 / den};
    }
    case CaseTag::zero: {
      const double den = std::pow(2.0, 0.75) * (kappa * std::sqrt(kappa) + mu * mu);
      return {mu / den, k34 / den};
    }
  }
  throw Error(Errc::WrongCase, "unknown case");
}

inline PlanePoint sigma_half_space(double kappa, const Branch& b, const CaseParams& p) {
  if (!(kappa > 0.0 && kappa < p.kappa01())) throw Error(Errc::OutOfDomain, "kappa must lie in (0, kappa01)");
  return profile_half_space(kappa, mu_on_branch(kappa, b, p), p);
}

/// X(kappa, mu, v) in R^4_1 for the canonical frame of the case, without the
/// hyperboloid check.
inline MinkowskiVec immersion_point(double kappa, double mu, double v, const CaseParams& p,
                                    CoefficientVariant variant = CoefficientVariant::four_thirds) {
  if (!(kappa > 0.0)) throw Error(Errc::NonPositiveKappa, "kappa = " + std::to_string(kappa));
  const double c = p.ctilde();
  const double k34 = std::pow(kappa, 0.75);
  switch (p.tag()) {
    case CaseTag::positive: {
      const double a = 4.0 / (3.0 * std::sqrt(c) * k34);
      const double R = R_of_kappa(kappa, p);
      return {a * std::cos(v), a * std::sin(v), R * std::sinh(mu), R * std::cosh(mu)};
    }
    case CaseTag::negative: {
      const double a = 4.0 / (3.0 * std::sqrt(-c) * k34);
      const double coef = variant == CoefficientVariant::four_thirds ? a : 2.0 * std::numbers::sqrt2 / (3.0 * std::sqrt(-c) * k34);
      const double R = R_of_kappa(kappa, p);
      // sigma + coef (c1 sinh v + c2 cosh v - c2), c1 = e2, c2 = e1 + sqrt2 e4
      const double ch = std::cosh(v) - 1.0;
      const MinkowskiVec sigma{std::numbers::sqrt2 * R * std::sin(mu) + a, 0.0, R * std::cos(mu),
                               R * std::sin(mu) + std::numbers::sqrt2 * a};
      return sigma + MinkowskiVec{coef * ch, coef * std::sinh(v), 0.0, std::numbers::sqrt2 * coef * ch};
    }
    case CaseTag::zero: {
      const double x = mu / k34;
      const double b = std::pow(2.0, 0.75) * k34;
      const double e = 1.0 / (std::pow(2.0, 2.75) * k34);
      const double r = b * (1.0 + x * x + v * v);
      return {r - e, v, x, r + e};
    }
  }
  throw Error(Errc::WrongCase, "unknown case");
}

/// X(kappa, v) on a branch. Only the canonical frame of the case is
/// supported; any other frame is rejected.
inline HyperboloidPoint immersion_X(double kappa, double v, const Branch& b, const CaseParams& p,
                                   const CaseFrame& frame,
                                   CoefficientVariant variant = CoefficientVariant::four_thirds) {
  const CaseFrame canon = CaseFrame::canonical(p.tag());
  auto same = [](const MinkowskiVec& x, const MinkowskiVec& y) { return euclidean_norm(x - y) <= 1e-15; };
  if (frame.tag != p.tag() || !same(frame.c1, canon.c1) || !same(frame.c2, canon.c2)) {
    throw Error(Errc::WrongCase, "immersion is defined for the canonical frame of the case");
  }
  if (!(kappa > 0.0 && kappa < p.kappa01())) throw Error(Errc::OutOfDomain, "kappa must lie in (0, kappa01)");
  const MinkowskiVec X = immersion_point(kappa, mu_on_branch(kappa, b, p), v, p, variant);
  return HyperboloidPoint(X, 1e-8);
}

/// Point of the glued surface at curve parameter m (= mu) and circle
/// parameter v.
inline MinkowskiVec glued_point(double m, double v, const CaseParams& p,
                                CoefficientVariant variant = CoefficientVariant::four_thirds) {
  return immersion_point(p.kappa_of_glued(m), m, v, p, variant);
}

/// Point of the glued surface at the signed parameter t, kappa = kappa01 - t^2
/// and mu = mu01 - sign(t) (mu01 - mu0(kappa)). Unlike m, t is a regular
/// coordinate across the seam t = 0; t > 0 is branch (+,0).
inline MinkowskiVec glued_point_t(double t, double v, const CaseParams& p,
                                  CoefficientVariant variant = CoefficientVariant::four_thirds) {
  return immersion_point(p.kappa01() - t * t, p.mu01() - p.mu_gap_of_s_any(t), v, p, variant);
}

/// -3 sqrt(C~) kappa01^{3/4} sinh(mu01) / (4 cosh(mu01) + 12 kappa01), the
/// common slope dy/dx of the two branches at the gluing point (C~ > 0).
inline double glue_slope_closed_form(const CaseParams& p) {
  if (p.tag() != CaseTag::positive) throw Error(Errc::WrongCase, "closed-form slope needs C~ > 0");
  const double k = p.kappa01(), m = p.mu01();
  return -3.0 * std::sqrt(p.ctilde()) * std::pow(k, 0.75) * std::sinh(m) / (4.0 * std::cosh(m) + 12.0 * k);
}

/// Closed-form gluing point for C~ > 0.
inline PlanePoint glue_point_closed_form(const CaseParams& p) {
  if (p.tag() != CaseTag::positive) throw Error(Errc::WrongCase, "closed-form gluing point needs C~ > 0");
  const double k = p.kappa01(), m = p.mu01();
  return {6.0 * k * std::sinh(m) / (1.0 + 3.0 * k * std::cosh(m)),
          3.0 * std::sqrt(p.ctilde()) * std::pow(k, 0.75) / (2.0 + 6.0 * k * std::cosh(m))};
}

struct ProfileSample {
  int branch = 1;      ///< 1 for (+,0), 2 for (-,2 mu01)
  double kappa = 0.0;
  double mu = 0.0;
  double x = 0.0, y = 0.0;
  MinkowskiVec sigma;  ///< hyperboloid point (v = 0)
  double R = std::numeric_limits<double>::quiet_NaN();
};

inline ProfileSample make_sample(double kappa, double mu, int branch, const CaseParams& p) {
  ProfileSample s;
  s.branch = branch;
  s.kappa = kappa;
  s.mu = mu;
  const PlanePoint q = profile_half_space(kappa, mu, p);
  s.x = q.x;
  s.y = q.y;
  if (kappa > 0.0) {
    s.sigma = immersion_point(kappa, mu, 0.0, p);
    if (p.tag() != CaseTag::zero) s.R = R_of_kappa(kappa, p);
  }
  return s;
}

struct DerivativeMatch {
  int order = 0;
  double left = 0.0;   ///< branch (+,0)
  double right = 0.0;  ///< branch (-,2 mu01)
  double gap = 0.0;
  double tol = 0.0;
  bool passed = false;
};

/// Derivatives dy/dx, d2y/dx2, d3y/dx3 of one branch at the gluing point,
/// from one-sided differences in s, kappa = kappa01 - s^2, mu = mu01 -+ N(s).
inline std::array<double, 3> branch_slopes_at_glue(const CaseParams& p, int branch, double h) {
  const double sgn = branch == 1 ? -1.0 : 1.0;
  auto pt = [&](double s) {
    const double kappa = p.kappa01() - s * s;
    const double mu = p.mu01() + sgn * p.mu_gap_of_s(s);
    return profile_half_space(kappa, mu, p);
  };
  auto X = [&](double s) { return pt(s).x; };
  auto Y = [&](double s) { return pt(s).y; };
  const double x1 = fd_derivative(X, 0.0, 1, h, Side::right), y1 = fd_derivative(Y, 0.0, 1, h, Side::right);
  const double x2 = fd_derivative(X, 0.0, 2, h, Side::right), y2 = fd_derivative(Y, 0.0, 2, h, Side::right);
  const double x3 = fd_derivative(X, 0.0, 3, h, Side::right), y3 = fd_derivative(Y, 0.0, 3, h, Side::right);
  const double d1 = y1 / x1;
  const double num2 = y2 * x1 - y1 * x2;
  const double d2 = num2 / (x1 * x1 * x1);
  const double d3 = ((y3 * x1 - y1 * x3) * x1 - 3.0 * x2 * num2) / std::pow(x1, 5);
  return {d1, d2, d3};
}

struct GluedProfile {
  std::vector<ProfileSample> branch1;  ///< kappa increasing toward kappa01
  std::vector<ProfileSample> branch2;  ///< kappa increasing toward kappa01
  ProfileSample glue;                   ///< exact limit sample at kappa01
  ProfileSample end1;                   ///< limit of branch 1 as kappa -> 0 (y = 0)
  ProfileSample end2;                   ///< limit of branch 2 as kappa -> 0 (y = 0)
  std::array<DerivativeMatch, 3> match{};
  double slope_closed_form = std::numeric_limits<double>::quiet_NaN();
  double glue_closed_form_gap = std::numeric_limits<double>::quiet_NaN();
  double branch_limit_gap = 0.0;  ///< |lim sigma1 - lim sigma2| at kappa01
  double approach_gap = 0.0;      ///< max_j |sigma_j(kappa01 (1 - 1e-8)) - G|
  double min_y = 0.0;             ///< over finite samples
  double end_height = 0.0;        ///< max y of the two kappa -> 0 limits
  bool self_intersection = false;

  /// The whole curve in order: end1, branch 1, G, branch 2 reversed, end2.
  std::vector<ProfileSample> polyline() const {
    std::vector<ProfileSample> out;
    out.reserve(branch1.size() + branch2.size() + 3);
    out.push_back(end1);
    out.insert(out.end(), branch1.begin(), branch1.end());
    out.push_back(glue);
    out.insert(out.end(), branch2.rbegin(), branch2.rend());
    out.push_back(end2);
    return out;
  }

  /// The polyline without the two ideal end points: every sample lies in H^3.
  std::vector<ProfileSample> samples() const {
    std::vector<ProfileSample> out = polyline();
    return {out.begin() + 1, out.end() - 1};
  }
};

namespace detail {

inline bool segments_cross(const PlanePoint& a, const PlanePoint& b, const PlanePoint& c, const PlanePoint& d) {
  auto orient = [](const PlanePoint& p, const PlanePoint& q, const PlanePoint& r) {
    return (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
  };
  const double d1 = orient(c, d, a), d2 = orient(c, d, b);
  const double d3 = orient(a, b, c), d4 = orient(a, b, d);
  return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

}  // namespace detail

/// True if two non-adjacent segments of the open polyline cross. Segments are
/// swept in order of their left x-extent so only overlapping pairs are tested.
inline bool polyline_self_intersects(const std::vector<PlanePoint>& pts) {
  const std::size_t n = pts.size();
  if (n < 4) return false;
  struct Seg { double lo, hi; std::size_t i; };
  std::vector<Seg> segs;
  segs.reserve(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    segs.push_back({std::min(pts[i].x, pts[i + 1].x), std::max(pts[i].x, pts[i + 1].x), i});
  }
  std::sort(segs.begin(), segs.end(), [](const Seg& a, const Seg& b) { return a.lo < b.lo; });
  for (std::size_t a = 0; a < segs.size(); ++a) {
    for (std::size_t b = a + 1; b < segs.size() && segs[b].lo <= segs[a].hi; ++b) {
      const std::size_t i = segs[a].i, j = segs[b].i;
      if (i + 1 == j || j + 1 == i) continue;
      if (detail::segments_cross(pts[i], pts[i + 1], pts[j], pts[j + 1])) return true;
    }
  }
  return false;
}

struct GlueOptions {
  int samples_per_branch = 400;
  double fd_step = 1e-3;              ///< step in s = sqrt(kappa01 - kappa)
  std::array<double, 3> tol = {1e-6, 1e-4, 1e-2};
  bool throw_on_failure = true;
};

/// Both branches sampled on a kappa grid clustered at 0 and kappa01, the
/// exact gluing sample and the two kappa -> 0 limit samples, with one-sided
/// derivative records at the gluing point.
inline GluedProfile glue_profiles(const CaseParams& p, const GlueOptions& opt = {}) {
  GluedProfile g;
  const int n = opt.samples_per_branch;
  if (n < 8) throw Error(Errc::OutOfRange, "need at least 8 samples per branch");
  const double k01 = p.kappa01(), m01 = p.mu01();
  for (int i = 1; i < n; ++i) {
    const double kappa = 0.5 * k01 * (1.0 - std::cos(std::numbers::pi * i / n));
    const double mu0 = p.mu0(kappa);
    g.branch1.push_back(make_sample(kappa, mu0, 1, p));
    g.branch2.push_back(make_sample(kappa, 2.0 * m01 - mu0, 2, p));
  }
  g.glue = make_sample(k01, m01, 1, p);
  g.end1 = make_sample(0.0, p.mu0m1(), 1, p);
  g.end2 = make_sample(0.0, 2.0 * m01 - p.mu0m1(), 2, p);
  g.end_height = std::max(g.end1.y, g.end2.y);

  // Limits of both branch formulas at kappa01, and the approach at kappa01(1 - 1e-8).
  const PlanePoint l1 = profile_half_space(k01, m01, p);
  const PlanePoint l2 = profile_half_space(k01, 2.0 * m01 - m01, p);
  g.branch_limit_gap = std::hypot(l1.x - l2.x, l1.y - l2.y);
  {
    const double kappa = k01 * (1.0 - 1e-8);
    const double mu0 = p.mu0(kappa);
    const PlanePoint a = profile_half_space(kappa, mu0, p);
    const PlanePoint b = profile_half_space(kappa, 2.0 * m01 - mu0, p);
    g.approach_gap = std::max(std::hypot(a.x - g.glue.x, a.y - g.glue.y), std::hypot(b.x - g.glue.x, b.y - g.glue.y));
  }
  if (p.tag() == CaseTag::positive) {
    const PlanePoint G = glue_point_closed_form(p);
    g.glue_closed_form_gap = std::hypot(G.x - g.glue.x, G.y - g.glue.y);
    g.slope_closed_form = glue_slope_closed_form(p);
  }

  const auto d1 = branch_slopes_at_glue(p, 1, opt.fd_step);
  const auto d2 = branch_slopes_at_glue(p, 2, opt.fd_step);
  for (int k = 0; k < 3; ++k) {
    auto& m = g.match[static_cast<std::size_t>(k)];
    m.order = k + 1;
    m.left = d1[static_cast<std::size_t>(k)];
    m.right = d2[static_cast<std::size_t>(k)];
    m.gap = std::fabs(m.left - m.right);
    m.tol = opt.tol[static_cast<std::size_t>(k)];
    m.passed = m.gap <= m.tol;
  }

  g.min_y = std::numeric_limits<double>::infinity();
  for (const auto* br : {&g.branch1, &g.branch2}) {
    for (const auto& s : *br) g.min_y = std::min(g.min_y, s.y);
  }
  g.min_y = std::min(g.min_y, g.glue.y);

  std::vector<PlanePoint> pts;
  for (const auto& s : g.polyline()) pts.push_back({s.x, s.y});
  g.self_intersection = polyline_self_intersects(pts);

  if (opt.throw_on_failure) {
    for (const auto& m : g.match) {
      if (!m.passed) {
        throw Error(Errc::GlueMismatch, "order " + std::to_string(m.order) + " gap " + std::to_string(m.gap));
      }
    }
    if (g.self_intersection) throw Error(Errc::SelfIntersection, "glued profile crosses itself");
  }
  return g;
}

/// For C~ = 0 the second branch is the image of the first under
/// z -> 2^{-3/4} / (2 mu01 - 2^{-3/4} / conj(z)), z = x + i y: in the variable
/// zeta = 2^{-3/4}/conj(z) = mu + i kappa^{3/4} the map is mu -> 2 mu01 - mu.
inline PlanePoint zero_case_mirror(const PlanePoint& z, double mu01) {
  const double c = std::pow(2.0, -0.75);
  // zeta = c / conj(z) = c z / |z|^2
  const double r2 = z.x * z.x + z.y * z.y;
  const double zr = c * z.x / r2, zi = c * z.y / r2;
  // w = 2 mu01 - zeta; result = c / w
  const double wr = 2.0 * mu01 - zr, wi = -zi;
  const double w2 = wr * wr + wi * wi;
  return {c * wr / w2, -c * wi / w2};
}

// ---------------------------------------------------------------------------
// Arc length
// ---------------------------------------------------------------------------

struct ArcSample {
  double u = 0.0;      ///< Minkowski arc length from the start of the window
  double t = 0.0;      ///< signed curve parameter, kappa = kappa01 - t^2
  double kappa = 0.0;
  MinkowskiVec sigma;
};

/// A window of the glued profile curve (v = 0) around the gluing point,
/// parametrised by the signed t with kappa = kappa01 - t^2 and
/// mu = mu01 - sign(t) (mu01 - mu0(kappa)); t > 0 is branch (+,0). The arc
/// length u(t) = int |d sigma/dt| dt is tabulated from finite-difference
/// speeds, so nothing about P enters and the first integral can be checked
/// against the reparametrised curve.
class ArcLengthProfile {
 public:
  ArcLengthProfile(const CaseParams& p, double kappa_lo, int nodes = 256, double h = 3e-4)
      : p_(&p), h_(h) {
    if (!(kappa_lo > 0.0 && kappa_lo < p.kappa01())) throw Error(Errc::OutOfDomain, "kappa_lo must lie in (0, kappa01)");
    t_max_ = std::sqrt(p.kappa01() - kappa_lo);
    if (t_max_ + 2.0 * h >= std::sqrt(p.kappa01())) throw Error(Errc::OutOfDomain, "kappa_lo too close to 0 for the step");
    const CaseParams* pp = p_;
    table_ = CumulativeIntegral([pp, h](double t) { return speed(*pp, t, h); }, uniform_nodes(-t_max_, t_max_, nodes),
                                1e-11);
    length_ = table_.values().back();
  }

  static double mu_of_t(const CaseParams& p, double t) { return p.mu01() - p.mu_gap_of_s_any(t); }
  static double kappa_of_t(const CaseParams& p, double t) { return p.kappa01() - t * t; }
  static MinkowskiVec point(const CaseParams& p, double t) {
    return glued_point_t(t, 0.0, p);
  }

  static double speed(const CaseParams& p, double t, double h) {
    auto diff = [&](double step) { return (point(p, t + step) - point(p, t - step)) / (2.0 * step); };
    const MinkowskiVec d = (4.0 * diff(0.5 * h) - diff(h)) / 3.0;
    const double s2 = minkowski_inner(d, d);
    if (!(s2 > 0.0)) throw Error(Errc::DegenerateSegment, "non-spacelike tangent at t = " + std::to_string(t));
    return std::sqrt(s2);
  }

  double length() const { return length_; }
  double t_max() const { return t_max_; }
  double t_of_u(double u) const { return table_.inverse(u); }
  double u_of_t(double t) const { return table_(t); }

  ArcSample at(double u) const {
    const double t = t_of_u(u);
    return {u, t, kappa_of_t(*p_, t), point(*p_, t)};
  }

  /// n samples uniform in u within [margin, length - margin].
  std::vector<ArcSample> resample(int n, double margin = 0.0) const {
    std::vector<ArcSample> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out.push_back(at(margin + (length_ - 2.0 * margin) * (i + 0.5) / n));
    return out;
  }

  const CaseParams& params() const { return *p_; }

 private:
  const CaseParams* p_;
  double h_;
  double t_max_ = 0.0;
  CumulativeIntegral table_;
  double length_ = 0.0;
};

/// Arc-length reparametrisation of the profile window kappa in [kappa_lo, kappa01]
/// on both branches, resampled uniformly in u.
inline std::vector<ArcSample> arc_length_reparam(const CaseParams& p, double kappa_lo, int n) {
  return ArcLengthProfile(p, kappa_lo).resample(n);
}

struct FirstIntegralStats {
  double max_residual = 0.0;   ///< max |kappa_u^2 - P(kappa)| / max P
  double max_speed_error = 0.0;  ///< max ||sigma_u| - 1|
  double P_scale = 0.0;
  int samples = 0;
};

/// Checks (d kappa/du)^2 = P(kappa) along an arc-length reparametrised window
/// of the glued profile; kappa_u and sigma_u come from symmetric differences
/// in u. Residuals are scaled by max P on (0, kappa01) because both sides
/// vanish at the gluing point.
inline FirstIntegralStats first_integral_residual(const ArcLengthProfile& arc, int n = 200, double h = 1e-3) {
  const CaseParams& p = arc.params();
  FirstIntegralStats st;
  for (int i = 1; i < 400; ++i) st.P_scale = std::max(st.P_scale, p.P(p.kappa01() * i / 400.0));
  for (const auto& s : arc.resample(n, 4.0 * h)) {
    const ArcSample a = arc.at(s.u + h), b = arc.at(s.u - h);
    const ArcSample a2 = arc.at(s.u + 0.5 * h), b2 = arc.at(s.u - 0.5 * h);
    const double ku = (4.0 * (a2.kappa - b2.kappa) / h - (a.kappa - b.kappa) / (2.0 * h)) / 3.0;
    const MinkowskiVec d = (4.0 * (a2.sigma - b2.sigma) / h - (a.sigma - b.sigma) / (2.0 * h)) / 3.0;
    st.max_residual = std::max(st.max_residual, std::fabs(ku * ku - p.P(s.kappa)) / st.P_scale);
    st.max_speed_error = std::max(st.max_speed_error, std::fabs(std::sqrt(minkowski_inner(d, d)) - 1.0));
    ++st.samples;
  }
  return st;
}

}  // namespace bicons
