#pragma once

// Finite-difference audit of an immersion into H^3 c R^4_1. Everything here
// works from point values X(m, v) only: fundamental forms, shape operator,
// mean curvature f, grad f, the frame {X1, X2, eta} and the identities a
// biconservative surface has to satisfy.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "bicons/error.hpp"
#include "bicons/extrinsic.hpp"
#include "bicons/models.hpp"
#include "bicons/numerics.hpp"

namespace bicons {

using SurfaceSampler = std::function<MinkowskiVec(double m, double v)>;

/// X sampled on the lattice (m0 + i hm, v0 + j hv), i < nm, j < nv.
struct ImmersionGrid {
  double m0 = 0.0, v0 = 0.0;
  double hm = 1e-3, hv = 1e-3;
  int nm = 0, nv = 0;
  std::vector<MinkowskiVec> X;  ///< row-major in m
  std::string label;
  double max_defect = 0.0;  ///< max |<X,X> + 1| / max(1, x4^2)
  double max_abs_defect = 0.0;

  const MinkowskiVec& at(int i, int j) const { return X[static_cast<std::size_t>(i) * nv + j]; }
  double m(int i) const { return m0 + i * hm; }
  double v(int j) const { return v0 + j * hv; }
};

/// Samples fn on an nm x nv lattice spanning the closed rectangle. Throws
/// HyperboloidConstraintViolated if a sample is off H^3 by more than tol
/// (relative to max(1, x4^2)).
inline ImmersionGrid sample_grid(const SurfaceSampler& fn, Interval m, Interval v, int nm, int nv,
                                 std::string label = {}, double tol = 1e-8) {
  if (nm < 2 || nv < 2) throw Error(Errc::BadConfig, "grid needs at least 2 x 2 nodes");
  ImmersionGrid g;
  g.m0 = m.lo;
  g.v0 = v.lo;
  g.hm = (m.hi - m.lo) / (nm - 1);
  g.hv = (v.hi - v.lo) / (nv - 1);
  g.nm = nm;
  g.nv = nv;
  g.label = std::move(label);
  g.X.reserve(static_cast<std::size_t>(nm) * nv);
  for (int i = 0; i < nm; ++i) {
    for (int j = 0; j < nv; ++j) {
      const MinkowskiVec x = fn(g.m(i), g.v(j));
      const double d = hyperboloid_defect(x) / std::max(1.0, x.x4 * x.x4);
      if (!(d <= tol) || !(x.x4 > 0.0)) {
        throw Error(Errc::HyperboloidConstraintViolated,
                    g.label + ": sample off H^3 at (" + std::to_string(g.m(i)) + ", " + std::to_string(g.v(j)) +
                        "), relative defect " + std::to_string(d));
      }
      g.max_defect = std::max(g.max_defect, d);
      g.max_abs_defect = std::max(g.max_abs_defect, hyperboloid_defect(x));
      g.X.push_back(x);
    }
  }
  return g;
}

/// A (2r+1) x (2r+1) lattice centred on (m, v) with spacing h.
inline ImmersionGrid sample_patch(const SurfaceSampler& fn, double m, double v, double h, int r = 2,
                                  double tol = 1e-8) {
  return sample_grid(fn, {m - r * h, m + r * h}, {v - r * h, v + r * h}, 2 * r + 1, 2 * r + 1, "patch", tol);
}

namespace detail {

// Central stencils on offsets -3..3. Order 4 is the five-point rule, i.e.
// one Richardson step (4 D_h - D_2h) / 3 on central differences; order 6 adds
// a second step.
struct Stencil {
  int radius = 2;
  std::array<double, 7> d1{};
  std::array<double, 7> d2{};
};

inline Stencil stencil_of_order(int order) {
  if (order == 4) {
    return {2, {0, 1.0 / 12, -8.0 / 12, 0, 8.0 / 12, -1.0 / 12, 0},
            {0, -1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12, -1.0 / 12, 0}};
  }
  if (order == 6) {
    return {3, {-1.0 / 60, 9.0 / 60, -45.0 / 60, 0, 45.0 / 60, -9.0 / 60, 1.0 / 60},
            {2.0 / 180, -27.0 / 180, 270.0 / 180, -490.0 / 180, 270.0 / 180, -27.0 / 180, 2.0 / 180}};
  }
  throw Error(Errc::BadConfig, "stencil order must be 4 or 6");
}

template <class T, class Get>
T stencil(const std::array<double, 7>& w, Get get) {
  T acc{};
  for (int k = 0; k < 7; ++k) {
    if (w[k] != 0.0) acc += w[k] * get(k - 3);
  }
  return acc;
}

inline double det3(const std::array<std::array<double, 3>, 3>& a) {
  return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
         a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
}

/// Euclidean generalised cross product: n . a = n . b = n . c = 0.
inline MinkowskiVec cross3(const MinkowskiVec& a, const MinkowskiVec& b, const MinkowskiVec& c) {
  MinkowskiVec n;
  for (int k = 0; k < 4; ++k) {
    std::array<std::array<double, 3>, 3> minor{};
    for (int col = 0, mc = 0; col < 4; ++col) {
      if (col == k) continue;
      minor[0][mc] = a[col];
      minor[1][mc] = b[col];
      minor[2][mc] = c[col];
      ++mc;
    }
    n[k] = ((k % 2) ? -1.0 : 1.0) * det3(minor);
  }
  return n;
}

}  // namespace detail

using Mat2 = std::array<std::array<double, 2>, 2>;

struct FundamentalForms {
  MinkowskiVec X, Xm, Xv;
  MinkowskiVec eta;  ///< unit normal in H^3, signed so that f >= 0
  double E = 0, F = 0, G = 0;
  double L = 0, M = 0, N = 0;
  Mat2 A{};  ///< A^i_j = g^{ik} h_{kj}
  double f = 0;  ///< trace A
  double K = 0;  ///< det A - 1
  double normal_defect = 0;  ///< max of |<eta,eta> - 1|, |<eta,X>| and |<eta,X_i>| / |X_i|

  double metric_det() const { return E * G - F * F; }
  /// Inverse first form {g^11, g^12, g^22}.
  std::array<double, 3> inverse_metric() const {
    const double d = metric_det();
    return {G / d, -F / d, E / d};
  }
};

/// Forms at an interior node of the grid; the stencil of the given order
/// (4 or 6) must fit inside the grid.
inline FundamentalForms fundamental_forms(const ImmersionGrid& g, int i, int j, int order = 4) {
  const detail::Stencil st = detail::stencil_of_order(order);
  const int r = st.radius;
  if (i < r || j < r || i > g.nm - 1 - r || j > g.nv - 1 - r) {
    throw Error(Errc::StencilOutOfDomain, "fundamental_forms needs a full stencil around the node");
  }
  using detail::stencil;
  FundamentalForms ff;
  ff.X = g.at(i, j);
  ff.Xm = stencil<MinkowskiVec>(st.d1, [&](int k) { return g.at(i + k, j); }) / g.hm;
  ff.Xv = stencil<MinkowskiVec>(st.d1, [&](int k) { return g.at(i, j + k); }) / g.hv;
  const MinkowskiVec Xmm = stencil<MinkowskiVec>(st.d2, [&](int k) { return g.at(i + k, j); }) / (g.hm * g.hm);
  const MinkowskiVec Xvv = stencil<MinkowskiVec>(st.d2, [&](int k) { return g.at(i, j + k); }) / (g.hv * g.hv);
  const MinkowskiVec Xmv = stencil<MinkowskiVec>(st.d1, [&](int a) {
                             return stencil<MinkowskiVec>(st.d1, [&](int b) { return g.at(i + a, j + b); });
                           }) / (g.hm * g.hv);

  ff.E = minkowski_inner(ff.Xm, ff.Xm);
  ff.F = minkowski_inner(ff.Xm, ff.Xv);
  ff.G = minkowski_inner(ff.Xv, ff.Xv);
  const double D = ff.metric_det();
  if (!(ff.E > 0.0) || !(D > 0.0)) throw Error(Errc::DegenerateMetric, "first fundamental form is not positive definite");

  // Raise the Euclidean cross product with diag(1,1,1,-1) so that it is
  // Minkowski-orthogonal to X, X_m and X_v.
  MinkowskiVec eta = detail::cross3(ff.X, ff.Xm, ff.Xv);
  eta.x4 = -eta.x4;
  const double nn = minkowski_inner(eta, eta);
  if (!(nn > 0.0) || !std::isfinite(nn)) throw Error(Errc::NormalUndefined, "normal is not spacelike");
  eta = eta / std::sqrt(nn);

  ff.L = minkowski_inner(Xmm, eta);
  ff.M = minkowski_inner(Xmv, eta);
  ff.N = minkowski_inner(Xvv, eta);
  const auto gi = ff.inverse_metric();
  ff.A = {{{gi[0] * ff.L + gi[1] * ff.M, gi[0] * ff.M + gi[1] * ff.N},
           {gi[1] * ff.L + gi[2] * ff.M, gi[1] * ff.M + gi[2] * ff.N}}};
  ff.f = ff.A[0][0] + ff.A[1][1];
  if (ff.f < 0.0) {
    eta = -eta;
    ff.L = -ff.L;
    ff.M = -ff.M;
    ff.N = -ff.N;
    for (auto& row : ff.A)
      for (auto& a : row) a = -a;
    ff.f = -ff.f;
  }
  ff.eta = eta;
  ff.K = ff.A[0][0] * ff.A[1][1] - ff.A[0][1] * ff.A[1][0] - 1.0;
  ff.normal_defect = std::max({std::fabs(minkowski_inner(eta, eta) - 1.0), std::fabs(minkowski_inner(eta, ff.X)),
                               std::fabs(minkowski_inner(eta, ff.Xm)) / euclidean_norm(ff.Xm),
                               std::fabs(minkowski_inner(eta, ff.Xv)) / euclidean_norm(ff.Xv)});
  return ff;
}

inline FundamentalForms forms_at(const SurfaceSampler& fn, double m, double v, double h, int order = 4) {
  const int r = detail::stencil_of_order(order).radius;
  return fundamental_forms(sample_patch(fn, m, v, h, r), r, r, order);
}

/// Steps and stencil orders for the three nested difference levels: h1 for
/// the embedding itself, h2 for derivatives of f, h3 for derivatives of the
/// frame fields. Each level divides the rounding noise of the one below by
/// its step, so the inner levels use the sixth-order rule (two Richardson
/// steps) at steps where truncation is still far below the noise.
struct AuditSteps {
  double h1 = 1e-2;
  double h2 = 3e-2;
  double h3 = 5e-2;
  int order1 = 6;  ///< 4 or 6
  int order2 = 6;
  int order3 = 4;
  double grad_threshold = 1e-6;
};

/// Quantities at one point that need first derivatives of f.
struct GradientData {
  FundamentalForms ff;
  double fm = 0, fv = 0;
  std::array<double, 2> grad{};  ///< coordinate components of grad f
  double grad_norm = 0;          ///< |grad f| = X1 f
  bool frame_defined = false;    ///< grad_norm >= threshold
  std::array<double, 2> c1{}, c2{};
  MinkowskiVec X1, X2;
  double W = 0;
  double kappa2 = 0;
  MinkowskiVec N2;  ///< (3 X1f / 4f X1 + 3f/2 eta + x) / kappa2, zero when kappa2 = 0
  std::array<double, 2> flux{};  ///< sqrt(det g) g^{ij} f_j
  double X2f = 0;
  double bicons = 0;  ///< relative |A grad f + (f/2) grad f|, 0 below the threshold
};

inline GradientData gradient_data(const SurfaceSampler& fn, double m, double v, const AuditSteps& s) {
  const detail::Stencil st = detail::stencil_of_order(s.order2);
  GradientData gd;
  gd.ff = forms_at(fn, m, v, s.h1, s.order1);
  std::array<double, 7> fm{}, fv{};
  for (int k = -st.radius; k <= st.radius; ++k) {
    fm[k + 3] = k == 0 ? gd.ff.f : forms_at(fn, m + k * s.h2, v, s.h1, s.order1).f;
    fv[k + 3] = k == 0 ? gd.ff.f : forms_at(fn, m, v + k * s.h2, s.h1, s.order1).f;
  }
  gd.fm = detail::stencil<double>(st.d1, [&](int k) { return fm[k + 3]; }) / s.h2;
  gd.fv = detail::stencil<double>(st.d1, [&](int k) { return fv[k + 3]; }) / s.h2;

  const FundamentalForms& ff = gd.ff;
  const auto gi = ff.inverse_metric();
  const double f = ff.f;
  gd.grad = {gi[0] * gd.fm + gi[1] * gd.fv, gi[1] * gd.fm + gi[2] * gd.fv};
  gd.grad_norm = std::sqrt(std::max(0.0, gd.grad[0] * gd.fm + gd.grad[1] * gd.fv));
  const double sq = std::sqrt(ff.metric_det());
  gd.flux = {sq * gd.grad[0], sq * gd.grad[1]};
  gd.W = 9.0 * gd.grad_norm * gd.grad_norm / (16.0 * f * f) + 9.0 * f * f / 4.0 - 1.0;
  gd.kappa2 = std::sqrt(std::fabs(gd.W));

  auto inner = [&](const std::array<double, 2>& a, const std::array<double, 2>& b) {
    return ff.E * a[0] * b[0] + ff.F * (a[0] * b[1] + a[1] * b[0]) + ff.G * a[1] * b[1];
  };
  gd.frame_defined = gd.grad_norm >= s.grad_threshold;
  if (gd.frame_defined) {
    gd.c1 = {gd.grad[0] / gd.grad_norm, gd.grad[1] / gd.grad_norm};
    const double p = ff.E * gd.c1[0] + ff.F * gd.c1[1];
    const double q = ff.F * gd.c1[0] + ff.G * gd.c1[1];
    std::array<double, 2> c2{-q, p};
    const double n2 = std::sqrt(inner(c2, c2));
    gd.c2 = {c2[0] / n2, c2[1] / n2};
    gd.X1 = gd.c1[0] * ff.Xm + gd.c1[1] * ff.Xv;
    gd.X2 = gd.c2[0] * ff.Xm + gd.c2[1] * ff.Xv;
    gd.X2f = gd.c2[0] * gd.fm + gd.c2[1] * gd.fv;

    const std::array<double, 2> Ag{ff.A[0][0] * gd.grad[0] + ff.A[0][1] * gd.grad[1],
                                   ff.A[1][0] * gd.grad[0] + ff.A[1][1] * gd.grad[1]};
    const std::array<double, 2> r{Ag[0] + 0.5 * f * gd.grad[0], Ag[1] + 0.5 * f * gd.grad[1]};
    gd.bicons = std::sqrt(std::max(0.0, inner(r, r))) / (gd.grad_norm * f + 1e-12);

    if (gd.kappa2 > 0.0) {
      gd.N2 = (3.0 * gd.grad_norm / (4.0 * f) * gd.X1 + 1.5 * f * ff.eta + ff.X) / gd.kappa2;
    }
  }
  return gd;
}

/// Every residual available at one point. Third-level entries are NaN where
/// the frame is undefined at any stencil node.
struct PointAudit {
  double m = 0, v = 0;
  GradientData gd;
  bool frame_tested = false;
  double gauss = 0;            ///< K + 3f^2/4 + 1
  double frame_11 = NAN, frame_12 = NAN, frame_21 = NAN, frame_22 = NAN;  ///< relative to |x|
  double w_norm = NAN;         ///< <D_X2 X2, D_X2 X2> - W
  double X2X1f = NAN;
  double laplace = NAN;        ///< relative residual of f Lap f + |grad f|^2 - 4f^2/3 - f^4 = 0
  double X2W = NAN;            ///< X2 W; zero iff X2 kappa2 = 0 wherever W != 0
  double n2_transport = NAN;   ///< |D_X2 N2 -/+ kappa2 N2|, diagnostic only
};

inline PointAudit audit_point(const SurfaceSampler& fn, double m, double v, const AuditSteps& s,
                              bool third_level = true) {
  const detail::Stencil st = detail::stencil_of_order(s.order3);
  PointAudit pa;
  pa.m = m;
  pa.v = v;
  pa.gd = gradient_data(fn, m, v, s);
  const double f = pa.gd.ff.f;
  pa.gauss = pa.gd.ff.K + 0.75 * f * f + 1.0;
  if (!third_level || !pa.gd.frame_defined) return pa;

  std::array<GradientData, 7> gm, gv;
  for (int k = -st.radius; k <= st.radius; ++k) {
    gm[k + 3] = k == 0 ? pa.gd : gradient_data(fn, m + k * s.h3, v, s);
    gv[k + 3] = k == 0 ? pa.gd : gradient_data(fn, m, v + k * s.h3, s);
    if (!gm[k + 3].frame_defined || !gv[k + 3].frame_defined) return pa;
  }
  pa.frame_tested = true;
  const GradientData& c = pa.gd;
  // Directional derivative of a field along the coordinate direction (a, b).
  auto along = [&]<class T>(const std::array<double, 2>& dir, auto field) -> T {
    const T dm = detail::stencil<T>(st.d1, [&](int k) { return field(gm[k + 3]); }) / s.h3;
    const T dv = detail::stencil<T>(st.d1, [&](int k) { return field(gv[k + 3]); }) / s.h3;
    return dir[0] * dm + dir[1] * dv;
  };
  auto X1 = [](const GradientData& g) { return g.X1; };
  auto X2 = [](const GradientData& g) { return g.X2; };
  const MinkowskiVec D11 = along.operator()<MinkowskiVec>(c.c1, X1);
  const MinkowskiVec D12 = along.operator()<MinkowskiVec>(c.c1, X2);
  const MinkowskiVec D21 = along.operator()<MinkowskiVec>(c.c2, X1);
  const MinkowskiVec D22 = along.operator()<MinkowskiVec>(c.c2, X2);
  const MinkowskiVec& x = c.ff.X;
  const MinkowskiVec& eta = c.ff.eta;
  const double a = 3.0 * c.grad_norm / (4.0 * f);
  const double xs = euclidean_norm(x);
  pa.frame_11 = euclidean_norm(D11 - (-0.5 * f * eta + x)) / xs;
  pa.frame_12 = euclidean_norm(D12) / xs;
  pa.frame_21 = euclidean_norm(D21 + a * c.X2) / xs;
  pa.frame_22 = euclidean_norm(D22 - (a * c.X1 + 1.5 * f * eta + x)) / xs;
  pa.w_norm = minkowski_inner(D22, D22) - c.W;
  pa.X2X1f = along.operator()<double>(c.c2, [](const GradientData& g) { return g.grad_norm; });
  pa.X2W = along.operator()<double>(c.c2, [](const GradientData& g) { return g.W; });

  const double div = (detail::stencil<double>(st.d1, [&](int k) { return gm[k + 3].flux[0]; }) +
                      detail::stencil<double>(st.d1, [&](int k) { return gv[k + 3].flux[1]; })) /
                     s.h3;
  const double lap = div / std::sqrt(c.ff.metric_det());  // analyst's Laplacian; the identity uses its negative
  const double g2 = c.grad_norm * c.grad_norm;
  pa.laplace = std::fabs(-f * lap + g2 - 4.0 / 3.0 * f * f - f * f * f * f) / (g2 + 4.0 / 3.0 * f * f + f * f * f * f);

  if (c.kappa2 > 1e-3) {
    const MinkowskiVec DN = along.operator()<MinkowskiVec>(c.c2, [](const GradientData& g) { return g.N2; });
    const double sgn = c.W > 0.0 ? 1.0 : -1.0;
    pa.n2_transport = euclidean_norm(DN - sgn * c.kappa2 * c.N2);
  }
  return pa;
}

struct ResidualStats {
  std::string name;
  double max = 0.0;
  double mean = 0.0;
  int count = 0;
  int excluded = 0;
  double tol = 0.0;
  bool pass = true;
  bool diagnostic = false;  ///< recorded, never asserted

  void add(double r) {
    if (!std::isfinite(r)) {
      ++excluded;
      return;
    }
    r = std::fabs(r);
    max = std::max(max, r);
    mean += (r - mean) / (count + 1);
    ++count;
  }
  ResidualStats& finish() {
    pass = diagnostic || (count > 0 && max < tol);
    return *this;
  }
};

inline ResidualStats make_stats(std::string name, double tol, bool diagnostic = false) {
  ResidualStats s;
  s.name = std::move(name);
  s.tol = tol;
  s.diagnostic = diagnostic;
  return s;
}

/// Audit lattice nm x nv over the rectangle (closed), all points in index order.
inline std::vector<PointAudit> audit_region(const SurfaceSampler& fn, Interval m, Interval v, int nm, int nv,
                                            const AuditSteps& s = {}, bool third_level = true) {
  std::vector<PointAudit> out;
  out.reserve(static_cast<std::size_t>(nm) * nv);
  for (int i = 0; i < nm; ++i) {
    const double mi = nm == 1 ? m.lo : m.lo + (m.hi - m.lo) * i / (nm - 1);
    for (int j = 0; j < nv; ++j) {
      const double vj = nv == 1 ? v.lo : v.lo + (v.hi - v.lo) * j / (nv - 1);
      out.push_back(audit_point(fn, mi, vj, s, third_level));
    }
  }
  return out;
}

/// A(grad f) = -(f/2) grad f, relative residual; points with |grad f| below the
/// threshold count as 0.
inline ResidualStats biconservative_residual(const std::vector<PointAudit>& pts, double tol = 1e-4) {
  ResidualStats st = make_stats("biconservative", tol);
  for (const auto& p : pts) st.add(p.gd.frame_defined ? p.gd.bicons : 0.0);
  return st.finish();
}

struct IdentityTolerances {
  double gauss = 1e-5;
  double f_vs_kappa = 1e-5;
  double kappa2 = 1e-4;
  double W_zero = 1e-6;
  double W_xi = 1e-4;
  double laplace = 1e-4;
  double normal = 1e-6;
};

/// Identities that relate f, K, W to the family constants. kappa_at(m, v) is
/// the curvature parameter the sample was built from; only the constants
/// C~ and C-1 are taken from params.
inline std::vector<ResidualStats> identity_report(const std::vector<PointAudit>& pts, const CaseParams& params,
                                                  const std::function<double(double, double)>& kappa_at,
                                                  const IdentityTolerances& tol = {}) {
  const double ct = params.ctilde();
  const double cm1 = params.cminus1_link();
  ResidualStats gauss = make_stats("gauss_K_plus_3f2_over_4_plus_1", tol.gauss);
  ResidualStats fk = make_stats("f_equals_2kappa", tol.f_vs_kappa);
  ResidualStats k2 = make_stats("kappa2_relation", tol.kappa2);
  ResidualStats wsign = make_stats(ct == 0.0 ? "W_vanishes" : "W_sign", ct == 0.0 ? tol.W_zero : 0.5);
  ResidualStats wxi = make_stats("W_equals_cminus1_xi2_over_3", tol.W_xi);
  ResidualStats lap = make_stats("laplace_identity", tol.laplace);
  ResidualStats nrm = make_stats("normal_defect", tol.normal);
  for (const auto& p : pts) {
    const auto& gd = p.gd;
    const double f = gd.ff.f;
    gauss.add(p.gauss);
    fk.add(f - 2.0 * kappa_at(p.m, p.v));
    nrm.add(gd.ff.normal_defect);
    if (ct != 0.0) {
      const double expect = 0.75 * std::sqrt(std::fabs(ct)) * std::pow(0.5 * f, 0.75);
      k2.add((gd.kappa2 - expect) / expect);
      const bool ok = (gd.W > 0.0) == (ct > 0.0) && gd.W != 0.0;
      wsign.add(ok ? 0.0 : 1.0);
    } else {
      wsign.add(gd.W);
    }
    const double xi = std::pow(9.0 * (-1.0 - gd.ff.K), 0.375);
    wxi.add(gd.W - cm1 / 3.0 * xi * xi);
    if (p.frame_tested) lap.add(p.laplace);
  }
  std::vector<ResidualStats> out{gauss.finish(), fk.finish()};
  if (ct != 0.0) out.push_back(k2.finish());
  out.push_back(wsign.finish());
  out.push_back(wxi.finish());
  out.push_back(lap.finish());
  out.push_back(nrm.finish());
  return out;
}

struct FrameTolerances {
  double connection = 1e-4;
  double w_norm = 1e-4;
  double X2f = 1e-5;
  double X2X1f = 1e-5;
  double X2W = 1e-4;
};

/// Frame equations for {X1 = grad f/|grad f|, X2, eta}: the four flat
/// derivatives, |D_X2 X2|^2 = W, X2 f = 0, X2(X1 f) = 0 and X2 W = 0 (the
/// integral curves of X2 have constant curvature kappa2 = sqrt|W|).
/// The transport of N2 along X2 is recorded as a diagnostic.
inline std::vector<ResidualStats> frame_residuals(const std::vector<PointAudit>& pts, const FrameTolerances& tol = {}) {
  ResidualStats a = make_stats("frame_D_X1_X1", tol.connection), b = make_stats("frame_D_X1_X2", tol.connection),
                c = make_stats("frame_D_X2_X1", tol.connection), d = make_stats("frame_D_X2_X2", tol.connection),
                w = make_stats("frame_norm_D_X2_X2_equals_W", tol.w_norm), x2f = make_stats("X2_f", tol.X2f),
                x2x1f = make_stats("X2_X1_f", tol.X2X1f), x2k = make_stats("X2_W", tol.X2W),
                n2t = make_stats("N2_transport_diagnostic", 0.0, true);
  for (const auto& p : pts) {
    if (!p.gd.frame_defined) {
      ++x2f.excluded;
    } else {
      x2f.add(p.gd.X2f);
    }
    if (!p.frame_tested) {
      for (auto* s : {&a, &b, &c, &d, &w, &x2x1f, &x2k, &n2t}) ++s->excluded;
      continue;
    }
    a.add(p.frame_11);
    b.add(p.frame_12);
    c.add(p.frame_21);
    d.add(p.frame_22);
    w.add(p.w_norm);
    x2x1f.add(p.X2X1f);
    x2k.add(p.X2W);
    n2t.add(p.n2_transport);
  }
  return {a.finish(), b.finish(), c.finish(), d.finish(), w.finish(),
          x2f.finish(), x2x1f.finish(), x2k.finish(), n2t.finish()};
}

/// <s,s> + 1, |s'|^2 - 1 and |s''|^2 - (kappa^2 - 1) along an arc-length
/// parametrised profile window; s' and s'' are five-point differences in u.
inline std::vector<ResidualStats> profile_constraints_residual(const ArcLengthProfile& arc, int n = 200,
                                                               double h = 2e-3) {
  ResidualStats on = make_stats("profile_on_H3", 1e-8), unit = make_stats("profile_unit_speed", 1e-6),
                acc = make_stats("profile_acceleration", 1e-4);
  const detail::Stencil st = detail::stencil_of_order(4);
  for (const auto& s : arc.resample(n, 3.0 * h)) {
    std::array<MinkowskiVec, 7> pts;
    for (int k = -2; k <= 2; ++k) pts[k + 3] = k == 0 ? s.sigma : arc.at(s.u + k * h).sigma;
    const MinkowskiVec d1 = detail::stencil<MinkowskiVec>(st.d1, [&](int k) { return pts[k + 3]; }) / h;
    const MinkowskiVec d2 = detail::stencil<MinkowskiVec>(st.d2, [&](int k) { return pts[k + 3]; }) / (h * h);
    on.add(minkowski_inner(s.sigma, s.sigma) + 1.0);
    unit.add(minkowski_inner(d1, d1) - 1.0);
    acc.add(minkowski_inner(d2, d2) - (s.kappa * s.kappa - 1.0));
  }
  return {on.finish(), unit.finish(), acc.finish()};
}

/// The glued surface in the coordinate tau, kappa = kappa01 sech^2(tau),
/// t = sqrt(kappa01) tanh(tau). The seam is tau = 0 and kappa -> 0 only as
/// |tau| -> infinity, so fixed-step stencils fit anywhere; tau > 0 is branch
/// (+,0).
inline SurfaceSampler glued_surface_sampler(const CaseParams& p,
                                            CoefficientVariant variant = CoefficientVariant::four_thirds) {
  const CaseParams* pp = &p;
  return [pp, variant](double tau, double v) {
    return glued_point_t(std::sqrt(pp->kappa01()) * std::tanh(tau), v, *pp, variant);
  };
}

inline double glued_kappa_of_tau(const CaseParams& p, double tau) {
  const double c = std::cosh(tau);
  return p.kappa01() / (c * c);
}

/// tau with kappa = fraction * kappa01.
inline double glued_tau_of_fraction(double fraction) { return std::acosh(1.0 / std::sqrt(fraction)); }

/// grad f across the seam t = 0 of the glued surface, sampled in a signed
/// parameter (seam at 0): |grad f| must stay above the threshold on the open halves,
/// and the symmetric difference of f across t = 0 must vanish.
struct SeamReport {
  ResidualStats grad_floor;  ///< records 1 / |grad f|; passes when every |grad f| > threshold
  double min_grad = std::numeric_limits<double>::infinity();
  double seam_derivative = 0.0;  ///< max over v of |f_t| at t = 0
  double seam_grad = 0.0;        ///< max over v of |grad f| at t = 0
  double tol = 1e-6;
  bool pass = false;
};

inline SeamReport seam_check(const SurfaceSampler& fn, double t_inner, double t_outer, Interval v, int nt, int nv,
                             const AuditSteps& s = {}, double tol = 1e-6) {
  SeamReport r;
  r.tol = tol;
  r.grad_floor = make_stats("grad_f_floor", 1.0 / tol);
  for (int side : {1, -1}) {
    for (const auto& p : audit_region(fn, {side * t_inner, side * t_outer}, v, nt, nv, s, false)) {
      r.min_grad = std::min(r.min_grad, p.gd.grad_norm);
      r.grad_floor.add(p.gd.grad_norm > 0.0 ? 1.0 / p.gd.grad_norm : std::numeric_limits<double>::max());
    }
  }
  r.grad_floor.finish();
  for (const auto& p : audit_region(fn, {0.0, 0.0}, v, 1, nv, s, false)) {
    r.seam_derivative = std::max(r.seam_derivative, std::fabs(p.gd.fm));
    r.seam_grad = std::max(r.seam_grad, p.gd.grad_norm);
  }
  r.pass = r.grad_floor.pass && r.min_grad > tol && r.seam_derivative < tol;
  return r;
}

struct VerifyOptions {
  AuditSteps steps;
  double kappa_lo_fraction = 0.1;  ///< interior region kappa in [lo, hi] kappa01
  double kappa_hi_fraction = 0.9;
  int n_tau = 6;  ///< audit points per half in tau
  int n_v = 3;
  Interval v_range{-1.0, 1.0};
  int hyperboloid_grid = 50;
  int profile_samples = 200;
  double seam_inner_tau = 1e-2;
  double biconservative_tol = 1e-4;
  IdentityTolerances identity;
  FrameTolerances frame;
};

struct VariantOutcome {
  CoefficientVariant variant = CoefficientVariant::four_thirds;
  bool on_hyperboloid = false;
  double max_defect = 0.0;
  bool biconservative = false;
  double biconservative_max = 0.0;
  std::string note;
};

struct VerifyReport {
  double ctilde = 0.0;
  CaseTag tag = CaseTag::positive;
  CoefficientVariant variant = CoefficientVariant::four_thirds;
  std::vector<VariantOutcome> arbitration;
  std::vector<ResidualStats> suites;
  SeamReport seam;

  bool pass() const {
    return std::all_of(suites.begin(), suites.end(), [](const ResidualStats& s) { return s.pass; }) && seam.pass;
  }
  /// Name of the first failing suite, empty when everything passed.
  std::string first_failure() const {
    for (const auto& s : suites)
      if (!s.pass) return s.name;
    return seam.pass ? std::string{} : std::string("seam");
  }
};

namespace detail {

inline VariantOutcome try_variant(const CaseParams& p, CoefficientVariant variant, const VerifyOptions& opt) {
  VariantOutcome out;
  out.variant = variant;
  const SurfaceSampler fn = glued_surface_sampler(p, variant);
  const double b = glued_tau_of_fraction(opt.kappa_lo_fraction);
  try {
    const ImmersionGrid g =
        sample_grid(fn, {-b, b}, {2.0 * opt.v_range.lo, 2.0 * opt.v_range.hi}, opt.hyperboloid_grid,
                    opt.hyperboloid_grid, "hyperboloid sweep");
    out.on_hyperboloid = true;
    out.max_defect = g.max_defect;
  } catch (const Error& e) {
    out.note = e.what();
    return out;
  }
  const double a = glued_tau_of_fraction(opt.kappa_hi_fraction);
  std::vector<PointAudit> pts;
  for (int side : {1, -1}) {
    const double lo = side > 0 ? a : -b, hi = side > 0 ? b : -a;
    for (const auto& pa : audit_region(fn, {lo, hi}, opt.v_range, opt.n_tau, opt.n_v, opt.steps, false)) pts.push_back(pa);
  }
  const ResidualStats bc = biconservative_residual(pts, opt.biconservative_tol);
  out.biconservative = bc.pass;
  out.biconservative_max = bc.max;
  return out;
}

}  // namespace detail

/// Runs every suite on the glued surface of the family. For C~ < 0 both
/// coefficient variants of the circle term are tried; the first one that lies
/// on H^3 and passes the biconservative test is audited, the theorem variant
/// first.
inline VerifyReport verify_family(const CaseParams& p, const VerifyOptions& opt = {}) {
  VerifyReport rep;
  rep.ctilde = p.ctilde();
  rep.tag = p.tag();
  std::vector<CoefficientVariant> variants{CoefficientVariant::four_thirds};
  if (p.tag() == CaseTag::negative) variants.push_back(CoefficientVariant::two_root2_thirds);
  for (auto v : variants) rep.arbitration.push_back(detail::try_variant(p, v, opt));
  for (const auto& o : rep.arbitration) {
    if (o.on_hyperboloid && o.biconservative) {
      rep.variant = o.variant;
      break;
    }
  }

  const SurfaceSampler fn = glued_surface_sampler(p, rep.variant);
  const double a = glued_tau_of_fraction(opt.kappa_hi_fraction);
  const double b = glued_tau_of_fraction(opt.kappa_lo_fraction);

  ResidualStats hyp = make_stats("hyperboloid_constraint", 1e-8);
  for (const auto& o : rep.arbitration) {
    if (o.variant == rep.variant) hyp.add(o.on_hyperboloid ? o.max_defect : NAN);
  }
  rep.suites.push_back(hyp.finish());

  std::vector<PointAudit> pts;
  for (int side : {1, -1}) {
    const double lo = side > 0 ? a : -b, hi = side > 0 ? b : -a;
    for (const auto& pa : audit_region(fn, {lo, hi}, opt.v_range, opt.n_tau, opt.n_v, opt.steps)) pts.push_back(pa);
  }
  rep.suites.push_back(biconservative_residual(pts, opt.biconservative_tol));
  const auto kappa_at = [&p](double tau, double) { return glued_kappa_of_tau(p, tau); };
  for (auto& s : identity_report(pts, p, kappa_at, opt.identity)) rep.suites.push_back(std::move(s));
  for (auto& s : frame_residuals(pts, opt.frame)) rep.suites.push_back(std::move(s));

  const ArcLengthProfile arc(p, 0.05 * p.kappa01());
  for (auto& s : profile_constraints_residual(arc, opt.profile_samples)) rep.suites.push_back(std::move(s));
  const FirstIntegralStats fi = first_integral_residual(arc, opt.profile_samples);
  ResidualStats fis = make_stats("first_integral", 1e-6);
  fis.add(fi.max_residual);
  rep.suites.push_back(fis.finish());

  rep.seam = seam_check(fn, opt.seam_inner_tau, b, opt.v_range, opt.n_tau, opt.n_v, opt.steps);
  return rep;
}

}  // namespace bicons
