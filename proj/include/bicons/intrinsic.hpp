#pragma once

// The abstract metric family g = (1/xi^2)(3/T(xi) dxi^2 + dtheta^2),
// T(xi) = -xi^{8/3} + C xi^2 + 3, its rho/omega coordinates, the complete
// even extension domega^2 + Gamma(omega)^2 dtheta^2 and the candidate shape
// operator.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "bicons/error.hpp"
#include "bicons/numerics.hpp"

namespace bicons {

/// T(xi) = -xi^{8/3} + cminus1 xi^2 + 3.
inline double T_eval(double xi, double cminus1) {
  if (!(xi > 0.0)) throw Error(Errc::NonPositiveXi, "xi = " + std::to_string(xi));
  return -std::pow(xi, 8.0 / 3.0) + cminus1 * xi * xi + 3.0;
}

/// Positive zero of T. T(0+) = 3 and T -> -inf, with at most one turning
/// point at (3C/4)^{3/2} when C > 0, so the zero is unique.
inline double xi01(double cminus1) {
  auto T = [&](double xi) { return xi <= 0.0 ? 3.0 : T_eval(xi, cminus1); };
  const double lo = cminus1 > 0.0 ? std::pow(0.75 * cminus1, 1.5) : 0.0;
  const double start = std::max(1.0, 2.0 * lo);
  const RootBracket br = expand_bracket_upward(T, lo, start);
  if (cminus1 == 0.0) return std::pow(3.0, 3.0 / 8.0);
  return find_bracketed_root(T, br, {4.0 * std::numeric_limits<double>::epsilon() * br.b, 400});
}

struct GaussK {
  double K;     ///< -xi^{8/3}/9 - 1
  double dK;    ///< dK/dxi = -(8/27) xi^{5/3}
  double grad;  ///< xi-component of grad K: (xi^2 T / 3) dK
};

/// Gaussian curvature of g_C at xi in (0, xi01).
inline GaussK gauss_K(double xi, double cminus1) {
  if (!(xi > 0.0)) throw Error(Errc::OutOfDomain, "xi must be positive");
  const double T = T_eval(xi, cminus1);
  if (T < 0.0) throw Error(Errc::OutOfDomain, "T(xi) < 0 beyond xi01");
  const double K = -std::pow(xi, 8.0 / 3.0) / 9.0 - 1.0;
  const double dK = -(8.0 / 27.0) * std::pow(xi, 5.0 / 3.0);
  return {K, dK, xi * xi * T / 3.0 * dK};
}

/// One member of the intrinsic family with frozen tables for
/// rho(xi) = -int_{xi00}^{xi} sqrt(3 / (tau^2 T(tau))) dtau and its inverse.
///
/// Two charts: s = sqrt(xi01 - xi) on [xi00, xi01], where the inverse square
/// root at xi01 becomes a smooth integrand, and lambda = -log xi on (0, xi00],
/// where the logarithmic divergence at 0 becomes a tail with integrand -> 1.
class IntrinsicParams {
 public:
  explicit IntrinsicParams(double cminus1, std::optional<double> xi00 = std::nullopt, int nodes_per_chart = 2048)
      : cminus1_(cminus1), xi01_(bicons::xi01(cminus1)) {
    xi00_ = xi00.value_or(0.5 * xi01_);
    if (!(xi00_ > 0.0 && xi00_ < xi01_)) throw Error(Errc::OutOfDomain, "xi00 must lie in (0, xi01)");
    if (nodes_per_chart < 8) throw Error(Errc::OutOfRange, "need at least 8 table nodes per chart");
    s00_ = std::sqrt(xi01_ - xi00_);
    lambda00_ = -std::log(xi00_);
    const double a = xi01_, c = cminus1_;
    near_ = CumulativeIntegral([a, c](double u) { return near_integrand(a, c, u); },
                               uniform_nodes(0.0, s00_, nodes_per_chart));
    far_ = CumulativeIntegral([c](double l) { return far_integrand(c, l); },
                              uniform_nodes(lambda00_, lambda00_ + kFarSpan, nodes_per_chart));
    rho1_ = -near_.values().back();
  }

  double cminus1() const { return cminus1_; }
  double xi01() const { return xi01_; }
  double xi00() const { return xi00_; }
  double rho1() const { return rho1_; }
  /// -rho1: the omega-half-width of the s-chart.
  double near_span() const { return -rho1_; }

  double T(double xi) const { return T_eval(xi, cminus1_); }

  /// T(xi01 - w) / w, evaluated without cancellation for small w.
  double Q(double w) const { return Q(xi01_, cminus1_, w); }

  static double Q(double a, double c, double w) {
    const double a83 = std::pow(a, 8.0 / 3.0);
    if (w == 0.0) return (8.0 / 3.0) * a83 / a - 2.0 * c * a;
    return -c * (2.0 * a - w) - a83 * std::expm1((8.0 / 3.0) * std::log1p(-w / a)) / w;
  }

  double rho(double xi) const {
    if (!(xi > 0.0)) throw Error(Errc::OutOfDomain, "rho needs xi > 0");
    if (xi > xi01_) throw Error(Errc::OutOfDomain, "rho needs xi <= xi01");
    if (xi >= xi00_) return near_(std::sqrt(xi01_ - xi)) + rho1_;
    return far_(-std::log(xi));
  }

  /// rho at xi = exp(log_xi); usable far below the smallest double.
  double rho_at_log_xi(double log_xi) const {
    const double lambda = -log_xi;
    if (lambda >= lambda00_) return far_(lambda);
    return rho(std::exp(log_xi));
  }

  /// xi with rho(xi) = r, for r in [rho1, inf).
  double xi_of_rho(double r) const {
    if (r < rho1_) throw Error(Errc::OutOfRange, "rho below rho1");
    if (r <= 0.0) {
      const double s = near_.inverse(r - rho1_);
      return xi01_ - s * s;
    }
    return std::exp(-far_.inverse(r));
  }

  /// 1/Gamma(omega) = xi(rho1 + |omega|), computed without passing through
  /// rho so that small |omega| keeps full relative precision.
  double xi_of_omega(double omega) const {
    const double a = std::fabs(omega);
    if (a <= near_span()) {
      const double s = near_.inverse(a);
      return xi01_ - s * s;
    }
    return std::exp(-far_.inverse(a - near_span()));
  }

  /// Gamma(omega) = h(|omega|), h(omega) = 1/xi(rho1 + omega).
  double Gamma(double omega) const {
    const double a = std::fabs(omega);
    if (a > near_span()) return std::exp(far_.inverse(a - near_span()));
    return 1.0 / xi_of_omega(omega);
  }

  const CumulativeIntegral& near_table() const { return near_; }
  const CumulativeIntegral& far_table() const { return far_; }

  /// Integrand of the s-chart: 2 sqrt3 / ((xi01 - u^2) sqrt(Q(u^2))).
  static double near_integrand(double a, double c, double u) {
    const double w = u * u;
    return 2.0 * std::numbers::sqrt3 / ((a - w) * std::sqrt(Q(a, c, w)));
  }

  /// Integrand of the lambda-chart: sqrt(3 / T(e^{-lambda})), -> 1 as lambda -> inf.
  static double far_integrand(double c, double lambda) {
    const double x = -lambda;
    const double T = -std::exp((8.0 / 3.0) * x) + c * std::exp(2.0 * x) + 3.0;
    return std::sqrt(3.0 / T);
  }

 private:
  static constexpr double kFarSpan = 50.0;

  double cminus1_;
  double xi01_;
  double xi00_ = 0.0;
  double s00_ = 0.0;
  double lambda00_ = 0.0;
  double rho1_ = 0.0;
  CumulativeIntegral near_;
  CumulativeIntegral far_;
};

/// Closed form K~(omega) = -xi(rho1 + |omega|)^{8/3}/9 - 1.
inline double tilde_K(double omega, const IntrinsicParams& p) {
  return -std::pow(p.xi_of_omega(omega), 8.0 / 3.0) / 9.0 - 1.0;
}

/// -Gamma''(omega)/Gamma(omega) by symmetric differences.
inline double tilde_K_fd(double omega, const IntrinsicParams& p, double h = 1e-3) {
  auto G = [&](double w) { return p.Gamma(w); };
  return -fd_derivative(G, omega, 2, h) / p.Gamma(omega);
}

struct ShapeCandidate {
  double lambda1;   ///< eigenvalue on X1 = d/domega: -sqrt(-1-K~)/sqrt3
  double lambda2;   ///< eigenvalue on X2: sqrt(3(-1-K~))
  double f;         ///< trace: (2/sqrt3) sqrt(-1-K~)
  double K;         ///< K~ at omega
  double codazzi;   ///< lambda2' - (lambda1 - lambda2) Gamma'/Gamma
  double connection;  ///< Gamma'/Gamma - 3K~'/(8(-1-K~))
};

/// Candidate shape operator A = diag(lambda1, lambda2) in the orthonormal
/// frame {d/domega, (1/Gamma) d/dtheta}. For the warped metric
/// domega^2 + Gamma^2 dtheta^2 the Codazzi equation reduces to the single
/// scalar condition reported in `codazzi`.
inline ShapeCandidate shape_and_codazzi(double omega, const IntrinsicParams& p, double h = 1e-3) {
  auto Kt = [&](double w) { return tilde_K(w, p); };
  auto l2 = [&](double w) { return std::sqrt(3.0 * (-1.0 - Kt(w))); };
  auto logG = [&](double w) { return std::log(p.Gamma(w)); };
  const double K = Kt(omega);
  const double r = std::sqrt(-1.0 - K);
  ShapeCandidate out{};
  out.K = K;
  out.lambda1 = -r / std::numbers::sqrt3;
  out.lambda2 = std::numbers::sqrt3 * r;
  out.f = 2.0 / std::numbers::sqrt3 * r;
  const double dlogG = fd_derivative(logG, omega, 1, h);
  const double dl2 = fd_derivative(l2, omega, 1, h);
  const double dK = fd_derivative(Kt, omega, 1, h);
  out.codazzi = dl2 - (out.lambda1 - out.lambda2) * dlogG;
  out.connection = dlogG - 3.0 * dK / (8.0 * (-1.0 - K));
  return out;
}

struct CompletenessReport {
  double gamma0 = 0.0;        ///< Gamma(0)
  double lower_bound = 0.0;   ///< 1/xi01
  double min_gamma = 0.0;
  double argmin_omega = 0.0;
  int samples = 0;
  double seam_residual = 0.0;  ///< |omega'' - Gamma Gamma' theta'^2| on the seam
  double seam_drift = 0.0;     ///< max |omega| along the integrated seam geodesic
  double radial_residual = 0.0;  ///< geodesic residual of omega -> (omega, theta0)
  bool passed = false;
};

/// Checks Gamma >= 1/xi01 on a sample grid of [-omega_max, omega_max] and that
/// the seam omega = 0 is a geodesic: the geodesic equations
///   omega'' = Gamma Gamma' theta'^2,  theta'' = -2 (Gamma'/Gamma) omega' theta'
/// are integrated (RK4) from (0, 0) with velocity (0, 1/Gamma(0)).
inline CompletenessReport completeness_certificate(const IntrinsicParams& p, double omega_max = 10.0,
                                                   int samples = 10000, double h = 1e-3) {
  CompletenessReport rep;
  rep.gamma0 = p.Gamma(0.0);
  rep.lower_bound = 1.0 / p.xi01();
  rep.min_gamma = std::numeric_limits<double>::infinity();
  for (int i = 0; i < samples; ++i) {
    const double w = -omega_max + 2.0 * omega_max * i / (samples - 1);
    const double g = p.Gamma(w);
    if (g < rep.min_gamma) {
      rep.min_gamma = g;
      rep.argmin_omega = w;
    }
  }
  rep.samples = samples;

  auto G = [&](double w) { return p.Gamma(w); };
  auto dG = [&](double w) { return fd_derivative(G, w, 1, h); };
  const double theta_dot = 1.0 / rep.gamma0;
  rep.seam_residual = std::fabs(rep.gamma0 * dG(0.0) * theta_dot * theta_dot);
  // Along omega -> (omega, theta0): omega'' = 0 and theta' = 0 satisfy both
  // equations identically.
  rep.radial_residual = 0.0;

  struct State { double w, th, dw, dth; };
  auto rhs = [&](const State& s) {
    const double g = G(s.w);
    const double gp = dG(s.w);
    return State{s.dw, s.dth, g * gp * s.dth * s.dth, -2.0 * gp / g * s.dw * s.dth};
  };
  auto axpy = [](const State& a, double t, const State& b) {
    return State{a.w + t * b.w, a.th + t * b.th, a.dw + t * b.dw, a.dth + t * b.dth};
  };
  State s{0.0, 0.0, 0.0, theta_dot};
  const double length = 2.0 * std::numbers::pi * rep.gamma0;  // one full turn in theta
  const int steps = 200;
  const double dt = length / steps;
  for (int i = 0; i < steps; ++i) {
    const State k1 = rhs(s);
    const State k2 = rhs(axpy(s, 0.5 * dt, k1));
    const State k3 = rhs(axpy(s, 0.5 * dt, k2));
    const State k4 = rhs(axpy(s, dt, k3));
    s.w += dt / 6.0 * (k1.w + 2 * k2.w + 2 * k3.w + k4.w);
    s.th += dt / 6.0 * (k1.th + 2 * k2.th + 2 * k3.th + k4.th);
    s.dw += dt / 6.0 * (k1.dw + 2 * k2.dw + 2 * k3.dw + k4.dw);
    s.dth += dt / 6.0 * (k1.dth + 2 * k2.dth + 2 * k3.dth + k4.dth);
    rep.seam_drift = std::max(rep.seam_drift, std::fabs(s.w));
  }

  rep.passed = rep.min_gamma >= rep.lower_bound - 1e-12;
  if (!rep.passed) {
    throw Error(Errc::CertificateFailed, "Gamma(" + std::to_string(rep.argmin_omega) + ") = " +
                                             std::to_string(rep.min_gamma) + " < 1/xi01");
  }
  return rep;
}

/// u(sigma) = u0 + int_{sigma0}^{sigma} dtau / sqrt(-3 e^{-2tau/3} + e^{2tau} + a).
inline double u_of_sigma(double sigma, double sigma0, double a, double u0) {
  auto radicand = [&](double t) { return -3.0 * std::exp(-2.0 * t / 3.0) + std::exp(2.0 * t) + a; };
  const double lo = std::min(sigma, sigma0), hi = std::max(sigma, sigma0);
  for (int i = 0; i <= 16; ++i) {
    const double t = lo + (hi - lo) * i / 16.0;
    if (!(radicand(t) > 0.0)) {
      throw Error(Errc::NegativeRadicand, "radicand <= 0 at sigma = " + std::to_string(t));
    }
  }
  auto f = [&](double t) {
    const double r = radicand(t);
    if (!(r > 0.0)) throw Error(Errc::NegativeRadicand, "radicand <= 0 at sigma = " + std::to_string(t));
    return 1.0 / std::sqrt(r);
  };
  return u0 + integrate_adaptive(f, sigma0, sigma, 1e-13, 1e-14).value;
}

struct MetricComponents {
  double g11, g12, g22;
};

/// g_C in (xi, theta) coordinates, read off through the conformal chart
/// e^{2 sigma}(du^2 + dv^2): du/dsigma is differentiated numerically from
/// u_of_sigma, then sigma = log(3^{3/4}/xi), v = theta / 3^{3/4}.
inline MetricComponents metric_via_sigma_chart(double xi, double cminus1, double h = 1e-4) {
  const double a = std::numbers::sqrt3 * cminus1;
  const double sigma = std::log(std::pow(3.0, 0.75) / xi);
  auto u = [&](double s) { return u_of_sigma(s, sigma, a, 0.0); };
  const double du = fd_derivative(u, sigma, 1, h);
  const double e2s = std::exp(2.0 * sigma);
  const double dsigma_dxi = -1.0 / xi;
  const double dv_dtheta = 1.0 / std::pow(3.0, 0.75);
  return {e2s * du * du * dsigma_dxi * dsigma_dxi, 0.0, e2s * dv_dtheta * dv_dtheta};
}

/// g_C in (xi, theta) coordinates from the closed form.
inline MetricComponents metric_closed_form(double xi, double cminus1) {
  return {3.0 / (xi * xi * T_eval(xi, cminus1)), 0.0, 1.0 / (xi * xi)};
}

}  // namespace bicons
