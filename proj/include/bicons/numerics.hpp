#pragma once

// Scalar numeric kernels: bracketed roots, adaptive quadrature with declared
// endpoint singularities, monotone inversion, finite-difference stencils and
// frozen cumulative-integral tables.

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <functional>
#include <limits>
#include <numbers>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bicons/error.hpp"

namespace bicons {

struct Interval {
  double lo;
  double hi;

  double width() const { return hi - lo; }
  bool contains(double x) const { return x >= lo && x <= hi; }
};

/// Endpoints a, b with f(a) f(b) < 0.
struct RootBracket {
  double a;
  double b;
};

template <class F>
concept ScalarFunction = requires(F f, double x) {
  { f(x) } -> std::convertible_to<double>;
};

/// Integrands that want the exact distances to both endpoints as well as the
/// abscissa: f(t, t - a, b - t). Near a singular endpoint the distance is
/// known to full relative precision even when t itself has rounded onto it.
template <class F>
concept EndpointAwareIntegrand = requires(F f, double x) {
  { f(x, x, x) } -> std::convertible_to<double>;
};

template <class F>
concept Integrand = ScalarFunction<F> || EndpointAwareIntegrand<F>;

namespace detail {

template <Integrand F>
double call_integrand(F& f, double t, double dist_lo, double dist_hi) {
  if constexpr (EndpointAwareIntegrand<F>) {
    return static_cast<double>(f(t, dist_lo, dist_hi));
  } else {
    return static_cast<double>(f(t));
  }
}

constexpr double kEps = std::numeric_limits<double>::epsilon();

}  // namespace detail

// ---------------------------------------------------------------------------
// Root finding
// ---------------------------------------------------------------------------

struct RootOptions {
  double tol = 1e-12;  ///< final bracket width
  int max_iterations = 300;
};

/// Brent's method. The returned root lies in a sign-change bracket no wider
/// than tol (plus a few ulps of the root).
template <ScalarFunction F>
double find_bracketed_root(F&& f, RootBracket bracket, RootOptions opts = {}) {
  double a = bracket.a;
  double b = bracket.b;
  double fa = f(a);
  double fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if (!(fa * fb < 0.0)) {
    throw Error(Errc::NoSignChange, "f(a) and f(b) have the same sign on [" +
                                        std::to_string(a) + ", " + std::to_string(b) + "]");
  }
  double c = a, fc = fa;
  double d = b - a, e = d;
  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    if ((fb > 0.0 && fc > 0.0) || (fb < 0.0 && fc < 0.0)) {
      c = a;
      fc = fa;
      e = d = b - a;
    }
    if (std::fabs(fc) < std::fabs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol1 = 2.0 * detail::kEps * std::fabs(b) + 0.5 * opts.tol;
    const double xm = 0.5 * (c - b);
    if (std::fabs(xm) <= tol1 || fb == 0.0) return b;
    if (std::fabs(e) >= tol1 && std::fabs(fa) > std::fabs(fb)) {
      double p, q, r;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        q = fa / fc;
        r = fb / fc;
        p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
        q = (q - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::fabs(p);
      const double min1 = 3.0 * xm * q - std::fabs(tol1 * q);
      const double min2 = std::fabs(e * q);
      if (2.0 * p < std::min(min1, min2)) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += (std::fabs(d) > tol1) ? d : std::copysign(tol1, xm);
    fb = f(b);
  }
  throw Error(Errc::NoConvergence, "Brent iteration limit reached");
}

/// Grows [lo, hi] by doubling hi - lo until f changes sign. Used where only
/// one end of the bracket is known a priori.
template <ScalarFunction F>
RootBracket expand_bracket_upward(F&& f, double lo, double hi, int max_doublings = 200) {
  const double flo = f(lo);
  for (int k = 0; k < max_doublings; ++k) {
    if (flo * f(hi) <= 0.0) return {lo, hi};
    hi = lo + 2.0 * (hi - lo);
  }
  throw Error(Errc::NoSignChange, "no sign change found while expanding bracket");
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

/// Declared endpoint behaviour: the integrand is ~ (t - a)^lower_exponent near
/// a and ~ (b - t)^upper_exponent near b.
struct QuadratureSpec {
  double lower_exponent = 0.0;
  double upper_exponent = 0.0;
  double abs_tol = 1e-10;
  int max_subdivisions = 4000;
  double rel_tol = 0.0;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
  int subdivisions = 0;
  double unresolved = 0.0;  ///< error estimate on panels too narrow to split
};

namespace detail {

struct Gk15 {
  static constexpr std::array<double, 8> xgk = {
      0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
      0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
      0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
      0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
  static constexpr std::array<double, 8> wgk = {
      0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
      0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
      0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
      0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
  static constexpr std::array<double, 4> wg = {
      0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
      0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
};

struct Panel {
  double a, b;
  double dlo_a;  // distance of a from the global lower endpoint
  double dhi_b;  // distance of b from the global upper endpoint
  double value, error;
  bool at_floor;
  bool operator<(const Panel& o) const { return error < o.error; }
};

// One Gauss-Kronrod 7/15 panel with QUADPACK's error heuristic. Distances to
// the global endpoints are propagated so endpoint-aware integrands see exact
// offsets near the ends.
template <Integrand F>
Panel gk15_panel(F& f, double a, double b, double dlo_a, double dhi_b, double total_width) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double dlo_c = dlo_a + half;
  const double dhi_c = dhi_b + half;
  (void)total_width;
  auto eval = [&](double off) {
    // off in [-half, half]
    const double t = center + off;
    double dlo, dhi;
    if (off <= 0.0) {
      dlo = dlo_a + (half + off);
      dhi = dhi_c - off;
    } else {
      dlo = dlo_c + off;
      dhi = dhi_b + (half - off);
    }
    return call_integrand(f, t, dlo, dhi);
  };
  const double fc = eval(0.0);
  double resg = fc * Gk15::wg[3];
  double resk = fc * Gk15::wgk[7];
  double resabs = std::fabs(resk);
  std::array<double, 7> fv1{}, fv2{};
  for (int j = 0; j < 3; ++j) {
    const int jtw = 2 * j + 1;
    const double absc = half * Gk15::xgk[jtw];
    const double f1 = eval(-absc);
    const double f2 = eval(absc);
    fv1[jtw] = f1;
    fv2[jtw] = f2;
    resg += Gk15::wg[j] * (f1 + f2);
    resk += Gk15::wgk[jtw] * (f1 + f2);
    resabs += Gk15::wgk[jtw] * (std::fabs(f1) + std::fabs(f2));
  }
  for (int j = 0; j < 4; ++j) {
    const int jtwm1 = 2 * j;
    const double absc = half * Gk15::xgk[jtwm1];
    const double f1 = eval(-absc);
    const double f2 = eval(absc);
    fv1[jtwm1] = f1;
    fv2[jtwm1] = f2;
    resk += Gk15::wgk[jtwm1] * (f1 + f2);
    resabs += Gk15::wgk[jtwm1] * (std::fabs(f1) + std::fabs(f2));
  }
  const double reskh = 0.5 * resk;
  double resasc = Gk15::wgk[7] * std::fabs(fc - reskh);
  for (int j = 0; j < 7; ++j) {
    resasc += Gk15::wgk[j] * (std::fabs(fv1[j] - reskh) + std::fabs(fv2[j] - reskh));
  }
  const double value = resk * half;
  resabs *= std::fabs(half);
  resasc *= std::fabs(half);
  double err = std::fabs((resk - resg) * half);
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  const double floor = 50.0 * kEps * resabs;
  bool at_floor = false;
  if (resabs > std::numeric_limits<double>::min() / (50.0 * kEps) && err <= floor) {
    err = floor;
    at_floor = true;
  }
  if (!std::isfinite(value)) {
    throw Error(Errc::ToleranceNotMet, "non-finite integrand value on [" + std::to_string(a) +
                                           ", " + std::to_string(b) + "]");
  }
  return Panel{a, b, dlo_a, dhi_b, value, err, at_floor};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod 7/15 quadrature (bisect the panel with
/// the largest error estimate). No endpoint transformation is applied.
template <Integrand F>
QuadratureResult integrate_adaptive(F&& f, double a, double b, double abs_tol, double rel_tol = 0.0,
                                    int max_subdivisions = 4000) {
  QuadratureResult out;
  if (a == b) return out;
  if (b < a) {
    auto r = integrate_adaptive(f, b, a, abs_tol, rel_tol, max_subdivisions);
    r.value = -r.value;
    return r;
  }
  const double width = b - a;
  std::priority_queue<detail::Panel> heap;
  heap.push(detail::gk15_panel(f, a, b, 0.0, 0.0, width));
  out.evaluations = 15;
  double total = heap.top().value;
  double total_err = heap.top().error;
  while (true) {
    const double tol = std::max(abs_tol, rel_tol * std::fabs(total));
    if (total_err <= tol) break;
    const detail::Panel top = heap.top();
    if (top.at_floor) break;  // roundoff-limited everywhere
    if (out.subdivisions >= max_subdivisions) {
      throw Error(Errc::ToleranceNotMet,
                  "adaptive quadrature hit the subdivision limit with error estimate " + std::to_string(total_err) +
                      " > " + std::to_string(tol));
    }
    const double mid = 0.5 * (top.a + top.b);
    const bool too_narrow =
        !(mid > top.a && mid < top.b) ||
        (top.b - top.a) < 64.0 * detail::kEps * std::max(std::fabs(top.a), std::fabs(top.b));
    if (too_narrow) {
      // Cannot be split further in double precision: its estimate is as good
      // as it gets, so freeze it and let the remaining panels refine.
      heap.pop();
      detail::Panel frozen = top;
      frozen.at_floor = true;
      frozen.error = 0.0;
      total_err -= top.error;
      out.unresolved += top.error;
      heap.push(frozen);
      continue;
    }
    heap.pop();
    const double half = 0.5 * (top.b - top.a);
    auto left = detail::gk15_panel(f, top.a, mid, top.dlo_a, top.dhi_b + half, width);
    auto right = detail::gk15_panel(f, mid, top.b, top.dlo_a + half, top.dhi_b, width);
    out.evaluations += 30;
    ++out.subdivisions;
    total += left.value + right.value - top.value;
    total_err += left.error + right.error - top.error;
    heap.push(left);
    heap.push(right);
  }
  // Re-sum to avoid drift from the running update.
  double sum = 0.0, err = 0.0;
  while (!heap.empty()) {
    sum += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  out.value = sum;
  out.error = err + out.unresolved;
  if (out.unresolved > std::max(abs_tol, rel_tol * std::fabs(sum))) {
    throw Error(Errc::ToleranceNotMet, "integrand not resolvable at double precision near a point of [" +
                                           std::to_string(a) + ", " + std::to_string(b) + "]");
  }
  return out;
}

namespace detail {

// Integral over [a, b] where only one endpoint is declared singular with
// exponent p in (-1, 0). The substitution t = a + s^m (or b - s^m) with
// m = 1/(1+p) turns (t-a)^p dt into a bounded integrand in s; for p = -1/2
// this is t = a + s^2.
template <Integrand F>
QuadratureResult integrate_one_sided_singular(F& f, double a, double b, double p, bool at_lower,
                                              const QuadratureSpec& spec) {
  const double m = 1.0 / (1.0 + p);
  const double width = b - a;
  const double s_max = std::pow(width, 1.0 / m);
  auto g = [&](double s) {
    if (s <= 0.0) return 0.0;
    const double d = (m == 2.0) ? s * s : std::pow(s, m);
    const double jac = (m == 2.0) ? 2.0 * s : m * std::pow(s, m - 1.0);
    if (at_lower) {
      return call_integrand(f, a + d, d, width - d) * jac;
    }
    return call_integrand(f, b - d, width - d, d) * jac;
  };
  return integrate_adaptive(g, 0.0, s_max, spec.abs_tol, spec.rel_tol, spec.max_subdivisions);
}

}  // namespace detail

namespace detail {

template <Integrand F>
QuadratureResult integrate_singular_ordered(F& f, double a, double b, const QuadratureSpec& spec) {
  const bool sing_lo = spec.lower_exponent < 0.0;
  const bool sing_hi = spec.upper_exponent < 0.0;
  if (sing_lo && sing_hi) {
    const double c = 0.5 * (a + b);
    const double w = b - a;
    QuadratureSpec half = spec;
    half.abs_tol = 0.5 * spec.abs_tol;
    // Each half reports distances to the global endpoints a and b.
    auto fl = [&](double t, double dlo, double dhi) { return call_integrand(f, t, dlo, dhi + 0.5 * w); };
    auto left = integrate_one_sided_singular(fl, a, c, spec.lower_exponent, true, half);
    auto fr = [&](double t, double dlo, double dhi) { return call_integrand(f, t, dlo + 0.5 * w, dhi); };
    auto right = integrate_one_sided_singular(fr, c, b, spec.upper_exponent, false, half);
    return {left.value + right.value, left.error + right.error, left.evaluations + right.evaluations,
            left.subdivisions + right.subdivisions};
  }
  if (sing_lo) return integrate_one_sided_singular(f, a, b, spec.lower_exponent, true, spec);
  if (sing_hi) return integrate_one_sided_singular(f, a, b, spec.upper_exponent, false, spec);
  return integrate_adaptive(f, a, b, spec.abs_tol, spec.rel_tol, spec.max_subdivisions);
}

}  // namespace detail

/// Adaptive quadrature of an integrand with declared algebraic endpoint
/// behaviour. Negative exponents are removed by substitution before any
/// refinement; non-negative exponents integrate directly.
template <Integrand F>
QuadratureResult integrate_singular_detailed(F&& f, double a, double b, const QuadratureSpec& spec = {}) {
  if (spec.lower_exponent <= -1.0 || spec.upper_exponent <= -1.0) {
    throw Error(Errc::DivergentIntegrand, "declared endpoint exponent <= -1");
  }
  if (!(spec.abs_tol > 0.0)) throw Error(Errc::ToleranceNotMet, "absolute tolerance must be > 0");
  if (a == b) return {};
  if (b < a) {
    QuadratureSpec flipped = spec;
    std::swap(flipped.lower_exponent, flipped.upper_exponent);
    auto g = [&](double t, double dlo, double dhi) { return detail::call_integrand(f, t, dhi, dlo); };
    auto r = detail::integrate_singular_ordered(g, b, a, flipped);
    r.value = -r.value;
    return r;
  }
  return detail::integrate_singular_ordered(f, a, b, spec);
}

template <Integrand F>
double integrate_singular(F&& f, double a, double b, const QuadratureSpec& spec = {}) {
  return integrate_singular_detailed(std::forward<F>(f), a, b, spec).value;
}

/// Tanh-sinh (double exponential) quadrature in the original variable, with
/// step halving until successive levels agree. Endpoint singularities are
/// absorbed by the node clustering rather than by a substitution, which makes
/// it an independent cross-check of integrate_singular.
template <Integrand F>
QuadratureResult integrate_tanh_sinh(F&& f, double a, double b, double tol = 1e-12, int max_levels = 12) {
  QuadratureResult out;
  if (a == b) return out;
  const double half = 0.5 * (b - a);
  const double center = 0.5 * (a + b);
  constexpr double kHalfPi = 0.5 * std::numbers::pi;
  constexpr double t_max = 6.5;
  // Contribution of the symmetric node pair at +-t (or the center at t = 0).
  auto pair = [&](double t) {
    const double u = kHalfPi * std::sinh(t);
    const double cu = std::cosh(u);
    const double w = kHalfPi * std::cosh(t) / (cu * cu);
    // distance from the nearer endpoint, 1 - tanh(u) = 2 / (1 + e^{2u}) for u >= 0
    const double d = half * 2.0 / (1.0 + std::exp(2.0 * u));
    if (t == 0.0) {
      ++out.evaluations;
      return w * detail::call_integrand(f, center, half, half);
    }
    double s = 0.0;
    if (d > 0.0 && std::isfinite(w) && w > 0.0) {
      const double far = 2.0 * half - d;
      s += w * detail::call_integrand(f, b - d, far, d);
      s += w * detail::call_integrand(f, a + d, d, far);
      out.evaluations += 2;
    }
    return s;
  };
  double h = 1.0;
  double sum = pair(0.0);
  for (double t = h; t <= t_max; t += h) sum += pair(t);
  double estimate = sum * h * half;
  for (int level = 1; level <= max_levels; ++level) {
    h *= 0.5;
    for (double t = h; t <= t_max; t += 2.0 * h) sum += pair(t);
    const double next = sum * h * half;
    const double diff = std::fabs(next - estimate);
    estimate = next;
    out.subdivisions = level;
    if (level >= 3 && diff <= tol) {
      out.value = estimate;
      out.error = diff;
      return out;
    }
  }
  throw Error(Errc::ToleranceNotMet, "tanh-sinh did not converge");
}

// ---------------------------------------------------------------------------
// Monotone inversion
// ---------------------------------------------------------------------------

/// x in domain with f(x) = y for strictly monotone f.
template <ScalarFunction F>
double invert_monotone(F&& f, double y, Interval domain, double tol = 1e-13) {
  const double flo = f(domain.lo);
  const double fhi = f(domain.hi);
  const double ymin = std::min(flo, fhi);
  const double ymax = std::max(flo, fhi);
  if (!(y >= ymin && y <= ymax)) {
    throw Error(Errc::OutOfRange, "target " + std::to_string(y) + " outside [" + std::to_string(ymin) +
                                      ", " + std::to_string(ymax) + "]");
  }
  if (y == flo) return domain.lo;
  if (y == fhi) return domain.hi;
  return find_bracketed_root([&](double x) { return f(x) - y; }, {domain.lo, domain.hi}, {tol, 400});
}

// ---------------------------------------------------------------------------
// Finite differences
// ---------------------------------------------------------------------------

enum class Side { symmetric, left, right };

namespace detail {

template <ScalarFunction F>
double raw_stencil(F& f, double x, int order, double h, Side side) {
  if (side == Side::symmetric) {
    switch (order) {
      case 1: return (f(x + h) - f(x - h)) / (2.0 * h);
      case 2: return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
      case 3: return (f(x + 2.0 * h) - 2.0 * f(x + h) + 2.0 * f(x - h) - f(x - 2.0 * h)) / (2.0 * h * h * h);
    }
  } else {
    const double s = side == Side::right ? 1.0 : -1.0;
    auto at = [&](int k) { return f(x + s * k * h); };
    switch (order) {
      case 1: return s * (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h);
      case 2: return (2.0 * at(0) - 5.0 * at(1) + 4.0 * at(2) - at(3)) / (h * h);
      case 3:
        return s * (-2.5 * at(0) + 9.0 * at(1) - 12.0 * at(2) + 7.0 * at(3) - 1.5 * at(4)) / (h * h * h);
    }
  }
  throw Error(Errc::OutOfRange, "derivative order must be 1, 2 or 3");
}

}  // namespace detail

/// Derivative of order 1..3 from second-order stencils (central, or one-sided
/// for use at a gluing point) followed by one Richardson step h -> h/2.
template <ScalarFunction F>
double fd_derivative(F&& f, double x, int order, double h, Side side = Side::symmetric) {
  if (order < 1 || order > 3) throw Error(Errc::OutOfRange, "derivative order must be 1, 2 or 3");
  try {
    const double coarse = detail::raw_stencil(f, x, order, h, side);
    const double fine = detail::raw_stencil(f, x, order, 0.5 * h, side);
    return (4.0 * fine - coarse) / 3.0;
  } catch (const Error& e) {
    if (e.code() == Errc::OutOfDomain || e.code() == Errc::NonPositiveKappa ||
        e.code() == Errc::NonPositiveXi) {
      throw Error(Errc::StencilOutOfDomain, e.what());
    }
    throw;
  }
}

/// Same, with the stencil checked against a domain before any evaluation.
template <ScalarFunction F>
double fd_derivative(F&& f, double x, int order, double h, Side side, Interval domain) {
  const double reach = (order == 3 || side != Side::symmetric) ? (order + 1) * h : h;
  const double lo = side == Side::right ? x : x - reach;
  const double hi = side == Side::left ? x : x + reach;
  if (lo < domain.lo || hi > domain.hi) {
    throw Error(Errc::StencilOutOfDomain, "stencil [" + std::to_string(lo) + ", " + std::to_string(hi) +
                                              "] leaves the domain");
  }
  return fd_derivative(std::forward<F>(f), x, order, h, side);
}

// ---------------------------------------------------------------------------
// Frozen cumulative integrals
// ---------------------------------------------------------------------------

/// F(z) = integral of a smooth positive integrand from nodes[0] to z, with the
/// node values computed once. Evaluation integrates only the short stretch from
/// the nearest node; inversion starts from cubic Hermite interpolation of the
/// table (monotone on each panel since both slopes are positive) and finishes
/// with safeguarded Newton steps.
class CumulativeIntegral {
 public:
  CumulativeIntegral() = default;

  CumulativeIntegral(std::function<double(double)> integrand, std::vector<double> nodes,
                     double rel_tol = 4e-16)
      : f_(std::move(integrand)), z_(std::move(nodes)), rel_tol_(rel_tol) {
    if (z_.size() < 2) throw Error(Errc::OutOfRange, "cumulative table needs at least two nodes");
    F_.resize(z_.size());
    dF_.resize(z_.size());
    F_[0] = 0.0;
    dF_[0] = f_(z_[0]);
    for (std::size_t i = 1; i < z_.size(); ++i) {
      if (!(z_[i] > z_[i - 1])) throw Error(Errc::OutOfRange, "table nodes must increase strictly");
      F_[i] = F_[i - 1] + panel(z_[i - 1], z_[i]);
      dF_[i] = f_(z_[i]);
    }
  }

  bool frozen() const { return !z_.empty(); }
  std::span<const double> nodes() const { return z_; }
  std::span<const double> values() const { return F_; }
  double integrand(double z) const { return f_(z); }
  double lower() const { return z_.front(); }

  double operator()(double z) const {
    require_frozen();
    if (z < z_.front()) throw Error(Errc::OutOfDomain, "argument below the first table node");
    if (z >= z_.back()) return F_.back() + panel(z_.back(), z);
    const std::size_t i = panel_index(z);
    if (z - z_[i] <= z_[i + 1] - z) return F_[i] + panel(z_[i], z);
    return F_[i + 1] - panel(z, z_[i + 1]);
  }

  /// z with F(z) = target. Targets beyond the last node are reached by
  /// extending the bracket (the integrand is positive, so F is increasing).
  double inverse(double target) const {
    require_frozen();
    if (target < 0.0) throw Error(Errc::OutOfRange, "target below F(z0) = 0");
    if (target == 0.0) return z_.front();
    double lo, hi, guess;
    if (target <= F_.back()) {
      const auto it = std::upper_bound(F_.begin(), F_.end(), target);
      const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(it - F_.begin()) - 1, F_.size() - 2);
      lo = z_[i];
      hi = z_[i + 1];
      guess = hermite_inverse(i, target);
    } else {
      lo = z_.back();
      double step = z_.back() - z_[z_.size() - 2];
      hi = lo + step;
      while ((*this)(hi) < target) {
        lo = hi;
        step *= 2.0;
        hi = lo + step;
        if (!std::isfinite(hi)) throw Error(Errc::OutOfRange, "target not reachable");
      }
      guess = 0.5 * (lo + hi);
    }
    double z = std::clamp(guess, lo, hi);
    for (int iter = 0; iter < 100; ++iter) {
      const double r = (*this)(z) - target;
      if (r == 0.0) return z;
      if (r > 0.0) hi = std::min(hi, z);
      else lo = std::max(lo, z);
      const double slope = f_(z);
      double next = z - r / slope;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      const double step = std::fabs(next - z);
      z = next;
      if (step <= 2.0 * detail::kEps * std::fabs(z) + 1e-300 || hi - lo <= 2.0 * detail::kEps * std::fabs(z)) {
        return z;
      }
    }
    throw Error(Errc::NoConvergence, "table inversion did not converge");
  }

 private:
  void require_frozen() const {
    if (z_.empty()) throw Error(Errc::TableNotFrozen, "cumulative table used before it was built");
  }

  std::size_t panel_index(double z) const {
    const auto it = std::upper_bound(z_.begin(), z_.end(), z);
    return static_cast<std::size_t>(it - z_.begin()) - 1;
  }

  double panel(double a, double b) const {
    if (a == b) return 0.0;
    return integrate_adaptive(f_, a, b, 1e-300, rel_tol_, 200).value;
  }

  double hermite_inverse(std::size_t i, double target) const {
    const double h = F_[i + 1] - F_[i];
    if (!(h > 0.0)) return z_[i];
    const double t = (target - F_[i]) / h;
    const double m0 = h / dF_[i];
    const double m1 = h / dF_[i + 1];
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
    const double z = h00 * z_[i] + h10 * m0 + h01 * z_[i + 1] + h11 * m1;
    return std::isfinite(z) ? z : z_[i] + t * (z_[i + 1] - z_[i]);
  }

  std::function<double(double)> f_;
  std::vector<double> z_;
  std::vector<double> F_;
  std::vector<double> dF_;
  double rel_tol_ = 4e-16;
};

/// n+1 points in [a, b] with Chebyshev-Lobatto spacing clustered toward b
/// only (half-cosine map).
inline std::vector<double> clustered_nodes_upper(double a, double b, int n) {
  std::vector<double> z(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) {
    z[static_cast<std::size_t>(i)] = a + (b - a) * std::sin(0.5 * std::numbers::pi * i / n);
  }
  z.back() = b;
  return z;
}

inline std::vector<double> uniform_nodes(double a, double b, int n) {
  std::vector<double> z(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) z[static_cast<std::size_t>(i)] = a + (b - a) * i / n;
  z.back() = b;
  return z;
}

}  // namespace bicons
