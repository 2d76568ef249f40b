#pragma once

// Reference values for Phi0 = I_{nu-1}/I_nu, Phi1 = -K_{nu-1}/K_nu, the
// logarithmic derivatives psi = x Phi - nu, the double ratios W and the
// product P = I_nu K_nu, computed only from the three-term recurrence
//   C_{nu+1} + (2 nu / x) C_nu - C_{nu-1} = 0
// and the Riccati equation
//   Phi' = 1 + ((2 nu - 1) / x) Phi - Phi^2
// shared by both ratios. No special-function library is used.
//
//  * Phi0, nu >= 0: continued fraction 2nu/x + 1/(2(nu+1)/x + 1/(...)),
//    modified Lentz evaluation (the I ratios form the minimal solution).
//  * Phi1, 2nu odd: exact upward recurrence r_{nu+1} = 1/(r_nu + 2nu/x)
//    on r = K_{nu-1}/K_nu, seeded with r_{1/2} = 1.
//  * Phi1 otherwise: backward integration of the Riccati equation from a
//    large x_start seeded with the three-term large-x expansion. The K
//    solution attracts every other solution in the decreasing-x direction,
//    so seed and step errors are damped.
//  * nu in [-1, 0): Phi0(nu) = 2nu/x + 1/Phi0(nu+1) (Phi0(-1) = 1/Phi0(2)),
//    Phi1(nu) = 1/Phi1(1 - nu) from K_{-mu} = K_mu.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/numeric/odeint.hpp>

#include "ikratio/error.hpp"
#include "ikratio/eval_point.hpp"

namespace ikratio {

enum class RatioKind { first_kind, second_kind };

enum class OracleMethod {
  continued_fraction,
  half_integer_recurrence,
  backward_riccati,
  reflection,
};

struct OracleResult {
  double value = 0.0;
  double est_error = 0.0;  // absolute
  OracleMethod method = OracleMethod::continued_fraction;
};

struct OracleOptions {
  double cf_tol = 1e-14;
  long cf_max_iter = 1'000'000;
  double cf_tiny = 1e-300;
  // relative tolerance of the step-size controller
  double ode_tol = 1e-11;
  // x_start = max(x_start_floor, x_start_nu_factor (nu + 1), x_start_x_factor x)
  double x_start_floor = 50.0;
  double x_start_nu_factor = 10.0;
  double x_start_x_factor = 2.0;
};

namespace detail {

inline constexpr double unit_roundoff = std::numeric_limits<double>::epsilon();

inline void require_oracle_nu(const EvalPoint& p, const char* where) {
  require_point(p, where);
  if (p.nu < -1.0)
    throw domain_error(std::string(where) + ": order below -1 is not supported");
}

// Modified Lentz evaluation of 2nu/x + 1/(2(nu+1)/x + 1/(2(nu+2)/x + ...)).
inline OracleResult i_ratio_cf(double nu, double x, const OracleOptions& opt) {
  auto b = [&](long j) { return 2.0 * (nu + static_cast<double>(j)) / x; };
  double f = b(0);
  if (f == 0.0)
    f = opt.cf_tiny;
  double c = f;
  double d = 0.0;
  double delta = 0.0;
  long j = 1;
  for (; j <= opt.cf_max_iter; ++j) {
    const double bj = b(j);
    d = bj + d;
    if (d == 0.0)
      d = opt.cf_tiny;
    c = bj + 1.0 / c;
    if (c == 0.0)
      c = opt.cf_tiny;
    d = 1.0 / d;
    delta = c * d;
    f *= delta;
    if (std::fabs(delta - 1.0) < opt.cf_tol)
      break;
  }
  if (j > opt.cf_max_iter)
    throw evaluation_error("i_ratio: continued fraction did not converge");
  const double rel = std::fabs(delta - 1.0) + 8.0 * unit_roundoff;
  return {f, rel * std::fabs(f), OracleMethod::continued_fraction};
}

inline OracleResult k_ratio_half_integer(double nu, double x) {
  // r = K_{mu-1}/K_mu, mu = 1/2, 3/2, ..., nu
  double r = 1.0;
  long steps = 0;
  for (double mu = 0.5; mu < nu; mu += 1.0, ++steps)
    r = 1.0 / (r + 2.0 * mu / x);
  const double rel = (2.0 * static_cast<double>(steps) + 1.0) * unit_roundoff;
  return {-r, rel * r, OracleMethod::half_integer_recurrence};
}

inline double integrate_k_ratio(double nu, double x, double tol, const OracleOptions& opt) {
  namespace odeint = boost::numeric::odeint;
  const double x_start =
      std::max({opt.x_start_floor, opt.x_start_nu_factor * (nu + 1.0), opt.x_start_x_factor * x});
  const double s = nu - 0.5;
  double phi = -(1.0 - s / x_start + (nu * nu - 0.25) / (2.0 * x_start * x_start));
  const double c = 2.0 * nu - 1.0;
  auto rhs = [c](const double& y, double& dydx, double t) { dydx = 1.0 + (c / t) * y - y * y; };
  const double limit = 1e8 * (1.0 + std::fabs(c) / x + x);
  auto watch = [&](const double& y, double) {
    if (!std::isfinite(y) || std::fabs(y) > limit)
      throw evaluation_error("k_ratio: backward integration diverged");
  };
  // Phi1 < 0 for every order, so pure relative error control is safe
  auto stepper =
      odeint::make_controlled(tol * 1e-280, tol, odeint::runge_kutta_fehlberg78<double>());
  try {
    odeint::integrate_adaptive(stepper, rhs, phi, x_start, x, -0.05 * x_start, watch);
  } catch (const odeint::step_adjustment_error&) {
    throw evaluation_error("k_ratio: step size control failed");
  } catch (const odeint::no_progress_error&) {
    throw evaluation_error("k_ratio: integrator made no progress");
  }
  if (!std::isfinite(phi) || !(phi < 0.0))
    throw evaluation_error("k_ratio: integration produced an invalid value");
  return phi;
}

// Integrates at ode_tol and at ode_tol / 100. The global error is roughly
// proportional to the tolerance, so the difference of the two runs bounds
// the error of the finer one with a wide margin.
inline OracleResult k_ratio_riccati(double nu, double x, const OracleOptions& opt) {
  const double coarse = integrate_k_ratio(nu, x, opt.ode_tol, opt);
  const double fine = integrate_k_ratio(nu, x, 0.01 * opt.ode_tol, opt);
  const double err = std::fabs(coarse - fine) + 0.1 * opt.ode_tol * std::fabs(fine);
  return {fine, err, OracleMethod::backward_riccati};
}

} // namespace detail

// Phi0 = I_{nu-1}(x) / I_nu(x), nu >= -1.
inline OracleResult i_ratio(const EvalPoint& p, const OracleOptions& opt = {}) {
  detail::require_oracle_nu(p, "i_ratio");
  if (p.nu >= 0.0)
    return detail::i_ratio_cf(p.nu, p.x, opt);
  if (p.nu == -1.0) {
    // I_{-2}/I_{-1} = I_2/I_1
    const OracleResult up = detail::i_ratio_cf(2.0, p.x, opt);
    return {1.0 / up.value, up.est_error / (up.value * up.value), OracleMethod::reflection};
  }
  const OracleResult up = detail::i_ratio_cf(p.nu + 1.0, p.x, opt);
  const double tail = 1.0 / up.value;
  const double value = 2.0 * p.nu / p.x + tail;
  const double err = up.est_error / (up.value * up.value) +
                     4.0 * detail::unit_roundoff * (std::fabs(2.0 * p.nu / p.x) + std::fabs(tail));
  return {value, err, OracleMethod::reflection};
}

// Phi1 = -K_{nu-1}(x) / K_nu(x), any real nu (negative orders by reflection).
inline OracleResult k_ratio(const EvalPoint& p, const OracleOptions& opt = {}) {
  detail::require_point(p, "k_ratio");
  if (p.nu < 0.0) {
    const OracleResult m = k_ratio({1.0 - p.nu, p.x}, opt);
    return {1.0 / m.value, m.est_error / (m.value * m.value), OracleMethod::reflection};
  }
  if (detail::is_half_integer(p.nu))
    return detail::k_ratio_half_integer(p.nu, p.x);
  return detail::k_ratio_riccati(p.nu, p.x, opt);
}

inline OracleResult ratio(RatioKind kind, const EvalPoint& p, const OracleOptions& opt = {}) {
  return kind == RatioKind::first_kind ? i_ratio(p, opt) : k_ratio(p, opt);
}

// psi = x Phi - nu = x C_nu'(x) / C_nu(x).
inline double psi(RatioKind kind, const EvalPoint& p, const OracleOptions& opt = {}) {
  return p.x * ratio(kind, p, opt).value - p.nu;
}

// W = Phi_nu / Phi_{nu+1} = (psi^2 - nu^2) / x^2.
// First kind uses the two continued fractions directly, second kind the
// recurrence form Phi (Phi - 2nu/x); both avoid the cancellation in psi^2 - nu^2.
inline OracleResult double_ratio_result(RatioKind kind, const EvalPoint& p,
                                        const OracleOptions& opt = {}) {
  if (kind == RatioKind::first_kind) {
    const OracleResult a = i_ratio(p, opt);
    const OracleResult b = i_ratio({p.nu + 1.0, p.x}, opt);
    const double w = a.value / b.value;
    const double rel = a.est_error / std::fabs(a.value) + b.est_error / std::fabs(b.value) +
                       2.0 * detail::unit_roundoff;
    return {w, rel * std::fabs(w), a.method};
  }
  const OracleResult k = k_ratio(p, opt);
  const double shifted = k.value - 2.0 * p.nu / p.x;
  const double w = k.value * shifted;
  const double rel = k.est_error / std::fabs(k.value) + k.est_error / std::fabs(shifted) +
                     4.0 * detail::unit_roundoff;
  return {w, rel * std::fabs(w), k.method};
}

inline double double_ratio(RatioKind kind, const EvalPoint& p, const OracleOptions& opt = {}) {
  return double_ratio_result(kind, p, opt).value;
}

// P = I_nu K_nu = 1 / (x (Phi0 - Phi1)).
inline OracleResult product(const EvalPoint& p, const OracleOptions& opt = {}) {
  const OracleResult i = i_ratio(p, opt);
  const OracleResult k = k_ratio(p, opt);
  const double diff = i.value - k.value;
  const double value = 1.0 / (p.x * diff);
  const double rel = (i.est_error + k.est_error) / std::fabs(diff) + 4.0 * detail::unit_roundoff;
  const OracleMethod method =
      i.method == OracleMethod::reflection || k.method == OracleMethod::reflection
          ? OracleMethod::reflection
          : k.method;
  return {value, rel * std::fabs(value), method};
}

} // namespace ikratio
