#pragma once

// Integration and classification of solutions of the generalized Riccati
// equation
//   y' = -x^a y^2 + ((2 nu - 1 - a) / x) y + x^{-a},
// which is satisfied by x^{-a} Phi for every solution Phi of the ratio
// equation. Solutions are labelled by initial data (x0, y0).
//
// The double ratio W = (psi^2 - nu^2) / x^2, psi = x Phi - nu, is tracked
// through the a = -1 form (y = x Phi). Along any solution
//   W' = (2 / x) (psi (1 - W) - W),
// so W is stationary exactly where psi solves the nullcline cubic.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "ikratio/error.hpp"
#include "ikratio/eval_point.hpp"
#include "ikratio/nullclines.hpp"
#include "ikratio/oracle.hpp"

namespace ikratio {

inline constexpr double blow_up_threshold = 1e8;

enum class Termination { reached_end, blow_up, step_failure };

enum class SolutionClass {
  monotone_increasing,
  monotone_decreasing,
  has_interior_extremum,
  blow_up,
};

struct Sample {
  double x = 0.0;
  double y = 0.0;
};

struct TrajectoryExtremum {
  double x = 0.0;
  double y = 0.0;
  ExtremumKind kind = ExtremumKind::min;
};

// How integration ended on one side of x0.
struct EndState {
  Termination reason = Termination::reached_end;
  double x_at = 0.0;
};

struct Trajectory {
  double a = 0.0;
  double nu = 0.0;
  std::vector<Sample> samples;  // strictly increasing in x
  // blow_up if either side blew up, else step_failure if either side
  // failed, else reached_end
  Termination termination = Termination::reached_end;
  // location of the blow-up closest to x0 (NaN when there is none)
  double blow_up_x = std::numeric_limits<double>::quiet_NaN();
  EndState lower_end;
  EndState upper_end;
  std::vector<TrajectoryExtremum> extrema;  // increasing in x
};

struct RiccatiOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  double threshold = blow_up_threshold;
  std::size_t max_steps = 200'000;
};

namespace detail {

struct SideResult {
  std::vector<Sample> samples;  // in integration order, excluding x0
  std::vector<TrajectoryExtremum> extrema;
  EndState end;
};

template <class F>
double bisect_sign_change(F&& f, double lo, double hi, double f_lo) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi)
      break;
    const double fm = f(mid);
    if ((fm < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Integrates from (x0, y0) towards x_end with a dense-output Dormand-Prince
// stepper, records accepted steps, stops at |y| > threshold, and refines
// every sign change of indicator(x, y) inside a step with the dense output.
template <class Rhs, class Indicator>
SideResult integrate_side(Rhs rhs, Indicator indicator, double x0, double y0, double x_end,
                          const RiccatiOptions& opt) {
  namespace odeint = boost::numeric::odeint;
  SideResult out;
  if (x_end == x0)
    return out;
  const double dir = x_end > x0 ? 1.0 : -1.0;
  auto stepper = odeint::make_dense_output(opt.abs_tol, opt.rel_tol,
                                           odeint::runge_kutta_dopri5<double>());
  const double dt0 = dir * 1e-3 * std::max(std::fabs(x0), 1e-3);
  stepper.initialize(y0, x0, dt0);

  auto record_events = [&](double xa, double ya, double xb, double yb) {
    const double ia = indicator(xa, ya);
    const double ib = indicator(xb, yb);
    if (ia == 0.0 || ib == 0.0 || (ia < 0.0) == (ib < 0.0))
      return;
    auto along = [&](double t) {
      double y = 0.0;
      stepper.calc_state(t, y);
      return indicator(t, y);
    };
    const double xm = bisect_sign_change(along, xa, xb, ia);
    double ym = 0.0;
    stepper.calc_state(xm, ym);
    // orientation in increasing x
    const double left = dir > 0.0 ? ia : ib;
    out.extrema.push_back({xm, ym, left > 0.0 ? ExtremumKind::max : ExtremumKind::min});
  };

  double xa = x0;
  double ya = y0;
  try {
    for (std::size_t step = 0;; ++step) {
      if (step >= opt.max_steps) {
        out.end = {Termination::step_failure, xa};
        return out;
      }
      stepper.do_step(rhs);
      double xb = stepper.current_time();
      double yb = stepper.current_state();
      const bool past_end = dir * (xb - x_end) >= 0.0;
      if (past_end) {
        xb = x_end;
        stepper.calc_state(xb, yb);
      }
      if (!std::isfinite(yb) || std::fabs(yb) > opt.threshold) {
        out.end = {Termination::blow_up, xb};
        return out;
      }
      record_events(xa, ya, xb, yb);
      out.samples.push_back({xb, yb});
      if (past_end) {
        out.end = {Termination::reached_end, xb};
        return out;
      }
      const double min_step = 64.0 * std::numeric_limits<double>::epsilon() * std::fabs(xb);
      if (std::fabs(stepper.current_time_step()) < min_step) {
        out.end = {Termination::step_failure, xb};
        return out;
      }
      xa = xb;
      ya = yb;
    }
  } catch (const odeint::step_adjustment_error&) {
    out.end = {Termination::step_failure, xa};
  } catch (const odeint::no_progress_error&) {
    out.end = {Termination::step_failure, xa};
  }
  return out;
}

template <class Rhs, class Indicator>
Trajectory integrate_window(double a, double nu, Rhs rhs, Indicator indicator, double x0,
                            double y0, double x_lo, double x_hi, const RiccatiOptions& opt) {
  if (!(x_lo > 0.0) || !(x_lo <= x0) || !(x0 <= x_hi) || !std::isfinite(x_hi))
    throw domain_error("solve_riccati: requires 0 < x_lo <= x0 <= x_hi");
  if (!std::isfinite(y0) || !std::isfinite(a) || !std::isfinite(nu))
    throw domain_error("solve_riccati: non-finite input");

  SideResult down = integrate_side(rhs, indicator, x0, y0, x_lo, opt);
  SideResult up = integrate_side(rhs, indicator, x0, y0, x_hi, opt);

  Trajectory t;
  t.a = a;
  t.nu = nu;
  t.samples.reserve(down.samples.size() + up.samples.size() + 1);
  for (auto it = down.samples.rbegin(); it != down.samples.rend(); ++it)
    t.samples.push_back(*it);
  t.samples.push_back({x0, y0});
  t.samples.insert(t.samples.end(), up.samples.begin(), up.samples.end());

  for (auto it = down.extrema.rbegin(); it != down.extrema.rend(); ++it)
    t.extrema.push_back(*it);
  t.extrema.insert(t.extrema.end(), up.extrema.begin(), up.extrema.end());

  t.lower_end = down.samples.empty() && x_lo == x0 ? EndState{Termination::reached_end, x0}
                                                   : down.end;
  t.upper_end = up.samples.empty() && x_hi == x0 ? EndState{Termination::reached_end, x0}
                                                 : up.end;
  const bool low_blow = t.lower_end.reason == Termination::blow_up;
  const bool high_blow = t.upper_end.reason == Termination::blow_up;
  if (low_blow || high_blow) {
    t.termination = Termination::blow_up;
    if (low_blow && high_blow)
      t.blow_up_x = x0 - t.lower_end.x_at <= t.upper_end.x_at - x0 ? t.lower_end.x_at
                                                                  : t.upper_end.x_at;
    else
      t.blow_up_x = low_blow ? t.lower_end.x_at : t.upper_end.x_at;
  } else if (t.lower_end.reason == Termination::step_failure ||
             t.upper_end.reason == Termination::step_failure) {
    t.termination = Termination::step_failure;
  }
  return t;
}

} // namespace detail

// Right-hand side of the generalized Riccati equation.
inline double riccati_rhs(double a, double nu, double x, double y) {
  const double xa = std::pow(x, a);
  return -xa * y * y + ((2.0 * nu - 1.0 - a) / x) * y + 1.0 / xa;
}

inline Trajectory solve_riccati(double a, double nu, double x0, double y0, double x_lo,
                                double x_hi, const RiccatiOptions& opt = {}) {
  auto rhs = [a, nu](const double& y, double& dydx, double x) { dydx = riccati_rhs(a, nu, x, y); };
  auto slope = [a, nu](double x, double y) { return riccati_rhs(a, nu, x, y); };
  return detail::integrate_window(a, nu, rhs, slope, x0, y0, x_lo, x_hi, opt);
}

// Blow-up first, then interior extrema, then the sign of the sampled
// increments. Increments below 1e-12 relative are ignored; a trajectory
// with no significant increment (a constant solution) is reported as
// monotone_decreasing, i.e. non-increasing.
inline SolutionClass classify(const Trajectory& t) {
  if (t.termination == Termination::blow_up)
    return SolutionClass::blow_up;
  if (!t.extrema.empty())
    return SolutionClass::has_interior_extremum;
  double rise = 0.0;
  double fall = 0.0;
  for (std::size_t i = 1; i < t.samples.size(); ++i) {
    const double dy = t.samples[i].y - t.samples[i - 1].y;
    const double scale = std::max({std::fabs(t.samples[i].y), std::fabs(t.samples[i - 1].y), 1e-300});
    if (std::fabs(dy) <= 1e-12 * scale)
      continue;
    if (dy > 0.0)
      rise = std::max(rise, dy);
    else
      fall = std::max(fall, -dy);
  }
  return rise > fall ? SolutionClass::monotone_increasing : SolutionClass::monotone_decreasing;
}

// W along an oracle solution, sampled at `points` log-spaced abscissae.
// Extrema are located by sign changes of consecutive differences.
inline Trajectory w_along(RatioKind kind, double nu, double x_lo, double x_hi,
                          std::size_t points = 200, const OracleOptions& oracle = {}) {
  if (!(x_lo > 0.0) || !(x_lo < x_hi) || points < 2)
    throw domain_error("w_along: requires 0 < x_lo < x_hi and at least two points");
  Trajectory t;
  t.a = -1.0;
  t.nu = nu;
  const double step = std::log(x_hi / x_lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) {
    const double x = i + 1 == points ? x_hi : x_lo * std::exp(step * static_cast<double>(i));
    t.samples.push_back({x, double_ratio(kind, {nu, x}, oracle)});
  }
  for (std::size_t i = 1; i + 1 < t.samples.size(); ++i) {
    const double before = t.samples[i].y - t.samples[i - 1].y;
    const double after = t.samples[i + 1].y - t.samples[i].y;
    if (before > 0.0 && after < 0.0)
      t.extrema.push_back({t.samples[i].x, t.samples[i].y, ExtremumKind::max});
    else if (before < 0.0 && after > 0.0)
      t.extrema.push_back({t.samples[i].x, t.samples[i].y, ExtremumKind::min});
  }
  t.lower_end = {Termination::reached_end, x_lo};
  t.upper_end = {Termination::reached_end, x_hi};
  return t;
}

// W along the solution with Phi(x0) = phi0. The ratio equation is
// integrated in the form y = x Phi and extrema of W are refined at the
// zeros of W'.
inline Trajectory w_along(double nu, double x0, double phi0, double x_lo, double x_hi,
                          const RiccatiOptions& opt = {}) {
  auto rhs = [nu](const double& y, double& dydx, double x) { dydx = riccati_rhs(-1.0, nu, x, y); };
  auto w_slope = [nu](double x, double y) {
    const double psi = y - nu;
    const double w = (psi - nu) * (psi + nu) / (x * x);
    return psi * (1.0 - w) - w;
  };
  Trajectory t = detail::integrate_window(-1.0, nu, rhs, w_slope, x0, x0 * phi0, x_lo, x_hi, opt);
  auto to_w = [nu](double x, double y) {
    const double psi = y - nu;
    return (psi - nu) * (psi + nu) / (x * x);
  };
  for (Sample& s : t.samples)
    s.y = to_w(s.x, s.y);
  for (TrajectoryExtremum& e : t.extrema)
    e.y = to_w(e.x, e.y);
  return t;
}

} // namespace ikratio
