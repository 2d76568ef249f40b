#pragma once

#include <cmath>
#include <limits>
#include <utility>

namespace ikratio::detail {

// Newton iteration kept inside a sign-changing bracket; falls back to
// bisection whenever a Newton step leaves the bracket or stalls.
// `f` returns {value, derivative}. Requires f(lo) and f(hi) of opposite sign.
template <class F>
double polish_root(F&& f, double lo, double hi, double seed) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  double flo = f(lo).first;
  if (flo == 0.0)
    return lo;
  if (f(hi).first == 0.0)
    return hi;
  // orient so that f(lo) < 0
  const bool rising = flo < 0.0;
  double x = (seed > lo && seed < hi) ? seed : 0.5 * (lo + hi);
  double dx_old = hi - lo;
  double dx = dx_old;
  for (int it = 0; it < 200; ++it) {
    auto [fx, dfx] = f(x);
    if (fx == 0.0)
      return x;
    if ((fx < 0.0) == rising)
      lo = x;
    else
      hi = x;
    const bool newton_ok = dfx != 0.0 && std::isfinite(dfx) &&
                           ((x - fx / dfx) - lo) * ((x - fx / dfx) - hi) < 0.0 &&
                           std::fabs(2.0 * fx) < std::fabs(dx_old * dfx);
    dx_old = dx;
    if (newton_ok) {
      dx = fx / dfx;
      x -= dx;
    } else {
      dx = 0.5 * (hi - lo);
      x = lo + dx;
    }
    if (std::fabs(dx) <= 2.0 * eps * std::fabs(x) || hi - lo <= 2.0 * eps * std::fabs(x))
      return x;
  }
  return x;
}

} // namespace ikratio::detail
