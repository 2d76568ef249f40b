#pragma once

// Truncated asymptotic expansions of the Bessel ratios, double ratios and
// the product I_nu K_nu. Every function returns exactly the printed terms;
// the order tag names the size of the first omitted contribution.
//
// Conventions for the value returned by each function:
//   large_x_ratio     I_{nu-1}/I_nu (first kind), K_{nu-1}/K_nu (second kind)
//   large_x_double    I_{nu-1}I_{nu+1}/I_nu^2, K_{nu-1}K_{nu+1}/K_nu^2
//   small_x_I         x I_{nu-1}/I_nu and the first-kind double ratio
//   small_x_K         x K_{nu-1}/K_nu
//   large_nu_ratio    x I_{nu-1}/I_nu, x K_{nu-1}/K_nu
//   product_expansion I_nu K_nu

#include <cmath>
#include <string>

#include "ikratio/error.hpp"
#include "ikratio/eval_point.hpp"
#include "ikratio/nullclines.hpp"
#include "ikratio/oracle.hpp"

namespace ikratio {

enum class Regime { large_x, small_x, large_nu };

enum class ExpansionKind { i_ratio, k_ratio, double_i, double_k, product };

struct Expansion {
  double value = 0.0;
  std::string order_tag;
  Regime regime = Regime::large_x;
  ExpansionKind kind = ExpansionKind::i_ratio;
};

struct SmallXFirstKind {
  Expansion ratio_times_x;
  Expansion double_ratio;
};

inline Expansion large_x_ratio(RatioKind kind, const EvalPoint& p) {
  detail::require_point(p, "large_x_ratio");
  const double nu = p.nu;
  const double x = p.x;
  const double sign = kind == RatioKind::first_kind ? 1.0 : -1.0;
  const double value = 1.0 + sign * (nu - 0.5) / x + (nu * nu - 0.25) / (2.0 * x * x);
  return {value, "O(x^-3)", Regime::large_x,
          kind == RatioKind::first_kind ? ExpansionKind::i_ratio : ExpansionKind::k_ratio};
}

inline Expansion large_x_double(RatioKind kind, const EvalPoint& p) {
  detail::require_point(p, "large_x_double");
  const double nu = p.nu;
  const double x = p.x;
  const double sign = kind == RatioKind::first_kind ? 1.0 : -1.0;
  const double value = 1.0 - sign / x + sign * (nu * nu - 0.25) / (2.0 * x * x * x);
  return {value, "O(x^-4)", Regime::large_x,
          kind == RatioKind::first_kind ? ExpansionKind::double_i : ExpansionKind::double_k};
}

inline SmallXFirstKind small_x_I(const EvalPoint& p) {
  detail::require_point(p, "small_x_I");
  if (p.nu < 0.0)
    throw domain_error("small_x_I: requires nu >= 0");
  const double nu = p.nu;
  const double x2 = p.x * p.x;
  const double n1 = nu + 1.0;
  const double ratio = 2.0 * nu + x2 / (2.0 * n1) - x2 * x2 / (8.0 * n1 * n1 * (nu + 2.0));
  const double dbl = nu / n1 + x2 / (2.0 * n1 * n1 * (nu + 2.0));
  return {{ratio, "O(x^6)", Regime::small_x, ExpansionKind::i_ratio},
          {dbl, "O(x^4)", Regime::small_x, ExpansionKind::double_i}};
}

// For nu > 1 (non-integer) the two printed terms carry an additional
// relative error O(x^{2(nu-1)}). For 0 < nu < 1 only the order statement
// exists, so the value is 0 and the tag carries the information.
inline Expansion small_x_K(const EvalPoint& p) {
  detail::require_point(p, "small_x_K");
  const double nu = p.nu;
  if (nu <= 0.0)
    throw domain_error("small_x_K: requires nu > 0");
  if (detail::is_integer(nu))
    throw domain_error("small_x_K: integer orders carry logarithmic terms");
  if (nu < 1.0)
    return {0.0, "O(x^{2nu})", Regime::small_x, ExpansionKind::k_ratio};
  const double x2 = p.x * p.x;
  const double m = nu - 1.0;
  const double value = x2 / (2.0 * m) - x2 * x2 / (8.0 * m * m * (nu - 2.0));
  return {value, "O(x^6) and relative O(x^{2nu-2})", Regime::small_x, ExpansionKind::k_ratio};
}

inline Expansion large_nu_ratio(RatioKind kind, const EvalPoint& p) {
  detail::require_point(p, "large_nu_ratio");
  const double nu = p.nu;
  if (nu == 0.0)
    throw domain_error("large_nu_ratio: requires nu != 0");
  const double x2 = p.x * p.x;
  const double t1 = x2 / (2.0 * nu);
  const double t2 = x2 / (2.0 * nu * nu);
  const double t3 = (x2 * x2 - 4.0 * x2) / (8.0 * nu * nu * nu);
  const double t4 = (x2 * x2 - x2) / (2.0 * nu * nu * nu * nu);
  if (kind == RatioKind::first_kind)
    return {2.0 * nu + t1 - t2 - t3 + t4, "O(nu^-5)", Regime::large_nu, ExpansionKind::i_ratio};
  return {t1 + t2 - t3 - t4, "O(nu^-5)", Regime::large_nu, ExpansionKind::k_ratio};
}

inline Expansion product_expansion(Regime regime, const EvalPoint& p) {
  detail::require_point(p, "product_expansion");
  const double nu = p.nu;
  const double x = p.x;
  switch (regime) {
  case Regime::large_x:
    return {1.0 / (2.0 * x) - (nu * nu - 0.25) / (4.0 * x * x * x), "O(x^-5)", regime,
            ExpansionKind::product};
  case Regime::small_x:
    if (nu <= 0.0)
      throw domain_error("product_expansion: small-x form requires nu > 0");
    if (detail::is_integer(nu))
      throw domain_error("product_expansion: integer orders carry logarithmic terms");
    return {1.0 / (2.0 * nu) - x * x / (4.0 * nu * (nu * nu - 1.0)),
            "O(x^4) and relative O(x^{2nu})", regime, ExpansionKind::product};
  case Regime::large_nu:
    if (nu == 0.0)
      throw domain_error("product_expansion: large-nu form requires nu != 0");
    return {1.0 / (2.0 * nu) - x * x / (4.0 * nu * nu * nu), "O(nu^-5)", regime,
            ExpansionKind::product};
  }
  throw domain_error("product_expansion: unknown regime");
}

// Relative accuracy of a bound: nonnegative exactly when the bound holds.
//   upper: bound / reference - 1      lower: 1 - bound / reference
// Written as a difference quotient so small accuracies keep their digits.
inline double relative_error(double bound, double reference, BoundDirection direction) {
  const double diff = direction == BoundDirection::upper ? bound - reference : reference - bound;
  return diff / reference;
}

} // namespace ikratio
