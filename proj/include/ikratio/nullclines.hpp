#pragma once

// Closed-form nullclines and bounds for the ratios
//   Phi0(nu, x) = I_{nu-1}(x) / I_nu(x),   Phi1(nu, x) = -K_{nu-1}(x) / K_nu(x)
// and for the product I_nu(x) K_nu(x).
//
// Two families are provided:
//  * Amos-type nullclines of the Riccati equation for x^{-a} Phi,
//    built on lambda_plus(a, nu, x) = (c + sqrt(c^2 + x^2)) / x, c = nu - (a+1)/2.
//  * The three real roots of  L^3 + L^2 - (nu^2 + x^2) L - nu^2 = 0,
//    which give the trigonometric bounds on the ratios, the double ratios
//    and the product.
//
// Roots are seeded with the trigonometric closed form and then polished by
// safeguarded Newton iteration on shifted polynomials (L = |nu| + d for the
// I root, L = -|nu| - d for the K and O roots), so that small offsets from
// +-|nu| keep full relative precision. The bound values are computed from
// the offsets; `trig_roots` exposes the unpolished closed form.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string_view>

#include "ikratio/detail/roots.hpp"
#include "ikratio/error.hpp"
#include "ikratio/eval_point.hpp"

namespace ikratio {

// Largest tolerated excursion of the arccos argument outside [-1, 1].
inline constexpr double acos_clamp_limit = 1e-8;

enum class Branch { plus, minus };
enum class ExtremumKind { min, max };
enum class BoundDirection { upper, lower };

// What a Bound bounds.
//   k_ratio           : Phi1 = -K_{nu-1}/K_nu (signed, negative for nu >= 1/2)
//   k_ratio_magnitude : K_{nu-1}/K_nu
enum class BoundTarget {
  i_ratio,
  k_ratio,
  k_ratio_magnitude,
  product,
  double_ratio_i,
  double_ratio_k,
  psi_i,
  psi_k,
};

struct Bound {
  double value = 0.0;
  BoundDirection direction = BoundDirection::upper;
  BoundTarget target = BoundTarget::i_ratio;
  // true only inside the (nu, x) range where the inequality is established
  bool valid = false;
  std::string_view validity_note;
  bool conjectural = false;
};

struct CubicRoots {
  double lambda_K = 0.0;
  double lambda_O = 0.0;
  double lambda_I = 0.0;
  double g = 0.0;
  double acos_arg = 0.0;
  // amount removed by clamping the arccos argument to [-1, 1]
  double clamp = 0.0;
  // offsets from +-|nu|: lambda_I = |nu| + delta_I, lambda_K = -|nu| - delta_K,
  // lambda_O = -|nu| - delta_O (delta_I, delta_K > 0 >= delta_O)
  double delta_I = 0.0;
  double delta_K = 0.0;
  double delta_O = 0.0;
};

struct WValues {
  double w_K = 0.0;
  double w_O = 0.0;
  double w_I = 0.0;
};

struct GammaHat {
  double plus = 0.0;
  double minus = 0.0;
};

struct NullclineExtremum {
  double location = 0.0;
  Branch branch = Branch::plus;
  ExtremumKind kind = ExtremumKind::min;
};

struct AmosBounds {
  Bound bound_I;
  Bound bound_K;
};

struct ProductBounds {
  Bound upper;
  Bound lower_amos;
  Bound lower_trig;
  Bound lower_simple;
  Bound lower_conjecture;
};

struct DoubleRatioBounds {
  Bound upper_I;
  Bound lower_I;
  Bound upper_K;
  Bound lower_K;
};

struct PsiBounds {
  Bound lower_I;
  Bound upper_I;
  Bound lower_K;
  Bound upper_K;
};

// Left-hand side of the cubic L^3 + L^2 - (nu^2 + x^2) L - nu^2.
inline double cubic_residual(double lambda, double nu, double x) {
  const double s = nu * nu + x * x;
  return ((lambda + 1.0) * lambda - s) * lambda - nu * nu;
}

inline double lambda_plus(double a, const EvalPoint& p) {
  detail::require_point(p, "lambda_plus");
  if (!std::isfinite(a))
    throw domain_error("lambda_plus: non-finite exponent");
  const double c = p.nu - 0.5 * (a + 1.0);
  const double r = std::hypot(c, p.x);
  // c + r loses precision for c << 0; use the conjugate form there
  return c >= 0.0 ? (c + r) / p.x : p.x / (r - c);
}

inline GammaHat gamma_hat(double a, const EvalPoint& p) {
  const double lp = lambda_plus(a, p);
  const double scale = std::pow(p.x, -a);
  return {scale * lp, -scale / lp};
}

// Relative extremum of the nullclines for 0 < |a| < 1.
inline std::optional<NullclineExtremum> nullcline_extremum(double a, double nu) {
  if (!std::isfinite(a) || !std::isfinite(nu))
    throw domain_error("nullcline_extremum: non-finite input");
  if (!(std::fabs(a) > 0.0 && std::fabs(a) < 1.0))
    throw domain_error("nullcline_extremum: requires 0 < |a| < 1");
  const double xe = -(std::sqrt(1.0 - a * a) / a) * (nu - 0.5 * (a + 1.0));
  if (xe > 0.0)
    return NullclineExtremum{xe, Branch::plus, a < 0.0 ? ExtremumKind::min : ExtremumKind::max};
  if (xe < 0.0)
    return NullclineExtremum{-xe, Branch::minus, a < 0.0 ? ExtremumKind::max : ExtremumKind::min};
  return std::nullopt;
}

// The unpolished trigonometric solution of the cubic:
//   L = (2/3) g cos(arccos(arg)/3 + alpha) - 1/3,
//   g = sqrt(3(nu^2+x^2)+1), arg = (18 nu^2 - 9 x^2 - 2) / (2 g^3),
// alpha = 0 (I), +2pi/3 (K), -2pi/3 (O).
inline CubicRoots trig_roots(const EvalPoint& p) {
  detail::require_point(p, "trig_roots");
  const double nu2 = p.nu * p.nu;
  const double x2 = p.x * p.x;
  CubicRoots r;
  r.g = std::sqrt(3.0 * (nu2 + x2) + 1.0);
  const double raw = (18.0 * nu2 - 9.0 * x2 - 2.0) / (2.0 * r.g * r.g * r.g);
  r.acos_arg = std::clamp(raw, -1.0, 1.0);
  r.clamp = std::fabs(raw - r.acos_arg);
  if (r.clamp > acos_clamp_limit)
    throw domain_error("trig_roots: arccos argument outside [-1, 1]");
  const double third = std::acos(r.acos_arg) / 3.0;
  constexpr double shift = 2.0 * std::numbers::pi / 3.0;
  const double amp = 2.0 * r.g / 3.0;
  r.lambda_I = amp * std::cos(third) - 1.0 / 3.0;
  r.lambda_K = amp * std::cos(third + shift) - 1.0 / 3.0;
  r.lambda_O = amp * std::cos(third - shift) - 1.0 / 3.0;
  const double n = std::fabs(p.nu);
  r.delta_I = r.lambda_I - n;
  r.delta_K = -n - r.lambda_K;
  r.delta_O = -n - r.lambda_O;
  return r;
}

namespace detail {

// Expands hi until f changes sign relative to f(lo).
template <class F>
double grow_bracket(F&& f, double lo, double hi) {
  const bool neg_lo = f(lo).first < 0.0;
  for (int i = 0; i < 2100 && ((f(hi).first < 0.0) == neg_lo); ++i)
    hi *= 2.0;
  return hi;
}

} // namespace detail

// Ordered roots lambda_K < lambda_O < lambda_I of the cubic (x > 0).
inline CubicRoots cubic_roots(const EvalPoint& p) {
  CubicRoots r = trig_roots(p);
  const double x2 = p.x * p.x;
  if (p.nu == 0.0) {
    // closed forms; lambda_O vanishes identically
    const double s = std::sqrt(1.0 + 4.0 * x2);
    r.lambda_I = 2.0 * x2 / (1.0 + s);
    r.lambda_K = -0.5 * (1.0 + s);
    r.lambda_O = 0.0;
    r.delta_I = r.lambda_I;
    r.delta_K = -r.lambda_K;
    r.delta_O = 0.0;
    return r;
  }
  const double n = std::fabs(p.nu);
  const double n2 = n * n;

  // L = n + d:  d^3 + (3n+1) d^2 + (2n^2 + 2n - x^2) d - n x^2
  auto shifted_up = [&](double d) {
    const double c2 = 3.0 * n + 1.0;
    const double c1 = 2.0 * n2 + 2.0 * n - x2;
    const double c0 = -n * x2;
    return std::pair{((d + c2) * d + c1) * d + c0, (3.0 * d + 2.0 * c2) * d + c1};
  };
  // L = -n - d: -d^3 + (1-3n) d^2 + (x^2 + 2n - 2n^2) d + n x^2
  auto shifted_down = [&](double d) {
    const double c2 = 1.0 - 3.0 * n;
    const double c1 = x2 + 2.0 * n - 2.0 * n2;
    const double c0 = n * x2;
    return std::pair{((-d + c2) * d + c1) * d + c0, (-3.0 * d + 2.0 * c2) * d + c1};
  };
  auto plain = [&](double l) {
    const double s = n2 + x2;
    return std::pair{((l + 1.0) * l - s) * l - n2, (3.0 * l + 2.0) * l - s};
  };

  const double scale = n + p.x + 1.0;
  {
    const double hi = detail::grow_bracket(shifted_up, 0.0, 2.0 * scale);
    r.delta_I = detail::polish_root(shifted_up, 0.0, hi, r.delta_I);
    r.lambda_I = n + r.delta_I;
  }
  {
    const double hi = detail::grow_bracket(shifted_down, 0.0, 2.0 * scale);
    r.delta_K = detail::polish_root(shifted_down, 0.0, hi, r.delta_K);
    r.lambda_K = -n - r.delta_K;
  }
  // lambda_O in (-n, 0); polish whichever representation is smaller in
  // magnitude and derive the other without cancellation.
  if (std::fabs(r.lambda_O) <= std::fabs(r.delta_O)) {
    r.lambda_O = detail::polish_root(plain, -n, 0.0, r.lambda_O);
    r.delta_O = -n - r.lambda_O;
  } else {
    r.delta_O = detail::polish_root(shifted_down, -n, 0.0, r.delta_O);
    r.lambda_O = -n - r.delta_O;
  }
  return r;
}

// w_A = (lambda_A^2 - nu^2) / x^2, evaluated as delta (2|nu| + delta) / x^2.
inline WValues w_values(const CubicRoots& r, const EvalPoint& p) {
  const double n = std::fabs(p.nu);
  const double x2 = p.x * p.x;
  return {r.delta_K * (2.0 * n + r.delta_K) / x2, r.delta_O * (2.0 * n + r.delta_O) / x2,
          r.delta_I * (2.0 * n + r.delta_I) / x2};
}

inline WValues w_values(const EvalPoint& p) { return w_values(cubic_roots(p), p); }

namespace detail {

inline constexpr std::string_view note_nu_nonneg = "nu >= 0";
inline constexpr std::string_view note_outside = "outside the established range";

inline Bound make_bound(double value, BoundDirection dir, BoundTarget target, bool valid,
                        std::string_view note) {
  return Bound{value, dir, target, valid, note, false};
}

} // namespace detail

// Upper bound U_I on I_{nu-1}/I_nu, equal to (lambda_I + nu) / x.
inline Bound trig_bound_I(const CubicRoots& r, const EvalPoint& p) {
  const double num = p.nu >= 0.0 ? 2.0 * p.nu + r.delta_I : r.delta_I;
  const bool ok = p.nu >= 0.0;
  return detail::make_bound(num / p.x, BoundDirection::upper, BoundTarget::i_ratio, ok,
                            ok ? detail::note_nu_nonneg : detail::note_outside);
}

inline Bound trig_bound_I(const EvalPoint& p) { return trig_bound_I(cubic_roots(p), p); }

// Upper bound U_K on K_{nu-1}/K_nu, equal to -(lambda_K + nu) / x.
inline Bound trig_bound_K(const CubicRoots& r, const EvalPoint& p) {
  const double n = std::fabs(p.nu);
  const double num = p.nu >= 0.0 ? r.delta_K : 2.0 * n + r.delta_K;
  const bool ok = p.nu >= 0.0;
  return detail::make_bound(num / p.x, BoundDirection::upper, BoundTarget::k_ratio_magnitude, ok,
                            ok ? detail::note_nu_nonneg : detail::note_outside);
}

inline Bound trig_bound_K(const EvalPoint& p) { return trig_bound_K(cubic_roots(p), p); }

// Amos-type bounds from the nullclines of the Riccati equation for x^{-a} Phi.
//
//   a = 0     Phi0 >  lambda_plus          nu >= 1/2
//             Phi1 < -1/lambda_plus        nu >  1/2 (equality at nu = 1/2)
//   a = -1    Phi0 <  lambda_plus          nu >= -1
//   a = 1     Phi1 > -1/lambda_plus        all nu
//   |a| > 1   a (Phi0 - lambda_plus) > 0   nu >= 0
//             a (Phi1 + 1/lambda_plus) > 0 all nu
//
// Any other (a, bound) combination is returned with valid = false and the
// direction implied by the sign of a.
inline AmosBounds amos_bounds(const EvalPoint& p, double a) {
  using enum BoundDirection;
  const double lp = lambda_plus(a, p);
  const double nu = p.nu;
  AmosBounds out;
  out.bound_I = detail::make_bound(lp, a > 0.0 || a == 0.0 ? lower : upper, BoundTarget::i_ratio,
                                   false, detail::note_outside);
  out.bound_K = detail::make_bound(-1.0 / lp, a > 0.0 ? lower : upper, BoundTarget::k_ratio,
                                   false, detail::note_outside);
  if (a == 0.0) {
    out.bound_I.valid = nu >= 0.5;
    out.bound_I.validity_note = out.bound_I.valid ? "nu >= 1/2" : detail::note_outside;
    out.bound_K.valid = nu > 0.5;
    out.bound_K.validity_note = out.bound_K.valid ? "nu > 1/2"
                                : nu == 0.5      ? "equality at nu = 1/2"
                                                 : detail::note_outside;
  } else if (a == -1.0) {
    out.bound_I.valid = nu >= -1.0;
    out.bound_I.validity_note = out.bound_I.valid ? "nu >= -1" : detail::note_outside;
  } else if (a == 1.0) {
    out.bound_K.valid = true;
    out.bound_K.validity_note = "all real nu";
  } else if (std::fabs(a) > 1.0) {
    out.bound_I.valid = nu >= 0.0;
    out.bound_I.validity_note = out.bound_I.valid ? detail::note_nu_nonneg : detail::note_outside;
    out.bound_K.valid = true;
    out.bound_K.validity_note = "all real nu";
  }
  return out;
}

inline ProductBounds product_bounds(const CubicRoots& r, const EvalPoint& p) {
  using enum BoundDirection;
  constexpr auto T = BoundTarget::product;
  const double nu = p.nu;
  const double x = p.x;
  const double n = std::fabs(nu);
  ProductBounds b;
  b.upper = detail::make_bound(0.5 / std::hypot(nu - 0.5, x), upper, T, nu >= 0.5,
                               nu >= 0.5 ? "nu >= 1/2" : detail::note_outside);
  b.lower_amos = detail::make_bound(1.0 / (1.0 + std::hypot(nu, x) + std::hypot(nu - 1.0, x)),
                                    lower, T, nu >= -1.0,
                                    nu >= -1.0 ? "nu >= -1" : detail::note_outside);
  // sqrt(3) / (2 g sin(arccos(h/g^3)/3 + pi/3)) == 1 / (lambda_I - lambda_K)
  b.lower_trig = detail::make_bound(1.0 / (2.0 * n + r.delta_I + r.delta_K), lower, T, nu >= 0.0,
                                    nu >= 0.0 ? detail::note_nu_nonneg : detail::note_outside);
  b.lower_simple = detail::make_bound(0.5 / std::sqrt(x * x + nu * nu + 1.0 / 3.0), lower, T,
                                      nu >= 0.0,
                                      nu >= 0.0 ? detail::note_nu_nonneg : detail::note_outside);
  b.lower_conjecture = detail::make_bound(0.5 / std::sqrt(x * x + nu * nu + 0.2), lower, T, false,
                                          "conjectural (nominal nu >= -1)");
  b.lower_conjecture.conjectural = true;
  return b;
}

inline ProductBounds product_bounds(const EvalPoint& p) { return product_bounds(cubic_roots(p), p); }

// 0 < W_I < w_I and 0 < W_K < w_K for nu >= 0.
inline DoubleRatioBounds double_ratio_bounds(const CubicRoots& r, const EvalPoint& p) {
  using enum BoundDirection;
  const WValues w = w_values(r, p);
  const bool ok = p.nu >= 0.0;
  const auto note = ok ? detail::note_nu_nonneg : detail::note_outside;
  return {detail::make_bound(w.w_I, upper, BoundTarget::double_ratio_i, ok, note),
          detail::make_bound(0.0, lower, BoundTarget::double_ratio_i, ok, note),
          detail::make_bound(w.w_K, upper, BoundTarget::double_ratio_k, ok, note),
          detail::make_bound(0.0, lower, BoundTarget::double_ratio_k, ok, note)};
}

inline DoubleRatioBounds double_ratio_bounds(const EvalPoint& p) {
  return double_ratio_bounds(cubic_roots(p), p);
}

// nu < psi_I < lambda_I and lambda_K < psi_K < -nu for nu >= 0.
inline PsiBounds psi_bounds(const CubicRoots& r, const EvalPoint& p) {
  using enum BoundDirection;
  const bool ok = p.nu >= 0.0;
  const auto note = ok ? detail::note_nu_nonneg : detail::note_outside;
  return {detail::make_bound(p.nu, lower, BoundTarget::psi_i, ok, note),
          detail::make_bound(r.lambda_I, upper, BoundTarget::psi_i, ok, note),
          detail::make_bound(r.lambda_K, lower, BoundTarget::psi_k, ok, note),
          detail::make_bound(-p.nu, upper, BoundTarget::psi_k, ok, note)};
}

inline PsiBounds psi_bounds(const EvalPoint& p) { return psi_bounds(cubic_roots(p), p); }

// Every Bound this header can return with valid = true, one name per
// (producer, field, case). Other Amos exponents only ever return valid = false.
inline constexpr std::array<std::string_view, 21> bound_producers = {
    "amos_bounds(a=0).bound_I",      "amos_bounds(a=0).bound_K",
    "amos_bounds(a=-1).bound_I",     "amos_bounds(a=1).bound_K",
    "amos_bounds(|a|>1).bound_I",    "amos_bounds(|a|>1).bound_K",
    "trig_bound_I",                  "trig_bound_K",
    "product_bounds.upper",          "product_bounds.lower_amos",
    "product_bounds.lower_trig",     "product_bounds.lower_simple",
    "product_bounds.lower_conjecture",
    "double_ratio_bounds.upper_I",   "double_ratio_bounds.lower_I",
    "double_ratio_bounds.upper_K",   "double_ratio_bounds.lower_K",
    "psi_bounds.lower_I",            "psi_bounds.upper_I",
    "psi_bounds.lower_K",            "psi_bounds.upper_K",
};

} // namespace ikratio
