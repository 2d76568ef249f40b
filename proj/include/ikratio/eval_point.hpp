#pragma once

#include <cmath>
#include <string>

#include "ikratio/error.hpp"

namespace ikratio {

// An (order, argument) pair. Every operation taking an EvalPoint rejects
// x <= 0 and non-finite inputs; range restrictions on nu are per operation.
struct EvalPoint {
  double nu = 0.0;
  double x = 1.0;
};

namespace detail {

inline void require_point(const EvalPoint& p, const char* where) {
  if (!std::isfinite(p.nu) || !std::isfinite(p.x))
    throw domain_error(std::string(where) + ": non-finite input");
  if (!(p.x > 0.0))
    throw domain_error(std::string(where) + ": x must be > 0");
}

inline bool is_integer(double v) {
  return std::isfinite(v) && v == std::floor(v);
}

// 2*nu is an odd integer.
inline bool is_half_integer(double v) {
  double t = 2.0 * v;
  return is_integer(t) && std::fmod(std::fabs(t), 2.0) == 1.0;
}

} // namespace detail
} // namespace ikratio
