#pragma once

#include <stdexcept>
#include <string>

namespace ikratio {

// Input outside the domain of an operation (x <= 0, non-finite values,
// excluded orders).
class domain_error : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

// A numerical procedure failed to produce a value (continued fraction did
// not converge, integrator gave up, blow-up during an oracle integration).
class evaluation_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace ikratio
