#pragma once

// Grid scans that turn the bounds, monotonicity statements and sharpness
// orders into reports: a catalog of bound claims checked against the
// oracles, forward-difference monotonicity checks, log-log order fits and
// the scan of s = 1/(4P^2) - x^2 - nu^2 for the product.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <exception>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "ikratio/error.hpp"
#include "ikratio/eval_point.hpp"
#include "ikratio/expansions.hpp"
#include "ikratio/nullclines.hpp"
#include "ikratio/oracle.hpp"

namespace ikratio {

// ---------------------------------------------------------------- grids

struct Grid {
  std::vector<double> nu_values;
  std::vector<double> x_values;  // ascending, all > 0
  std::string exclusions;        // human-readable description
};

inline std::vector<double> log_space(double lo, double hi, std::size_t n) {
  if (n == 0)
    return {};
  if (!(lo > 0.0) || !(hi >= lo))
    throw domain_error("log_space: requires 0 < lo <= hi");
  if (n == 1)
    return {lo};
  std::vector<double> v(n);
  const double step = std::log(hi / lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = lo * std::exp(step * static_cast<double>(i));
  v.back() = hi;
  return v;
}

// nu_min, nu_min + step, ... computed from integer multiples so that grid
// orders such as 0.5 or 1 are exact.
inline std::vector<double> linear_steps(double lo, double hi, double step) {
  if (!(step > 0.0))
    throw domain_error("linear_steps: step must be > 0");
  std::vector<double> v;
  if (hi < lo)
    return v;
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  v.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
    v.push_back(lo + step * static_cast<double>(i));
  return v;
}

inline Grid make_grid(double nu_min, double nu_max, double nu_step, double x_min, double x_max,
                      std::size_t x_points) {
  return {linear_steps(nu_min, nu_max, nu_step), log_space(x_min, x_max, x_points), "none"};
}

inline Grid default_grid() { return make_grid(-1.0, 20.0, 0.25, 1e-3, 1e3, 121); }

inline Grid without_integer_orders(Grid g) {
  std::erase_if(g.nu_values, [](double nu) { return detail::is_integer(nu); });
  g.exclusions = "integer nu";
  return g;
}

// ---------------------------------------------------------------- reports

struct Violation {
  double nu = 0.0;
  double x = 0.0;
  double margin = 0.0;
};

struct PointRecord {
  double nu = 0.0;
  double x = 0.0;
  double bound = 0.0;
  double oracle = 0.0;
  double margin = 0.0;
};

struct FitResult {
  double exponent = 0.0;
  double coefficient = 0.0;
};

struct ScanReport {
  std::string claim_id;
  std::size_t points_checked = 0;
  std::size_t oracle_failures = 0;
  std::vector<Violation> violations;
  // smallest signed margin seen (+inf when nothing was checked)
  double worst_margin = std::numeric_limits<double>::infinity();
  std::optional<FitResult> fitted;
  std::vector<PointRecord> records;  // filled when requested

  bool passed() const { return violations.empty(); }
};

// ---------------------------------------------------------------- oracle table

struct OracleSample {
  EvalPoint point;
  std::optional<OracleResult> phi0;       // I_{nu-1}/I_nu
  std::optional<OracleResult> phi0_next;  // I_nu/I_{nu+1}
  std::optional<OracleResult> phi1;       // -K_{nu-1}/K_nu
  // evaluations that were attempted inside the oracle contract and failed;
  // values outside the contract (first kind below order -1) stay empty
  // without counting as failures
  int failures = 0;
};

struct Measured {
  double value = 0.0;
  double error = 0.0;  // absolute
};

inline std::optional<Measured> measure(const OracleSample& s, BoundTarget target) {
  const double nu = s.point.nu;
  const double x = s.point.x;
  switch (target) {
  case BoundTarget::i_ratio:
    if (s.phi0)
      return Measured{s.phi0->value, s.phi0->est_error};
    return std::nullopt;
  case BoundTarget::k_ratio:
    if (s.phi1)
      return Measured{s.phi1->value, s.phi1->est_error};
    return std::nullopt;
  case BoundTarget::k_ratio_magnitude:
    if (s.phi1)
      return Measured{-s.phi1->value, s.phi1->est_error};
    return std::nullopt;
  case BoundTarget::psi_i:
    if (s.phi0)
      return Measured{x * s.phi0->value - nu, x * s.phi0->est_error};
    return std::nullopt;
  case BoundTarget::psi_k:
    if (s.phi1)
      return Measured{x * s.phi1->value - nu, x * s.phi1->est_error};
    return std::nullopt;
  case BoundTarget::double_ratio_i:
    if (s.phi0 && s.phi0_next) {
      const double w = s.phi0->value / s.phi0_next->value;
      const double rel = s.phi0->est_error / std::fabs(s.phi0->value) +
                         s.phi0_next->est_error / std::fabs(s.phi0_next->value);
      return Measured{w, rel * std::fabs(w)};
    }
    return std::nullopt;
  case BoundTarget::double_ratio_k:
    if (s.phi1) {
      const double k = s.phi1->value;
      const double shifted = k - 2.0 * nu / x;
      const double w = k * shifted;
      const double rel = s.phi1->est_error / std::fabs(k) + s.phi1->est_error / std::fabs(shifted);
      return Measured{w, rel * std::fabs(w)};
    }
    return std::nullopt;
  case BoundTarget::product:
    if (s.phi0 && s.phi1) {
      const double diff = s.phi0->value - s.phi1->value;
      const double pv = 1.0 / (x * diff);
      const double rel = (s.phi0->est_error + s.phi1->est_error) / std::fabs(diff);
      return Measured{pv, rel * std::fabs(pv)};
    }
    return std::nullopt;
  }
  return std::nullopt;
}

inline OracleSample sample_oracles(const EvalPoint& p, const OracleOptions& opt = {}) {
  OracleSample s{p, {}, {}, {}, 0};
  auto attempt = [&](std::optional<OracleResult>& slot, auto&& eval) {
    try {
      slot = eval();
    } catch (const evaluation_error&) {
      ++s.failures;
    }
  };
  if (p.nu >= -1.0)
    attempt(s.phi0, [&] { return i_ratio(p, opt); });
  if (p.nu + 1.0 >= -1.0)
    attempt(s.phi0_next, [&] { return i_ratio({p.nu + 1.0, p.x}, opt); });
  attempt(s.phi1, [&] { return k_ratio(p, opt); });
  return s;
}

inline std::size_t failed_points(const std::vector<OracleSample>& samples) {
  return static_cast<std::size_t>(
      std::count_if(samples.begin(), samples.end(), [](const OracleSample& s) { return s.failures > 0; }));
}

namespace detail {

inline unsigned worker_count(unsigned requested, std::size_t work) {
  unsigned n = requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(work, 1)));
}

// Runs body(i) for i in [0, n) on up to `threads` workers. Each index is
// owned by exactly one worker, so results written to slot i need no locks.
template <class Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body) {
  const unsigned workers = worker_count(threads, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i)
      body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < n; i += workers)
            body(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
  }
  for (const std::exception_ptr& e : errors)
    if (e)
      std::rethrow_exception(e);
}

} // namespace detail

// Oracle samples for every grid point, row-major in nu.
struct OracleTable {
  Grid grid;
  std::vector<OracleSample> samples;

  const OracleSample& at(std::size_t row, std::size_t col) const {
    return samples[row * grid.x_values.size() + col];
  }
};

inline OracleTable build_oracle_table(const Grid& grid, const OracleOptions& opt = {},
                                      unsigned threads = 0) {
  OracleTable t{grid, {}};
  const std::size_t cols = grid.x_values.size();
  t.samples.resize(grid.nu_values.size() * cols);
  detail::parallel_for(grid.nu_values.size(), threads, [&](std::size_t row) {
    for (std::size_t c = 0; c < cols; ++c)
      t.samples[row * cols + c] = sample_oracles({grid.nu_values[row], grid.x_values[c]}, opt);
  });
  return t;
}

// ---------------------------------------------------------------- bound claims

struct BoundClaim {
  std::string_view id;
  std::string_view producer;  // entry of bound_producers
  // conjectural claims are scanned and reported but never fail a run
  bool gating = true;
  Bound (*make)(const EvalPoint&, const CubicRoots&);
};

namespace detail {

template <double A>
Bound amos_I(const EvalPoint& p, const CubicRoots&) {
  return amos_bounds(p, A).bound_I;
}
template <double A>
Bound amos_K(const EvalPoint& p, const CubicRoots&) {
  return amos_bounds(p, A).bound_K;
}

} // namespace detail

inline const std::vector<BoundClaim>& claim_catalog() {
  using R = const CubicRoots&;
  using P = const EvalPoint&;
  static const std::vector<BoundClaim> catalog = {
      {"amos-lower-I-a0", "amos_bounds(a=0).bound_I", true, detail::amos_I<0.0>},
      {"amos-upper-K-a0", "amos_bounds(a=0).bound_K", true, detail::amos_K<0.0>},
      {"amos-upper-I-am1", "amos_bounds(a=-1).bound_I", true, detail::amos_I<-1.0>},
      {"amos-lower-K-a1", "amos_bounds(a=1).bound_K", true, detail::amos_K<1.0>},
      {"amos-signed-I-am3", "amos_bounds(|a|>1).bound_I", true, detail::amos_I<-3.0>},
      {"amos-signed-I-am1.5", "amos_bounds(|a|>1).bound_I", true, detail::amos_I<-1.5>},
      {"amos-signed-I-a1.5", "amos_bounds(|a|>1).bound_I", true, detail::amos_I<1.5>},
      {"amos-signed-I-a3", "amos_bounds(|a|>1).bound_I", true, detail::amos_I<3.0>},
      {"amos-signed-K-am3", "amos_bounds(|a|>1).bound_K", true, detail::amos_K<-3.0>},
      {"amos-signed-K-am1.5", "amos_bounds(|a|>1).bound_K", true, detail::amos_K<-1.5>},
      {"amos-signed-K-a1.5", "amos_bounds(|a|>1).bound_K", true, detail::amos_K<1.5>},
      {"amos-signed-K-a3", "amos_bounds(|a|>1).bound_K", true, detail::amos_K<3.0>},
      {"trig-upper-I", "trig_bound_I", true, [](P p, R r) { return trig_bound_I(r, p); }},
      {"trig-upper-K", "trig_bound_K", true, [](P p, R r) { return trig_bound_K(r, p); }},
      {"product-upper", "product_bounds.upper", true,
       [](P p, R r) { return product_bounds(r, p).upper; }},
      {"product-lower-amos", "product_bounds.lower_amos", true,
       [](P p, R r) { return product_bounds(r, p).lower_amos; }},
      {"product-lower-trig", "product_bounds.lower_trig", true,
       [](P p, R r) { return product_bounds(r, p).lower_trig; }},
      {"product-lower-simple", "product_bounds.lower_simple", true,
       [](P p, R r) { return product_bounds(r, p).lower_simple; }},
      {"product-lower-conjecture", "product_bounds.lower_conjecture", false,
       [](P p, R r) {
         Bound b = product_bounds(r, p).lower_conjecture;
         b.valid = p.nu >= -1.0;  // scanned over its nominal range
         return b;
       }},
      {"double-upper-I", "double_ratio_bounds.upper_I", true,
       [](P p, R r) { return double_ratio_bounds(r, p).upper_I; }},
      {"double-lower-I", "double_ratio_bounds.lower_I", true,
       [](P p, R r) { return double_ratio_bounds(r, p).lower_I; }},
      {"double-upper-K", "double_ratio_bounds.upper_K", true,
       [](P p, R r) { return double_ratio_bounds(r, p).upper_K; }},
      {"double-lower-K", "double_ratio_bounds.lower_K", true,
       [](P p, R r) { return double_ratio_bounds(r, p).lower_K; }},
      {"psi-lower-I", "psi_bounds.lower_I", true, [](P p, R r) { return psi_bounds(r, p).lower_I; }},
      {"psi-upper-I", "psi_bounds.upper_I", true, [](P p, R r) { return psi_bounds(r, p).upper_I; }},
      {"psi-lower-K", "psi_bounds.lower_K", true, [](P p, R r) { return psi_bounds(r, p).lower_K; }},
      {"psi-upper-K", "psi_bounds.upper_K", true, [](P p, R r) { return psi_bounds(r, p).upper_K; }},
  };
  return catalog;
}

inline const BoundClaim* find_claim(std::string_view id) {
  for (const BoundClaim& c : claim_catalog())
    if (c.id == id)
      return &c;
  return nullptr;
}

// Signed relative slack of `b` against the measured value: positive when
// the inequality holds.
inline double bound_margin(const Bound& b, double measured) {
  const double diff = b.direction == BoundDirection::upper ? b.value - measured : measured - b.value;
  const double scale = std::max(std::fabs(measured), std::numeric_limits<double>::min());
  return diff / scale;
}

struct ScanOptions {
  double tol = 1e-12;  // relative, added to the oracle's own relative error
  OracleOptions oracle;
  unsigned threads = 0;  // 0: hardware concurrency
  bool keep_records = false;
  // self-test hook: reverse the inequality of this claim
  std::string corrupt_claim;
};

inline std::vector<ScanReport> scan_claims(const std::vector<const BoundClaim*>& claims,
                                           const OracleTable& table, const ScanOptions& opt = {}) {
  const Grid& grid = table.grid;
  const std::size_t rows = grid.nu_values.size();
  const std::size_t cols = grid.x_values.size();
  // per row, per claim partial reports; merged in (nu, x) order afterwards
  std::vector<std::vector<ScanReport>> partial(rows, std::vector<ScanReport>(claims.size()));

  detail::parallel_for(rows, opt.threads, [&](std::size_t row) {
    for (std::size_t c = 0; c < cols; ++c) {
      const OracleSample& s = table.at(row, c);
      const EvalPoint& p = s.point;
      const CubicRoots roots = cubic_roots(p);
      for (std::size_t k = 0; k < claims.size(); ++k) {
        const Bound b = claims[k]->make(p, roots);
        if (!b.valid)
          continue;
        ScanReport& rep = partial[row][k];
        const std::optional<Measured> m = measure(s, b.target);
        if (!m) {
          ++rep.oracle_failures;
          continue;
        }
        double margin = bound_margin(b, m->value);
        if (claims[k]->id == opt.corrupt_claim)
          margin = -margin;
        const double allowance = opt.tol + m->error / std::fabs(m->value);
        ++rep.points_checked;
        rep.worst_margin = std::min(rep.worst_margin, margin);
        if (margin < -allowance)
          rep.violations.push_back({p.nu, p.x, margin});
        if (opt.keep_records)
          rep.records.push_back({p.nu, p.x, b.value, m->value, margin});
      }
    }
  });

  std::vector<ScanReport> out(claims.size());
  for (std::size_t k = 0; k < claims.size(); ++k) {
    ScanReport& r = out[k];
    r.claim_id = std::string(claims[k]->id);
    for (std::size_t row = 0; row < rows; ++row) {
      ScanReport& part = partial[row][k];
      r.points_checked += part.points_checked;
      r.oracle_failures += part.oracle_failures;
      r.worst_margin = std::min(r.worst_margin, part.worst_margin);
      r.violations.insert(r.violations.end(), part.violations.begin(), part.violations.end());
      r.records.insert(r.records.end(), part.records.begin(), part.records.end());
    }
  }
  return out;
}

inline std::vector<const BoundClaim*> all_claims() {
  std::vector<const BoundClaim*> v;
  for (const BoundClaim& c : claim_catalog())
    v.push_back(&c);
  return v;
}

inline ScanReport scan_bound(std::string_view claim_id, const Grid& grid, const ScanOptions& opt = {}) {
  const BoundClaim* claim = find_claim(claim_id);
  if (claim == nullptr)
    throw domain_error("scan_bound: unknown claim '" + std::string(claim_id) + "'");
  const OracleTable table = build_oracle_table(grid, opt.oracle, opt.threads);
  return scan_claims({claim}, table, opt).front();
}

// ---------------------------------------------------------------- monotonicity

enum class Quantity {
  product,
  x_product,
  i_ratio,
  x_i_ratio,
  k_ratio,
  double_ratio_i,
  double_ratio_k,
  w_I,
  w_O,
  w_K,
  lambda_I,
  lambda_O,
  lambda_K,
};

enum class Trend { increasing, decreasing };

inline constexpr std::array<std::pair<Quantity, std::string_view>, 13> quantity_names = {{
    {Quantity::product, "P"},
    {Quantity::x_product, "xP"},
    {Quantity::i_ratio, "phi0"},
    {Quantity::x_i_ratio, "x_phi0"},
    {Quantity::k_ratio, "phi1"},
    {Quantity::double_ratio_i, "W_I"},
    {Quantity::double_ratio_k, "W_K"},
    {Quantity::w_I, "w_I"},
    {Quantity::w_O, "w_O"},
    {Quantity::w_K, "w_K"},
    {Quantity::lambda_I, "lambda_I"},
    {Quantity::lambda_O, "lambda_O"},
    {Quantity::lambda_K, "lambda_K"},
}};

inline std::string_view quantity_name(Quantity q) {
  for (const auto& [k, name] : quantity_names)
    if (k == q)
      return name;
  return "?";
}

inline std::optional<Quantity> parse_quantity(std::string_view name) {
  for (const auto& [k, n] : quantity_names)
    if (n == name)
      return k;
  return std::nullopt;
}

inline std::optional<Measured> evaluate_quantity(Quantity q, const OracleSample& s) {
  const EvalPoint& p = s.point;
  auto scaled = [&](std::optional<Measured> m) -> std::optional<Measured> {
    if (!m)
      return m;
    return Measured{p.x * m->value, p.x * m->error};
  };
  auto exact = [](double v) { return std::optional<Measured>(Measured{v, 0.0}); };
  switch (q) {
  case Quantity::product:
    return measure(s, BoundTarget::product);
  case Quantity::x_product:
    return scaled(measure(s, BoundTarget::product));
  case Quantity::i_ratio:
    return measure(s, BoundTarget::i_ratio);
  case Quantity::x_i_ratio:
    return scaled(measure(s, BoundTarget::i_ratio));
  case Quantity::k_ratio:
    return measure(s, BoundTarget::k_ratio);
  case Quantity::double_ratio_i:
    return measure(s, BoundTarget::double_ratio_i);
  case Quantity::double_ratio_k:
    return measure(s, BoundTarget::double_ratio_k);
  case Quantity::w_I:
    return exact(w_values(p).w_I);
  case Quantity::w_O:
    return exact(w_values(p).w_O);
  case Quantity::w_K:
    return exact(w_values(p).w_K);
  case Quantity::lambda_I:
    return exact(cubic_roots(p).lambda_I);
  case Quantity::lambda_O:
    return exact(cubic_roots(p).lambda_O);
  case Quantity::lambda_K:
    return exact(cubic_roots(p).lambda_K);
  }
  return std::nullopt;
}

struct MonotoneClaim {
  std::string_view id;
  Quantity quantity;
  Trend expected;
  bool (*row_selected)(double nu);
};

inline const std::vector<MonotoneClaim>& monotone_catalog() {
  using enum Quantity;
  using enum Trend;
  static const std::vector<MonotoneClaim> catalog = {
      {"mono-P-decreasing", product, decreasing,
       [](double nu) {
         for (double v : {-1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 5.0})
           if (nu == v)
             return true;
         return false;
       }},
      {"mono-xP-increasing", x_product, increasing,
       [](double nu) {
         for (double v : {0.5, 1.0, 2.0, 5.0})
           if (nu == v)
             return true;
         return false;
       }},
      {"mono-phi0-decreasing", i_ratio, decreasing, [](double nu) { return nu >= 0.5; }},
      {"mono-x-phi0-increasing", x_i_ratio, increasing, [](double nu) { return nu >= -1.0; }},
      {"mono-phi1-decreasing", k_ratio, decreasing, [](double nu) { return nu > 0.5; }},
      {"mono-W_I-increasing", double_ratio_i, increasing, [](double nu) { return nu >= 0.0; }},
      {"mono-W_K-decreasing", double_ratio_k, decreasing, [](double nu) { return nu >= 0.0; }},
      {"mono-w_I-increasing", w_I, increasing, [](double nu) { return nu > 0.0; }},
      {"mono-w_O-increasing", w_O, increasing, [](double nu) { return nu > 0.0; }},
      {"mono-w_K-decreasing", w_K, decreasing, [](double nu) { return nu > 0.0; }},
      {"mono-lambda_I-increasing", lambda_I, increasing, [](double nu) { return nu >= 0.0; }},
      {"mono-lambda_O-increasing", lambda_O, increasing, [](double nu) { return nu >= 0.0; }},
      {"mono-lambda_K-decreasing", lambda_K, decreasing, [](double nu) { return nu >= 0.0; }},
  };
  return catalog;
}

// Forward differences along each selected nu row. The margin of a step is
// the signed change in the expected direction divided by the larger
// magnitude of its two end values; a step violates when the margin is
// below -tol after allowing for the oracle errors of both ends.
inline ScanReport scan_monotone(std::string_view id, Quantity q, const OracleTable& table,
                                Trend expected, double tol, bool (*row_selected)(double) = nullptr,
                                unsigned threads = 0) {
  const Grid& grid = table.grid;
  const std::size_t rows = grid.nu_values.size();
  const std::size_t cols = grid.x_values.size();
  std::vector<ScanReport> partial(rows);
  detail::parallel_for(rows, threads, [&](std::size_t row) {
    const double nu = grid.nu_values[row];
    if (row_selected != nullptr && !row_selected(nu))
      return;
    ScanReport& rep = partial[row];
    std::optional<Measured> prev;
    for (std::size_t c = 0; c < cols; ++c) {
      std::optional<Measured> cur = evaluate_quantity(q, table.at(row, c));
      if (!cur) {
        ++rep.oracle_failures;
        prev.reset();
        continue;
      }
      if (prev) {
        const double diff = expected == Trend::increasing ? cur->value - prev->value
                                                          : prev->value - cur->value;
        const double scale = std::max({std::fabs(cur->value), std::fabs(prev->value),
                                       std::numeric_limits<double>::min()});
        const double margin = diff / scale;
        const double allowance = tol + (cur->error + prev->error) / scale;
        ++rep.points_checked;
        rep.worst_margin = std::min(rep.worst_margin, margin);
        if (margin < -allowance)
          rep.violations.push_back({nu, grid.x_values[c], margin});
      }
      prev = cur;
    }
  });
  ScanReport out;
  out.claim_id = std::string(id);
  for (ScanReport& part : partial) {
    out.points_checked += part.points_checked;
    out.oracle_failures += part.oracle_failures;
    out.worst_margin = std::min(out.worst_margin, part.worst_margin);
    out.violations.insert(out.violations.end(), part.violations.begin(), part.violations.end());
  }
  return out;
}

inline ScanReport scan_monotone(const MonotoneClaim& claim, const OracleTable& table, double tol,
                                unsigned threads = 0) {
  return scan_monotone(claim.id, claim.quantity, table, claim.expected, tol, claim.row_selected,
                       threads);
}

// ---------------------------------------------------------------- order fits

struct ErrorSample {
  double scale = 0.0;  // x or nu
  double eps = 0.0;    // relative accuracy, > 0
  double eps_error = 0.0;
};

struct FitOptions {
  // Power q of the correction variable t in
  //   log eps = log C + p log s + d t,  t = s^-q (large regimes), s^q (small x).
  // q = 0 fits the plain straight line.
  int correction_power = 1;
};

struct FitOutcome {
  bool ok = false;
  std::string reason;  // why the samples were unfittable
  FitResult fit;
};

namespace detail {

// Least squares for a small dense system via the normal equations.
inline std::optional<std::vector<double>> least_squares(const std::vector<std::vector<double>>& rows,
                                                        const std::vector<double>& rhs) {
  const std::size_t n = rows.front().size();
  std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
  for (std::size_t k = 0; k < rows.size(); ++k)
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j)
        a[i][j] += rows[k][i] * rows[k][j];
      a[i][n] += rows[k][i] * rhs[k];
    }
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(a[r][col]) > std::fabs(a[piv][col]))
        piv = r;
    if (std::fabs(a[piv][col]) < 1e-300)
      return std::nullopt;
    std::swap(a[col], a[piv]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col)
        continue;
      const double f = a[r][col] / a[col][col];
      for (std::size_t j = col; j <= n; ++j)
        a[r][j] -= f * a[col][j];
    }
  }
  std::vector<double> sol(n);
  for (std::size_t i = 0; i < n; ++i)
    sol[i] = a[i][n] / a[i][i];
  return sol;
}

} // namespace detail

// Fits eps ~ C s^p in log-log coordinates, optionally with one correction
// term, and returns (p, C). Requires at least 3 samples (and more samples
// than parameters), a scale range of at least a factor 4, and every eps
// above 100 times its own error.
inline FitOutcome fit_error_order(const std::vector<ErrorSample>& samples, Regime regime,
                                  const FitOptions& opt = {}) {
  FitOutcome out;
  const std::size_t params = opt.correction_power == 0 ? 2 : 3;
  if (samples.size() < 3 || samples.size() < params) {
    out.reason = "too few samples";
    return out;
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const ErrorSample& s : samples) {
    if (!(s.scale > 0.0) || !(s.eps > 0.0)) {
      out.reason = "non-positive scale or accuracy";
      return out;
    }
    if (s.eps <= 100.0 * s.eps_error) {
      out.reason = "accuracy below 100x oracle error";
      return out;
    }
    lo = std::min(lo, s.scale);
    hi = std::max(hi, s.scale);
  }
  if (hi < 4.0 * lo) {
    out.reason = "scale range narrower than a factor 4";
    return out;
  }
  std::vector<std::vector<double>> rows;
  std::vector<double> rhs;
  for (const ErrorSample& s : samples) {
    std::vector<double> r{1.0, std::log(s.scale)};
    if (params == 3) {
      const double q = static_cast<double>(opt.correction_power);
      r.push_back(regime == Regime::small_x ? std::pow(s.scale, q) : std::pow(s.scale, -q));
    }
    rows.push_back(std::move(r));
    rhs.push_back(std::log(s.eps));
  }
  const auto sol = detail::least_squares(rows, rhs);
  if (!sol) {
    out.reason = "singular fit";
    return out;
  }
  out.ok = true;
  out.fit = {(*sol)[1], std::exp((*sol)[0])};
  return out;
}

// ---------------------------------------------------------------- sharpness

enum class Accuracy { i_ratio_upper, k_ratio_upper, product_lower };

struct SharpnessCase {
  std::string_view id;
  Accuracy accuracy;
  Regime regime;
  double fixed;                 // nu for x regimes, x for the large-nu regime
  std::vector<double> scales;   // x values, or nu values
  double exponent;              // expected leading order
  double coefficient;           // expected leading coefficient
  int correction_power;
};

// Relative accuracy of the trigonometric bound at one point, with the
// error inherited from the oracle.
inline ErrorSample accuracy_sample(Accuracy acc, const EvalPoint& p,
                                   const OracleOptions& opt = {}) {
  const CubicRoots r = cubic_roots(p);
  double bound = 0.0;
  OracleResult ref;
  BoundDirection dir = BoundDirection::upper;
  switch (acc) {
  case Accuracy::i_ratio_upper:
    bound = trig_bound_I(r, p).value;
    ref = i_ratio(p, opt);
    break;
  case Accuracy::k_ratio_upper:
    bound = trig_bound_K(r, p).value;
    ref = k_ratio(p, opt);
    ref.value = -ref.value;
    break;
  case Accuracy::product_lower:
    bound = product_bounds(r, p).lower_trig.value;
    ref = product(p, opt);
    dir = BoundDirection::lower;
    break;
  }
  const double eps = relative_error(bound, ref.value, dir);
  const double err = ref.est_error / std::fabs(ref.value) * (std::fabs(eps) + 1.0);
  return {0.0, eps, err};
}

inline const std::vector<SharpnessCase>& sharpness_catalog() {
  using enum Accuracy;
  using enum Regime;
  static const std::vector<double> large_x_scales = {25.0, 50.0, 100.0, 200.0};
  static const std::vector<double> small_x_scales = {0.02, 0.04, 0.08, 0.16};
  static const std::vector<double> large_nu_scales = {10.0, 20.0, 40.0};
  static const std::vector<SharpnessCase> catalog = {
      {"eps-I-large-x", i_ratio_upper, large_x, 1.0, large_x_scales, -2.0, 0.25, 1},
      {"eps-I-small-x", i_ratio_upper, small_x, 1.0, small_x_scales, 4.0, 1.0 / 192.0, 2},
      {"eps-I-large-nu", i_ratio_upper, large_nu, 1.0, large_nu_scales, -6.0, 0.125, 1},
      {"eps-K-large-x", k_ratio_upper, large_x, 1.0, large_x_scales, -2.0, 0.25, 1},
      {"eps-K-large-nu", k_ratio_upper, large_nu, 1.0, large_nu_scales, -4.0, 0.5, 1},
      {"eps-P-large-x", product_lower, large_x, 1.0, large_x_scales, -2.0, 0.25, 1},
      // the product expansion in 1/nu has only odd powers
      {"eps-P-large-nu", product_lower, large_nu, 1.0, large_nu_scales, -6.0, 0.25, 2},
  };
  return catalog;
}

struct SharpnessResult {
  std::string_view id;
  FitOutcome outcome;
  bool exponent_ok = false;
  bool coefficient_ok = false;
  bool passed() const { return outcome.ok && exponent_ok && coefficient_ok; }
};

inline SharpnessResult run_sharpness(const SharpnessCase& c, double exponent_tol = 0.15,
                                     double coefficient_rel_tol = 0.10,
                                     const OracleOptions& opt = {}) {
  std::vector<ErrorSample> samples;
  for (double s : c.scales) {
    const EvalPoint p = c.regime == Regime::large_nu ? EvalPoint{s, c.fixed} : EvalPoint{c.fixed, s};
    ErrorSample e = accuracy_sample(c.accuracy, p, opt);
    e.scale = s;
    samples.push_back(e);
  }
  SharpnessResult r{c.id, fit_error_order(samples, c.regime, {c.correction_power}), false, false};
  if (r.outcome.ok) {
    r.exponent_ok = std::fabs(r.outcome.fit.exponent - c.exponent) <= exponent_tol;
    r.coefficient_ok =
        std::fabs(r.outcome.fit.coefficient - c.coefficient) <= coefficient_rel_tol * c.coefficient;
  }
  return r;
}

// ---------------------------------------------------------------- conjecture

struct ConjectureReport {
  ScanReport scan;  // violations: points on nu >= 0 rows with s >= 1/3
  double sup_nonnegative = -std::numeric_limits<double>::infinity();
  EvalPoint sup_nonnegative_at;
  double sup_all = -std::numeric_limits<double>::infinity();
  EvalPoint sup_all_at;
  std::size_t negative_order_points = 0;
  std::size_t uncovered_points = 0;  // orders below -1 lie outside the oracle contract
  double margin_third() const { return 1.0 / 3.0 - sup_nonnegative; }
  double margin_fifth() const { return 0.2 - sup_all; }
};

// s = 1/(4P^2) - x^2 - nu^2; a bound P >= 1/(2 sqrt(x^2 + nu^2 + b)) holds
// exactly where s <= b.
inline double conjecture_excess(double product_value, const EvalPoint& p) {
  return 0.25 / (product_value * product_value) - p.x * p.x - p.nu * p.nu;
}

inline ConjectureReport conjecture_scan(const OracleTable& table) {
  ConjectureReport r;
  r.scan.claim_id = "conjecture-excess";
  for (const OracleSample& s : table.samples) {
    if (s.point.nu < -1.0) {
      ++r.uncovered_points;
      continue;
    }
    const std::optional<Measured> pm = measure(s, BoundTarget::product);
    if (!pm) {
      ++r.scan.oracle_failures;
      continue;
    }
    const double excess = conjecture_excess(pm->value, s.point);
    ++r.scan.points_checked;
    if (s.point.nu < 0.0)
      ++r.negative_order_points;
    if (excess > r.sup_all) {
      r.sup_all = excess;
      r.sup_all_at = s.point;
    }
    if (s.point.nu >= 0.0) {
      const double margin = 1.0 / 3.0 - excess;
      r.scan.worst_margin = std::min(r.scan.worst_margin, margin);
      if (excess > r.sup_nonnegative) {
        r.sup_nonnegative = excess;
        r.sup_nonnegative_at = s.point;
      }
      if (margin <= 0.0)
        r.scan.violations.push_back({s.point.nu, s.point.x, margin});
    }
  }
  return r;
}

// ---------------------------------------------------------------- CSV

inline std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline constexpr std::string_view report_csv_header = "claim_id,nu,x,bound,oracle,margin\n";

inline void write_report_csv(std::ostream& os, const ScanReport& r, bool header = true) {
  if (header)
    os << report_csv_header;
  for (const PointRecord& p : r.records)
    os << r.claim_id << ',' << format_number(p.nu) << ',' << format_number(p.x) << ','
       << format_number(p.bound) << ',' << format_number(p.oracle) << ','
       << format_number(p.margin) << '\n';
}

} // namespace ikratio
