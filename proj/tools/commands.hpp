#pragma once

// Subcommands of the ikratio tool. `run` parses arguments, applies the
// configuration precedence (flags > config file > defaults) and returns the
// process exit code:
//   0 success, 1 claim violation, 2 usage error, 3 oracle failures above 1%.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ikratio/expansions.hpp"
#include "ikratio/nullclines.hpp"
#include "ikratio/oracle.hpp"
#include "ikratio/riccati_lab.hpp"
#include "ikratio/verify.hpp"
#include "run_config.hpp"

namespace ikratio::cli {

enum ExitCode : int { exit_ok = 0, exit_violation = 1, exit_usage = 2, exit_oracle = 3 };

inline constexpr double oracle_failure_limit = 0.01;

namespace detail {

// Opens --out, or falls back to `fallback` when no path was given.
class OutputSink {
public:
  OutputSink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_)
        throw usage_error("cannot write '" + path + "'");
      stream_ = &file_;
    }
  }
  std::ostream& get() { return *stream_; }

private:
  std::ofstream file_;
  std::ostream* stream_;
};

inline std::string cell(const std::optional<Measured>& m) {
  return m ? format_number(m->value) : std::string("nan");
}

inline bool failure_rate_exceeded(const OracleTable& t, std::ostream& err) {
  if (t.samples.empty())
    return false;
  const std::size_t failed = failed_points(t.samples);
  const double rate = static_cast<double>(failed) / static_cast<double>(t.samples.size());
  if (rate > oracle_failure_limit) {
    err << "oracle failures at " << failed << " of " << t.samples.size() << " points\n";
    return true;
  }
  return false;
}

inline std::string_view class_name(SolutionClass c) {
  switch (c) {
  case SolutionClass::monotone_increasing:
    return "monotone-increasing";
  case SolutionClass::monotone_decreasing:
    return "monotone-decreasing";
  case SolutionClass::has_interior_extremum:
    return "has-interior-extremum";
  case SolutionClass::blow_up:
    return "blow-up";
  }
  return "?";
}

inline std::string_view termination_name(Termination t) {
  switch (t) {
  case Termination::reached_end:
    return "reached-end";
  case Termination::blow_up:
    return "blow-up";
  case Termination::step_failure:
    return "step-failure";
  }
  return "?";
}

} // namespace detail

inline int cmd_tabulate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const Grid grid = resolve_grid(cfg);
  const OracleTable table = build_oracle_table(grid, {}, cfg.threads);
  detail::OutputSink sink(cfg.out, out);
  std::ostream& os = sink.get();
  os << "nu,x,i_ratio,k_ratio,product,U_I,U_K,lambda_I,lambda_K,lambda_O,w_I,w_K,w_O,"
        "product_upper,product_lower_trig\n";
  for (const OracleSample& s : table.samples) {
    const EvalPoint& p = s.point;
    const CubicRoots r = cubic_roots(p);
    const WValues w = w_values(r, p);
    const ProductBounds pb = product_bounds(r, p);
    os << format_number(p.nu) << ',' << format_number(p.x) << ','
       << detail::cell(measure(s, BoundTarget::i_ratio)) << ','
       << detail::cell(measure(s, BoundTarget::k_ratio)) << ','
       << detail::cell(measure(s, BoundTarget::product)) << ','
       << format_number(trig_bound_I(r, p).value) << ',' << format_number(trig_bound_K(r, p).value)
       << ',' << format_number(r.lambda_I) << ',' << format_number(r.lambda_K) << ','
       << format_number(r.lambda_O) << ',' << format_number(w.w_I) << ',' << format_number(w.w_K)
       << ',' << format_number(w.w_O) << ',' << format_number(pb.upper.value) << ','
       << format_number(pb.lower_trig.value) << '\n';
  }
  return detail::failure_rate_exceeded(table, err) ? exit_oracle : exit_ok;
}

inline int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const Grid grid = resolve_grid(cfg);
  ScanOptions opt;
  opt.tol = cfg.tol;
  opt.threads = cfg.threads;
  opt.keep_records = !cfg.out.empty();
  opt.corrupt_claim = cfg.corrupt_claim;
  if (!cfg.corrupt_claim.empty() && find_claim(cfg.corrupt_claim) == nullptr)
    throw usage_error("unknown claim '" + cfg.corrupt_claim + "'");

  const OracleTable table = build_oracle_table(grid, opt.oracle, cfg.threads);
  const std::vector<ScanReport> bounds = scan_claims(all_claims(), table, opt);

  std::vector<std::string> failing;
  auto summarize = [&](const ScanReport& r, bool gating) {
    std::string status = r.passed() ? "PASS" : (gating ? "FAIL" : "NOTE");
    if (r.points_checked == 0)
      status = "WARN";
    out << status << ' ' << r.claim_id << " points=" << r.points_checked
        << " oracle_failures=" << r.oracle_failures << " violations=" << r.violations.size()
        << " worst_margin=" << format_number(r.worst_margin);
    if (r.points_checked == 0)
      out << " (0 points)";
    if (!gating)
      out << " (not gating)";
    out << '\n';
    if (gating && !r.passed())
      failing.push_back(r.claim_id);
  };

  const auto& claims = claim_catalog();
  for (std::size_t k = 0; k < bounds.size(); ++k)
    summarize(bounds[k], claims[k].gating);
  for (const MonotoneClaim& m : monotone_catalog())
    summarize(scan_monotone(m, table, cfg.mono_tol, cfg.threads), true);

  if (!cfg.out.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(cfg.out, ec);
    if (ec)
      throw usage_error("cannot create directory '" + cfg.out + "'");
    for (const ScanReport& r : bounds) {
      const auto path = std::filesystem::path(cfg.out) / (r.claim_id + ".csv");
      std::ofstream f(path, std::ios::binary | std::ios::trunc);
      if (!f)
        throw usage_error("cannot write '" + path.string() + "'");
      write_report_csv(f, r);
    }
  }

  if (detail::failure_rate_exceeded(table, err))
    return exit_oracle;
  if (!failing.empty()) {
    out << "violated claims:";
    for (const std::string& id : failing)
      out << ' ' << id;
    out << '\n';
    return exit_violation;
  }
  out << "all claims hold\n";
  return exit_ok;
}

inline int cmd_sharpness(const RunConfig&, std::ostream& out, std::ostream&) {
  bool all_ok = true;
  for (const SharpnessCase& c : sharpness_catalog()) {
    const SharpnessResult r = run_sharpness(c);
    out << c.id << ": ";
    if (!r.outcome.ok) {
      out << "unfittable (" << r.outcome.reason << ")\n";
      continue;
    }
    out << "exponent " << format_number(r.outcome.fit.exponent) << " (expected "
        << format_number(c.exponent) << "), coefficient "
        << format_number(r.outcome.fit.coefficient) << " (expected "
        << format_number(c.coefficient) << ") " << (r.passed() ? "PASS" : "FAIL") << '\n';
    all_ok = all_ok && r.passed();
  }
  return all_ok ? exit_ok : exit_violation;
}

inline int cmd_conjecture(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const Grid grid = resolve_grid(cfg);
  const OracleTable table = build_oracle_table(grid, {}, cfg.threads);
  const ConjectureReport r = conjecture_scan(table);
  if (!cfg.out.empty()) {
    detail::OutputSink sink(cfg.out, out);
    std::ostream& os = sink.get();
    os << "nu,x,s\n";
    for (const OracleSample& s : table.samples)
      if (const auto pm = measure(s, BoundTarget::product))
        os << format_number(s.point.nu) << ',' << format_number(s.point.x) << ','
           << format_number(conjecture_excess(pm->value, s.point)) << '\n';
  }
  out << "points " << r.scan.points_checked << " (nu < 0: " << r.negative_order_points
      << "), oracle failures " << r.scan.oracle_failures << '\n';
  if (r.scan.points_checked == 0) {
    out << "no points scanned\n";
    return detail::failure_rate_exceeded(table, err) ? exit_oracle : exit_ok;
  }
  if (r.sup_nonnegative > -std::numeric_limits<double>::infinity())
    out << "sup s (nu >= 0) = " << format_number(r.sup_nonnegative) << " at nu = "
        << format_number(r.sup_nonnegative_at.nu) << ", x = "
        << format_number(r.sup_nonnegative_at.x) << "; margin to 1/3 = "
        << format_number(r.margin_third()) << '\n';
  out << "sup s (all rows) = " << format_number(r.sup_all) << " at nu = "
      << format_number(r.sup_all_at.nu) << ", x = " << format_number(r.sup_all_at.x)
      << "; margin to 1/5 = " << format_number(r.margin_fifth()) << " (reported only)\n";
  if (detail::failure_rate_exceeded(table, err))
    return exit_oracle;
  if (!r.scan.passed()) {
    out << "proved 1/3 level exceeded at " << r.scan.violations.size() << " points\n";
    return exit_violation;
  }
  return exit_ok;
}

inline int cmd_explore(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.mixed_samples < 0)
    throw usage_error("mixed-samples must be >= 0");
  if (cfg.mixed_samples > 0) {
    // initial values drawn strictly between the two oracle solutions
    const EvalPoint p{cfg.nu.value_or(2.0), cfg.x0};
    const double lo = k_ratio(p).value;
    const double hi = i_ratio(p).value;
    const double scale = std::pow(cfg.x0, -cfg.a);
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> u(0.01, 0.99);
    out << "y0,class,termination,extrema\n";
    for (long i = 0; i < cfg.mixed_samples; ++i) {
      const double y0 = scale * (lo + u(rng) * (hi - lo));
      const Trajectory t = solve_riccati(cfg.a, p.nu, cfg.x0, y0, cfg.x_lo, cfg.x_hi);
      out << format_number(y0) << ',' << detail::class_name(classify(t)) << ','
          << detail::termination_name(t.termination) << ',' << t.extrema.size() << '\n';
    }
    return exit_ok;
  }
  const double nu = cfg.nu.value_or(0.5);
  const Trajectory t = solve_riccati(cfg.a, nu, cfg.x0, cfg.y0, cfg.x_lo, cfg.x_hi);
  detail::OutputSink sink(cfg.out, out);
  std::ostream& os = sink.get();
  os << "x,y\n";
  for (const Sample& s : t.samples)
    os << format_number(s.x) << ',' << format_number(s.y) << '\n';
  std::ostream& summary = cfg.out.empty() ? err : out;
  summary << "class: " << detail::class_name(classify(t)) << '\n'
          << "termination: " << detail::termination_name(t.termination) << '\n';
  if (t.termination == Termination::blow_up)
    summary << "blow-up at x = " << format_number(t.blow_up_x) << '\n';
  for (const TrajectoryExtremum& e : t.extrema)
    summary << (e.kind == ExtremumKind::max ? "max" : "min") << " at x = " << format_number(e.x)
            << ", y = " << format_number(e.y) << '\n';
  return exit_ok;
}

inline int dispatch(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  switch (cfg.command) {
  case Command::tabulate:
    return cmd_tabulate(cfg, out, err);
  case Command::verify:
    return cmd_verify(cfg, out, err);
  case Command::sharpness:
    return cmd_sharpness(cfg, out, err);
  case Command::conjecture:
    return cmd_conjecture(cfg, out, err);
  case Command::explore:
    return cmd_explore(cfg, out, err);
  }
  return exit_usage;
}

namespace detail {

// Raw flag values; only flags given on the command line override the
// configuration file.
struct FlagValues {
  std::optional<double> nu_min, nu_max, nu_step, x_min, x_max, nu, x, tol, mono_tol;
  std::optional<long> x_points;
  std::optional<std::string> out, config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<double> a, x0, y0, x_lo, x_hi;
  std::optional<long> mixed_samples;
  std::optional<std::string> corrupt_claim;
};

inline void add_grid_flags(CLI::App& sub, FlagValues& v) {
  sub.add_option("--nu-min", v.nu_min, "smallest order of the grid");
  sub.add_option("--nu-max", v.nu_max, "largest order of the grid");
  sub.add_option("--nu-step", v.nu_step, "order spacing");
  sub.add_option("--x-min", v.x_min, "smallest argument");
  sub.add_option("--x-max", v.x_max, "largest argument");
  sub.add_option("--x-points", v.x_points, "number of log-spaced arguments");
  sub.add_option("--nu", v.nu, "single order (replaces the order axis)");
  sub.add_option("--x", v.x, "single argument (replaces the argument axis)");
}

inline void add_common_flags(CLI::App& sub, FlagValues& v) {
  sub.add_option("--tol", v.tol, "relative slack tolerance for bound claims");
  sub.add_option("--out", v.out, "output path");
  sub.add_option("--config", v.config, "flat key = value configuration file");
  sub.add_option("--seed", v.seed, "seed for randomized sampling");
  sub.add_option("--threads", v.threads, "worker threads (0: all cores)");
}

template <class T>
void override_with(T& target, const std::optional<T>& flag) {
  if (flag)
    target = *flag;
}

inline void apply_flags(RunConfig& cfg, const FlagValues& v) {
  override_with(cfg.nu_min, v.nu_min);
  override_with(cfg.nu_max, v.nu_max);
  override_with(cfg.nu_step, v.nu_step);
  override_with(cfg.x_min, v.x_min);
  override_with(cfg.x_max, v.x_max);
  override_with(cfg.x_points, v.x_points);
  if (v.nu)
    cfg.nu = v.nu;
  if (v.x)
    cfg.x = v.x;
  override_with(cfg.tol, v.tol);
  override_with(cfg.mono_tol, v.mono_tol);
  override_with(cfg.out, v.out);
  override_with(cfg.seed, v.seed);
  override_with(cfg.threads, v.threads);
  override_with(cfg.a, v.a);
  override_with(cfg.x0, v.x0);
  override_with(cfg.y0, v.y0);
  override_with(cfg.x_lo, v.x_lo);
  override_with(cfg.x_hi, v.x_hi);
  override_with(cfg.mixed_samples, v.mixed_samples);
  override_with(cfg.corrupt_claim, v.corrupt_claim);
}

} // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bounds, nullclines and asymptotics for ratios of modified Bessel functions",
               "ikratio"};
  app.require_subcommand(1);
  detail::FlagValues v;

  auto* tab = app.add_subcommand("tabulate", "tabulate oracles, bounds and nullclines as CSV");
  auto* ver = app.add_subcommand("verify", "scan every registered claim over a grid");
  auto* sha = app.add_subcommand("sharpness", "fit the error orders of the trigonometric bounds");
  auto* con = app.add_subcommand("conjecture", "scan s = 1/(4P^2) - x^2 - nu^2");
  auto* exp = app.add_subcommand("explore", "integrate and classify one Riccati trajectory");

  for (CLI::App* sub : {tab, ver, con, exp}) {
    detail::add_grid_flags(*sub, v);
    detail::add_common_flags(*sub, v);
  }
  detail::add_common_flags(*sha, v);
  ver->add_option("--mono-tol", v.mono_tol, "relative tolerance for monotonicity claims");
  ver->add_option("--corrupt-claim", v.corrupt_claim)->group("");
  exp->add_option("--a", v.a, "exponent a of the generalized equation");
  exp->add_option("--x0", v.x0, "initial abscissa");
  exp->add_option("--y0", v.y0, "initial value");
  exp->add_option("--x-lo", v.x_lo, "left end of the window");
  exp->add_option("--x-hi", v.x_hi, "right end of the window");
  exp->add_option("--mixed-samples", v.mixed_samples,
                  "classify this many random initial values between the oracle solutions");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err) == 0 ? exit_ok : exit_usage;
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err) == 0 ? exit_ok : exit_usage;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return exit_usage;
  }

  try {
    RunConfig cfg;
    if (v.config)
      apply_config_file(cfg, *v.config);
    for (CLI::App* sub : {tab, ver, sha, con, exp})
      if (sub->parsed())
        cfg.command = parse_command(sub->get_name());
    detail::apply_flags(cfg, v);
    return dispatch(cfg, out, err);
  } catch (const usage_error& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const ikratio::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const ikratio::evaluation_error& e) {
    err << "oracle failure: " << e.what() << '\n';
    return exit_oracle;
  }
}

} // namespace ikratio::cli
