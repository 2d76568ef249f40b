#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "ikratio/verify.hpp"

using namespace ikratio;

namespace {

// A lighter grid for tests that scan many times; it keeps ±1/2, the
// integers and both ends of the argument range.
Grid small_grid() { return make_grid(-1.0, 20.0, 0.5, 1e-3, 1e3, 41); }

const OracleTable& small_table() {
  static const OracleTable table = build_oracle_table(small_grid());
  return table;
}

} // namespace

// ------------------------------------------------------------ grids

TEST(Grid, DefaultShape) {
  const Grid g = default_grid();
  EXPECT_EQ(g.nu_values.size(), 85u);
  EXPECT_EQ(g.x_values.size(), 121u);
  EXPECT_EQ(g.nu_values.front(), -1.0);
  EXPECT_EQ(g.nu_values.back(), 20.0);
  EXPECT_EQ(g.x_values.front(), 1e-3);
  EXPECT_EQ(g.x_values.back(), 1e3);
  EXPECT_TRUE(std::is_sorted(g.x_values.begin(), g.x_values.end()));
  EXPECT_TRUE(std::adjacent_find(g.x_values.begin(), g.x_values.end()) == g.x_values.end());
  for (double x : g.x_values)
    EXPECT_GT(x, 0.0);
  EXPECT_NE(std::find(g.nu_values.begin(), g.nu_values.end(), 0.5), g.nu_values.end());
  EXPECT_NE(std::find(g.nu_values.begin(), g.nu_values.end(), 1.0), g.nu_values.end());
}

TEST(Grid, IntegerExclusion) {
  const Grid g = without_integer_orders(default_grid());
  EXPECT_EQ(g.nu_values.size(), 85u - 22u);
  EXPECT_EQ(g.exclusions, "integer nu");
  for (double nu : g.nu_values)
    EXPECT_NE(nu, std::round(nu));
}

TEST(Grid, BuildersHandleEdgeCases) {
  EXPECT_TRUE(log_space(1.0, 2.0, 0).empty());
  EXPECT_EQ(log_space(3.0, 9.0, 1), std::vector<double>{3.0});
  EXPECT_THROW(log_space(0.0, 1.0, 5), domain_error);
  EXPECT_TRUE(linear_steps(2.0, 1.0, 0.5).empty());
  EXPECT_THROW(linear_steps(0.0, 1.0, 0.0), domain_error);
  EXPECT_EQ(linear_steps(0.0, 1.0, 0.1).size(), 11u);
}

// ------------------------------------------------------------ oracle table

TEST(OracleTable, OutOfContractOrdersAreNotFailures) {
  const OracleSample s = sample_oracles({-1.5, 1.0});
  EXPECT_FALSE(s.phi0.has_value());
  EXPECT_TRUE(s.phi1.has_value());
  EXPECT_EQ(s.failures, 0);
  EXPECT_FALSE(measure(s, BoundTarget::product).has_value());
  EXPECT_EQ(failed_points(small_table().samples), 0u);
}

TEST(OracleTable, MeasuredTargets) {
  const OracleSample s = sample_oracles({0.5, 2.0});
  EXPECT_NEAR(measure(s, BoundTarget::k_ratio)->value, -1.0, 1e-15);
  EXPECT_NEAR(measure(s, BoundTarget::k_ratio_magnitude)->value, 1.0, 1e-15);
  EXPECT_NEAR(measure(s, BoundTarget::psi_k)->value, -2.5, 1e-15);
  EXPECT_NEAR(measure(s, BoundTarget::double_ratio_k)->value, 1.5, 1e-15);
  EXPECT_NEAR(measure(s, BoundTarget::i_ratio)->value, 1.0 / std::tanh(2.0), 1e-14);
}

// ------------------------------------------------------------ bound claims

TEST(ClaimCatalog, CoversEveryBoundProducer) {
  std::set<std::string_view> registered;
  for (const BoundClaim& c : claim_catalog())
    registered.insert(c.producer);
  const std::set<std::string_view> producers(bound_producers.begin(), bound_producers.end());
  for (std::string_view p : producers)
    EXPECT_TRUE(registered.contains(p)) << "unregistered bound: " << p;
  for (std::string_view p : registered)
    EXPECT_TRUE(producers.contains(p)) << "claim names an unknown producer: " << p;
}

TEST(ClaimCatalog, IdsAreUniqueAndOnlyTheConjectureIsAdvisory) {
  std::set<std::string_view> ids;
  for (const BoundClaim& c : claim_catalog()) {
    EXPECT_TRUE(ids.insert(c.id).second) << c.id;
    EXPECT_EQ(c.gating, c.id != "product-lower-conjecture") << c.id;
  }
  EXPECT_NE(find_claim("trig-upper-I"), nullptr);
  EXPECT_EQ(find_claim("no-such-claim"), nullptr);
  EXPECT_THROW(scan_bound("no-such-claim", small_grid()), domain_error);
}

TEST(ScanBound, TrigUpperBoundHoldsOnDefaultGrid) {
  const ScanReport r = scan_bound("trig-upper-I", default_grid());
  EXPECT_TRUE(r.violations.empty());
  EXPECT_TRUE(r.passed());
  EXPECT_EQ(r.points_checked, 81u * 121u);
  EXPECT_EQ(r.oracle_failures, 0u);
  EXPECT_GT(r.worst_margin, -1e-12);
  EXPECT_FALSE(r.fitted.has_value());
}

TEST(ScanBound, ProductUpperBoundHoldsForHalfAndAbove) {
  const ScanReport r = scan_bound("product-upper", make_grid(0.5, 20.0, 0.25, 1e-3, 1e3, 121));
  EXPECT_TRUE(r.violations.empty());
  EXPECT_EQ(r.points_checked, 79u * 121u);
}

TEST(ScanBound, MarginAgainstClosedFormAtHalfOrder) {
  ScanOptions opt;
  opt.keep_records = true;
  Grid g = make_grid(0.5, 0.5, 1.0, 1e-2, 1e2, 17);
  const ScanReport r = scan_bound("trig-upper-I", g, opt);
  ASSERT_EQ(r.records.size(), 17u);
  for (const PointRecord& rec : r.records) {
    const double coth = 1.0 / std::tanh(rec.x);
    EXPECT_NEAR(rec.oracle, coth, 1e-13 * coth);
    EXPECT_NEAR(rec.margin, (rec.bound - coth) / coth, 1e-13);
    EXPECT_GE(rec.margin, 0.0);
  }
}

TEST(ScanBound, EveryClaimHoldsOnTheLightGrid) {
  for (const ScanReport& r : scan_claims(all_claims(), small_table()))
    EXPECT_TRUE(r.violations.empty()) << r.claim_id << " worst " << r.worst_margin;
}

TEST(ScanBound, CorruptedClaimIsDetected) {
  ScanOptions opt;
  opt.corrupt_claim = "trig-upper-K";
  const auto reports = scan_claims(all_claims(), small_table(), opt);
  for (const ScanReport& r : reports) {
    if (r.claim_id == "trig-upper-K")
      EXPECT_FALSE(r.violations.empty());
    else
      EXPECT_TRUE(r.violations.empty()) << r.claim_id;
  }
}

TEST(ScanBound, ReportsAreIndependentOfThreadCount) {
  ScanOptions one;
  one.threads = 1;
  one.keep_records = true;
  ScanOptions many = one;
  many.threads = 4;
  const OracleTable t1 = build_oracle_table(small_grid(), {}, 1);
  const OracleTable t4 = build_oracle_table(small_grid(), {}, 4);
  const auto a = scan_claims(all_claims(), t1, one);
  const auto b = scan_claims(all_claims(), t4, many);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    std::ostringstream sa;
    std::ostringstream sb;
    write_report_csv(sa, a[k]);
    write_report_csv(sb, b[k]);
    EXPECT_EQ(sa.str(), sb.str()) << a[k].claim_id;
    EXPECT_EQ(a[k].points_checked, b[k].points_checked);
    EXPECT_EQ(a[k].worst_margin, b[k].worst_margin);
  }
}

// Re-running with a tighter integrator tolerance leaves every margin
// unchanged to nine significant digits.
TEST(ScanBound, MarginsAreStableUnderTightenedOracle) {
  const Grid g = make_grid(-1.0, 20.0, 1.25, 1e-3, 1e3, 15);
  ScanOptions base;
  base.keep_records = true;
  ScanOptions tight = base;
  tight.oracle.ode_tol = 1e-13;
  const auto a = scan_claims(all_claims(), build_oracle_table(g, base.oracle), base);
  const auto b = scan_claims(all_claims(), build_oracle_table(g, tight.oracle), tight);
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_TRUE(b[k].violations.empty()) << b[k].claim_id;
    ASSERT_EQ(a[k].records.size(), b[k].records.size());
    for (std::size_t i = 0; i < a[k].records.size(); ++i)
      EXPECT_NEAR(a[k].records[i].margin, b[k].records[i].margin,
                  1e-9 * (1.0 + std::fabs(b[k].records[i].margin)))
          << a[k].claim_id;
  }
}

TEST(BoundMargin, SignConvention) {
  Bound up{2.0, BoundDirection::upper, BoundTarget::i_ratio, true, "", false};
  EXPECT_NEAR(bound_margin(up, 1.0), 1.0, 1e-15);
  EXPECT_LT(bound_margin(up, 3.0), 0.0);
  Bound low{-2.0, BoundDirection::lower, BoundTarget::k_ratio, true, "", false};
  EXPECT_NEAR(bound_margin(low, -1.0), 1.0, 1e-15);
  EXPECT_LT(bound_margin(low, -4.0), 0.0);
}

// ------------------------------------------------------------ monotonicity

TEST(ScanMonotone, NamedExamples) {
  const OracleTable& t = small_table();
  const ScanReport p = scan_monotone("P", Quantity::product, t, Trend::decreasing, 1e-9,
                                     [](double nu) { return nu == -1.0; });
  EXPECT_TRUE(p.violations.empty());
  EXPECT_EQ(p.points_checked, 40u);
  const ScanReport xp = scan_monotone("xP", Quantity::x_product, t, Trend::increasing, 1e-9,
                                      [](double nu) { return nu == 0.5; });
  EXPECT_TRUE(xp.violations.empty());
  EXPECT_EQ(xp.points_checked, 40u);
  const ScanReport wk = scan_monotone("w_K", Quantity::w_K, t, Trend::decreasing, 1e-9,
                                      [](double nu) { return nu == 2.0; });
  EXPECT_TRUE(wk.violations.empty());
  EXPECT_EQ(wk.points_checked, 40u);
}

TEST(ScanMonotone, WrongDirectionIsReported) {
  const ScanReport r = scan_monotone("P-up", Quantity::product, small_table(), Trend::increasing,
                                     1e-9, [](double nu) { return nu == 1.0; });
  EXPECT_EQ(r.violations.size(), 40u);
}

TEST(ScanMonotone, CatalogHoldsOnTheLightGrid) {
  for (const MonotoneClaim& c : monotone_catalog()) {
    const ScanReport r = scan_monotone(c, small_table(), 1e-9);
    EXPECT_TRUE(r.violations.empty()) << c.id;
    EXPECT_GT(r.points_checked, 0u) << c.id;
    EXPECT_EQ(r.oracle_failures, 0u) << c.id;
  }
}

TEST(Quantity, NamesRoundTrip) {
  for (const auto& [q, name] : quantity_names) {
    EXPECT_EQ(quantity_name(q), name);
    EXPECT_EQ(parse_quantity(name), q);
  }
  EXPECT_FALSE(parse_quantity("bogus").has_value());
}

// ------------------------------------------------------------ fits

TEST(FitErrorOrder, RecoversSyntheticPowerLaws) {
  std::vector<ErrorSample> large;
  for (double x : {25.0, 50.0, 100.0, 200.0})
    large.push_back({x, 0.25 / (x * x) * std::exp(3 / x), 0.0});
  const FitOutcome a = fit_error_order(large, Regime::large_x);
  ASSERT_TRUE(a.ok) << a.reason;
  EXPECT_NEAR(a.fit.exponent, -2.0, 1e-9);
  EXPECT_NEAR(a.fit.coefficient, 0.25, 1e-9);

  std::vector<ErrorSample> small;
  for (double x : {0.02, 0.04, 0.08, 0.16})
    small.push_back({x, std::pow(x, 4) / 192 * std::exp(-x * x), 0.0});
  const FitOutcome b = fit_error_order(small, Regime::small_x, {2});
  ASSERT_TRUE(b.ok) << b.reason;
  EXPECT_NEAR(b.fit.exponent, 4.0, 1e-9);
  EXPECT_NEAR(b.fit.coefficient, 1.0 / 192, 1e-12);

  const FitOutcome plain = fit_error_order(large, Regime::large_x, {0});
  ASSERT_TRUE(plain.ok);
  EXPECT_NEAR(plain.fit.exponent, -2.0, 0.15);
}

TEST(FitErrorOrder, RejectsUnfittableSamples) {
  EXPECT_FALSE(fit_error_order({{1, 1, 0}, {10, 0.1, 0}}, Regime::large_x).ok);
  EXPECT_FALSE(fit_error_order({{1, 1, 0}, {2, 0.5, 0}, {3, 0.3, 0}, {3.5, 0.2, 0}}, Regime::large_x).ok);
  const FitOutcome noisy =
      fit_error_order({{1, 1, 0}, {10, 1e-12, 1e-13}, {100, 1e-14, 0}}, Regime::large_x, {0});
  EXPECT_FALSE(noisy.ok);
  EXPECT_EQ(noisy.reason, "accuracy below 100x oracle error");
  EXPECT_FALSE(fit_error_order({{1, 1, 0}, {10, -1, 0}, {100, 1, 0}}, Regime::large_x).ok);
}

TEST(Sharpness, FrozenExamples) {
  const auto& cases = sharpness_catalog();
  ASSERT_EQ(cases.size(), 7u);
  for (const SharpnessCase& c : cases) {
    const SharpnessResult r = run_sharpness(c);
    ASSERT_TRUE(r.outcome.ok) << c.id << ": " << r.outcome.reason;
    EXPECT_TRUE(r.passed()) << c.id << " exponent " << r.outcome.fit.exponent << " coefficient "
                            << r.outcome.fit.coefficient;
  }
}

TEST(Sharpness, AccuracySamplesAreNonNegative) {
  for (Accuracy acc : {Accuracy::i_ratio_upper, Accuracy::k_ratio_upper, Accuracy::product_lower})
    for (double nu : {0.0, 1.0, 6.5})
      for (double x : {0.01, 1.0, 100.0}) {
        const ErrorSample s = accuracy_sample(acc, {nu, x});
        EXPECT_GE(s.eps, -s.eps_error - 1e-15) << nu << ' ' << x;
      }
}

// ------------------------------------------------------------ conjecture

TEST(Conjecture, HalfOrderRowMatchesClosedForm) {
  const OracleTable t = build_oracle_table(make_grid(0.5, 0.5, 1.0, 1e-3, 1e3, 61));
  for (const OracleSample& s : t.samples) {
    const double x = s.point.x;
    const double closed = x * x / std::pow(-std::expm1(-2 * x), 2) - x * x - 0.25;
    const double scanned = conjecture_excess(measure(s, BoundTarget::product)->value, s.point);
    EXPECT_NEAR(scanned, closed, 1e-9 * (1 + x * x)) << x;
    EXPECT_LT(scanned, 1.0 / 3.0);
  }
}

TEST(Conjecture, ProvedLevelHoldsOnNonNegativeRows) {
  const ConjectureReport r = conjecture_scan(small_table());
  EXPECT_TRUE(r.scan.violations.empty());
  EXPECT_LT(r.sup_nonnegative, 1.0 / 3.0 - 1e-6);
  EXPECT_GT(r.margin_third(), 1e-6);
  EXPECT_GE(r.sup_all, r.sup_nonnegative);
  EXPECT_EQ(r.uncovered_points, 0u);
  EXPECT_EQ(r.negative_order_points, 2u * 41u);
  EXPECT_EQ(r.scan.points_checked, 43u * 41u);
}

TEST(Conjecture, OrdersBelowMinusOneAreUncovered) {
  const ConjectureReport r = conjecture_scan(build_oracle_table(make_grid(-2.0, -1.5, 0.5, 1.0, 2.0, 3)));
  EXPECT_EQ(r.uncovered_points, 6u);
  EXPECT_EQ(r.scan.points_checked, 0u);
}

// ------------------------------------------------------------ CSV

TEST(Csv, NumberFormatting) {
  EXPECT_EQ(format_number(0.5), "0.5");
  EXPECT_EQ(format_number(0.1), "0.10000000000000001");
  EXPECT_EQ(format_number(-1.0), "-1");
  EXPECT_EQ(format_number(1e-300), "1e-300");
  EXPECT_EQ(format_number(1.0 / 3.0), "0.33333333333333331");
}

TEST(Csv, ReportLayout) {
  ScanReport r;
  r.claim_id = "demo";
  r.records = {{0.5, 2.0, 1.25, 1.0, 0.25}};
  std::ostringstream os;
  write_report_csv(os, r);
  EXPECT_EQ(os.str(), "claim_id,nu,x,bound,oracle,margin\ndemo,0.5,2,1.25,1,0.25\n");
  std::ostringstream bare;
  write_report_csv(bare, r, false);
  EXPECT_EQ(bare.str(), "demo,0.5,2,1.25,1,0.25\n");
}
