#include <cmath>

#include <gtest/gtest.h>

#include "ikratio/oracle.hpp"
#include "test_grids.hpp"

using namespace ikratio;

namespace {

double rel_diff(double a, double b) { return std::fabs(a - b) / std::fabs(b); }

} // namespace

TEST(IRatio, HalfOrderIsHyperbolicCotangent) {
  EXPECT_NEAR(i_ratio({0.5, 1.0}).value, 1.3130352854993312, 1e-12);
  for (double x : testing_grid::log_points(0.1, 50.0, 40))
    EXPECT_LE(rel_diff(i_ratio({0.5, x}).value, 1.0 / std::tanh(x)), 1e-13) << x;
}

TEST(IRatio, SmallArgumentFollowsMaclaurinSeries) {
  EXPECT_NEAR(i_ratio({1.0, 1e-3}).value, 2000.00025, 1e-6);
}

TEST(IRatio, LargeArgumentFollowsAsymptoticSeries) {
  const double x = 100.0;
  const double series = 1 + 0.5 / x + 0.75 / (2 * x * x);
  EXPECT_LE(rel_diff(i_ratio({1.0, x}).value, series), 1e-4);
}

TEST(IRatio, ResultIsPositiveWithNonNegativeError) {
  for (double nu : testing_grid::orders(0.0, 20.0, 1.25))
    for (double x : testing_grid::log_points(1e-3, 1e3, 13)) {
      const OracleResult r = i_ratio({nu, x});
      EXPECT_GT(r.value, 0.0);
      EXPECT_GE(r.est_error, 0.0);
      EXPECT_TRUE(std::isfinite(r.value));
      EXPECT_EQ(r.method, OracleMethod::continued_fraction);
    }
}

TEST(IRatio, NegativeOrdersUseTheRecurrence) {
  // I_{-3/2}/I_{-1/2} = tanh x - 1/x
  for (double x : {0.2, 1.0, 7.0}) {
    const OracleResult r = i_ratio({-0.5, x});
    EXPECT_EQ(r.method, OracleMethod::reflection);
    EXPECT_LE(rel_diff(r.value, std::tanh(x) - 1.0 / x), 1e-12) << x;
  }
  // I_{-2}/I_{-1} = I_2/I_1
  EXPECT_DOUBLE_EQ(i_ratio({-1.0, 2.0}).value, 1.0 / i_ratio({2.0, 2.0}).value);
}

TEST(IRatio, ContractViolationsAndNonConvergence) {
  EXPECT_THROW(i_ratio({-1.5, 1.0}), domain_error);
  EXPECT_THROW(i_ratio({1.0, 0.0}), domain_error);
  EXPECT_THROW(i_ratio({1.0, -3.0}), domain_error);
  OracleOptions opt;
  opt.cf_max_iter = 3;
  EXPECT_THROW(i_ratio({1.0, 500.0}, opt), evaluation_error);
}

TEST(KRatio, HalfIntegerValuesAreExact) {
  for (double x : {0.01, 1.0, 2.0, 3.0, 1e3})
    EXPECT_EQ(k_ratio({0.5, x}).value, -1.0) << x;
  EXPECT_DOUBLE_EQ(k_ratio({1.5, 1.0}).value, -0.5);
  EXPECT_EQ(k_ratio({1.5, 1.0}).method, OracleMethod::half_integer_recurrence);
  // K_{-3/2}/K_{-1/2} = K_{3/2}/K_{1/2} = 1 + 1/x
  EXPECT_DOUBLE_EQ(k_ratio({-0.5, 4.0}).value, -1.25);
}

TEST(KRatio, LargeArgumentFollowsAsymptoticSeries) {
  const double x = 100.0;
  const double series = -(1 - 0.5 / x + 0.75 / (2 * x * x));
  const OracleResult r = k_ratio({1.0, x});
  EXPECT_EQ(r.method, OracleMethod::backward_riccati);
  EXPECT_LE(rel_diff(r.value, series), 1e-4);
}

TEST(KRatio, BackwardIntegrationReproducesHalfIntegerRecurrence) {
  const OracleOptions opt;
  for (int k = 0; k <= 9; ++k) {
    const double nu = k + 0.5;
    for (double x : testing_grid::log_points(0.1, 50.0, 25)) {
      const double exact = detail::k_ratio_half_integer(nu, x).value;
      const OracleResult ode = detail::k_ratio_riccati(nu, x, opt);
      EXPECT_LE(rel_diff(ode.value, exact), 1e-10) << nu << ' ' << x;
      EXPECT_LE(std::fabs(ode.value - exact), ode.est_error) << nu << ' ' << x;
    }
  }
}

TEST(KRatio, ErrorEstimateCoversTightenedRerun) {
  OracleOptions tight;
  tight.ode_tol = 1e-13;
  for (double nu : {0.0, 0.3, 1.0, 2.75, 8.2, 19.0})
    for (double x : {1e-3, 0.05, 1.0, 30.0, 900.0}) {
      const OracleResult base = k_ratio({nu, x});
      const OracleResult fine = k_ratio({nu, x}, tight);
      EXPECT_LE(std::fabs(base.value - fine.value), base.est_error + fine.est_error) << nu << ' ' << x;
    }
}

TEST(KRatio, NegativeForNonNegativeOrders) {
  for (double nu : testing_grid::orders(0.0, 20.0, 0.75))
    for (double x : testing_grid::log_points(1e-3, 1e3, 9)) {
      const OracleResult r = k_ratio({nu, x});
      EXPECT_LT(r.value, 0.0);
      EXPECT_GE(r.est_error, 0.0);
    }
}

TEST(KRatio, ReflectionAcrossHalfOrder) {
  // K_{-mu} = K_mu, so Phi1(nu) Phi1(1 - nu) = 1
  for (double nu : {-0.75, -0.3, -1.0})
    for (double x : {0.1, 2.0, 20.0})
      EXPECT_NEAR(k_ratio({nu, x}).value * k_ratio({1.0 - nu, x}).value, 1.0, 1e-14);
}

TEST(KRatio, RejectsNonPositiveArgument) {
  EXPECT_THROW(k_ratio({1.0, 0.0}), domain_error);
  EXPECT_THROW(k_ratio({std::nan(""), 1.0}), domain_error);
}

// Independent cross-check against the C++17 special functions.
TEST(Oracle, AgreesWithStandardLibraryBesselFunctions) {
  for (double nu : {0.0, 0.3, 1.0, 2.5, 4.7, 10.0})
    for (double x : {0.1, 0.9, 3.0, 12.0, 40.0}) {
      const double i_ref = std::cyl_bessel_i(std::fabs(nu - 1.0), x) / std::cyl_bessel_i(nu, x);
      const double k_ref = -std::cyl_bessel_k(std::fabs(nu - 1.0), x) / std::cyl_bessel_k(nu, x);
      if (nu >= 1.0) {
        EXPECT_LE(rel_diff(i_ratio({nu, x}).value, i_ref), 1e-9) << nu << ' ' << x;
      }
      EXPECT_LE(rel_diff(k_ratio({nu, x}).value, k_ref), 1e-9) << nu << ' ' << x;
    }
}

TEST(Psi, FrozenValues) {
  EXPECT_DOUBLE_EQ(psi(RatioKind::second_kind, {0.5, 3.0}), -3.5);
  EXPECT_NEAR(psi(RatioKind::first_kind, {0.5, 1.0}), 0.8130352855, 1e-10);
  const double x = 1e-3;
  EXPECT_NEAR(psi(RatioKind::first_kind, {2.0, x}) - 2.0, x * x / 6.0, 1e-12);
}

TEST(DoubleRatio, FrozenValues) {
  EXPECT_NEAR(double_ratio(RatioKind::first_kind, {1.0, 1e-3}), 0.5, 1e-6);
  EXPECT_NEAR(double_ratio(RatioKind::second_kind, {0.5, 2.0}), 1.5, 1e-15);
  EXPECT_NEAR(double_ratio(RatioKind::first_kind, {0.0, 100.0}), 0.99, 1e-4);
}

TEST(DoubleRatio, MatchesPsiDefinition) {
  for (auto kind : {RatioKind::first_kind, RatioKind::second_kind})
    for (double nu : {0.5, 1.0, 3.3})
      for (double x : {0.5, 2.0, 10.0}) {
        const double s = psi(kind, {nu, x});
        const double def = (s * s - nu * nu) / (x * x);
        EXPECT_LE(rel_diff(double_ratio(kind, {nu, x}), def), 1e-9) << nu << ' ' << x;
      }
}

TEST(Product, FrozenValues) {
  EXPECT_NEAR(product({0.5, 1.0}).value, (1 - std::exp(-2.0)) / 2, 1e-15);
  const double x = 100.0;
  EXPECT_LE(rel_diff(product({1.0, x}).value, 1 / (2 * x) - 0.75 / (4 * x * x * x)), 1e-5);
  const double nu = 20.0;
  EXPECT_LE(rel_diff(product({nu, 1.0}).value, 1 / (2 * nu) - 1 / (4 * nu * nu * nu)), 1e-6);
}

TEST(Product, WronskianIdentity) {
  for (double nu : testing_grid::orders(-1.0, 20.0, 1.5))
    for (double x : testing_grid::log_points(1e-3, 1e3, 11)) {
      const EvalPoint p{nu, x};
      const OracleResult pr = product(p);
      const double phi0 = i_ratio(p).value;
      const double phi1 = k_ratio(p).value;
      EXPECT_NEAR(x * pr.value * (phi0 - phi1), 1.0, 8e-16 + pr.est_error / pr.value) << nu << ' ' << x;
    }
}

// Central differences of the oracle satisfy Phi' = 1 + ((2nu - 1)/x) Phi - Phi^2.
TEST(Oracle, SatisfiesTheRiccatiEquation) {
  for (auto kind : {RatioKind::first_kind, RatioKind::second_kind})
    for (double nu : {0.0, 0.5, 1.0, 2.3, 7.0})
      for (double x : testing_grid::log_points(0.05, 50.0, 15)) {
        const double h = 1e-4 * x;
        const double f = ratio(kind, {nu, x}).value;
        const double d = (ratio(kind, {nu, x + h}).value - ratio(kind, {nu, x - h}).value) / (2 * h);
        const double c = (2 * nu - 1) / x;
        const double rhs = 1 + c * f - f * f;
        const double scale = 1 + std::fabs(c * f) + f * f;
        EXPECT_LE(std::fabs(d - rhs) / scale, 1e-6) << nu << ' ' << x;
      }
}
