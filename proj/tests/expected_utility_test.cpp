#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "support.hpp"

using namespace maud;
using namespace testing_support;

namespace {

// Beta(p, q) sampler from two gammas, used as an independent Monte Carlo oracle.
double sample_beta(std::mt19937_64& rng, double p, double q) {
  std::gamma_distribution<double> gp(p, 1.0), gq(q, 1.0);
  const double a = gp(rng), b = gq(rng);
  return a / (a + b);
}

}  // namespace

TEST(ExpectedUtility, HighPrecisionOracles) {
  auto u = make_exponential_utility(unit_attribute(), 1.0);
  EXPECT_NEAR(expected_utility_quadrature(u, {0.0, 1.0, 2.0, 3.0}), 0.5005791190289118875, 1e-12);
  EXPECT_NEAR(expected_utility_series(u, {0.0, 1.0, 2.0, 3.0}), 0.5005791190289118875, 1e-12);
  // Uniform: E[1 - e^-y] = e^-1, normalised by 1 - e^-1.
  const double uniform = std::exp(-1.0) / -std::expm1(-1.0);
  EXPECT_NEAR(expected_utility_quadrature(u, {0.0, 1.0, 1.0, 1.0}), uniform, 1e-12);
  EXPECT_NEAR(expected_utility_series(u, {0.0, 1.0, 1.0, 1.0}), uniform, 1e-12);
}

TEST(ExpectedUtility, SeriesMatchesQuadratureOnIntegerGrid) {
  AttributeSpec a{"a", "a", "", 0.0, 1.0, Direction::increasing_preferred};
  AttributeSpec d{"d", "d", "", 1.0, 0.0, Direction::decreasing_preferred};
  for (const auto& attr : {a, d})
    for (double c : {-2.0, -0.5, 0.5, 2.0})
      for (auto [lo, hi] : {std::pair{0.0, 1.0}, std::pair{0.2, 0.5}})
        for (int p = 1; p <= 9; ++p)
          for (int q = 1; q <= 9; ++q) {
            auto u = make_exponential_utility(attr, c);
            BetaSpec s{lo, hi, double(p), double(q)};
            EXPECT_NEAR(expected_utility_series(u, s), expected_utility_quadrature(u, s), 1e-12)
                << "c=" << c << " p=" << p << " q=" << q;
          }
}

TEST(ExpectedUtility, SeriesRefusesUnsupportedInputs) {
  auto u = make_exponential_utility(unit_attribute(), 1.0);
  EXPECT_EQ(error_code([&] { expected_utility_series(u, {0.0, 1.0, 2.5, 3.0}); }), Errc::unsupported_shape);
  EXPECT_EQ(error_code([&] { expected_utility_series(u, {0.0, 1.0, 12.0, 3.0}); }), Errc::unsupported_shape);
  auto lin = make_exponential_utility(unit_attribute(), 0.0);
  EXPECT_EQ(error_code([&] { expected_utility_series(lin, {0.0, 1.0, 2.0, 3.0}); }), Errc::unsupported_shape);
}

TEST(ExpectedUtility, AgreesWithMonteCarlo) {
  std::mt19937_64 rng(2024);
  AttributeSpec cost{"cost", "cost", "", 200.0, 20.0, Direction::decreasing_preferred};
  for (double c : {-1.5, 0.8, 3.0}) {
    auto u = make_exponential_utility(cost, c);
    BetaSpec s{40.0, 120.0, 2.3, 4.1};
    double sum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) sum += u(s.lower + s.range() * sample_beta(rng, s.p, s.q));
    EXPECT_NEAR(expected_utility(u, AttributeEstimate{"cost", s}), sum / n, 3e-3);
  }
}

TEST(ExpectedUtility, JensenOrdering) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> shape(1.0, 7.0), cd(0.1, 5.0);
  for (int i = 0; i < 100; ++i) {
    auto attr = random_attribute(rng, "a");
    const double w = attr.range_max() - attr.range_min();
    BetaSpec s{attr.range_min() + 0.1 * w, attr.range_min() + 0.8 * w, shape(rng), shape(rng)};
    const double c = cd(rng);
    auto concave = make_exponential_utility(attr, c);
    auto convex = make_exponential_utility(attr, -c);
    auto linear = make_exponential_utility(attr, 0.0);
    const double mu = beta_mean(s);
    EXPECT_LE(expected_utility(concave, {"a", s}), concave(mu) + 1e-10);
    EXPECT_GE(expected_utility(convex, {"a", s}), convex(mu) - 1e-10);
    EXPECT_NEAR(expected_utility(linear, {"a", s}), linear(mu), 1e-10);
  }
}

TEST(ExpectedUtility, ShiftingProbabilityMassUpRaisesUtility) {
  auto u = make_exponential_utility(unit_attribute(), 1.5);
  BetaSpec lo{0.1, 0.6, 2.0, 2.0}, hi{0.3, 0.8, 2.0, 2.0};
  EXPECT_GT(expected_utility(u, {"x", hi}), expected_utility(u, {"x", lo}));
  // Stochastic dominance by shape: larger p with q fixed moves mass up.
  EXPECT_GT(expected_utility(u, {"x", BetaSpec{0.1, 0.6, 4.0, 2.0}}), expected_utility(u, {"x", lo}));
}

TEST(ExpectedUtility, PointEstimateIsPlainUtility) {
  auto u = make_exponential_utility(unit_attribute(), 2.0);
  EXPECT_DOUBLE_EQ(expected_utility(u, {"x", 0.3}), u(0.3));
}

TEST(ExpectedUtility, SupportOutsideRangeRejected) {
  auto u = make_exponential_utility(unit_attribute(), 2.0);
  EXPECT_EQ(error_code([&] { expected_utility(u, {"x", BetaSpec{0.5, 1.5, 2.0, 2.0}}); }), Errc::estimate_range);
}
