#include <random>

#include <gtest/gtest.h>

#include "support.hpp"

using namespace maud;
using namespace testing_support;

namespace {

Alternative alt_with(std::size_t index, std::vector<AttributeEstimate> est) {
  Alternative a;
  a.index = index;
  a.assignment = {{"s", "m" + std::to_string(index)}};
  a.estimates = std::move(est);
  return a;
}

UserProfile two_attribute_profile(double c0, double c1, double k0, double k1) {
  return make_profile({unit_attribute("a"), unit_attribute("b")}, {c0, c1}, {k0, k1});
}

Alternative find(const std::vector<Alternative>& alts, const std::string& f, const std::string& e,
                 const std::string& b) {
  for (const auto& a : alts)
    if (*a.material("fascia") == f && *a.material("energy_absorber") == e && *a.material("beam") == b) return a;
  throw std::runtime_error("alternative not enumerated");
}

}  // namespace

TEST(SumEstimates, PointsShiftsAndMoments) {
  auto pts = detail::sum_estimates("x", {{"x", 1.0}, {"x", 2.5}});
  EXPECT_DOUBLE_EQ(pts.point(), 3.5);

  auto shifted = detail::sum_estimates("x", {{"x", BetaSpec{1.0, 3.0, 2.0, 5.0}}, {"x", 4.0}});
  EXPECT_EQ(shifted.beta(), (BetaSpec{5.0, 7.0, 2.0, 5.0}));

  BetaSpec a{0.0, 10.0, 2.0, 3.0}, b{5.0, 9.0, 4.0, 2.0};
  auto sum = detail::sum_estimates("x", {{"x", a}, {"x", 1.0}, {"x", b}});
  EXPECT_DOUBLE_EQ(sum.beta().lower, 6.0);
  EXPECT_DOUBLE_EQ(sum.beta().upper, 20.0);
  EXPECT_NEAR(beta_mean(sum.beta()), beta_mean(a) + beta_mean(b) + 1.0, 1e-12);
  EXPECT_NEAR(beta_variance(sum.beta()), beta_variance(a) + beta_variance(b), 1e-12);
}

TEST(EstimateAttributes, ConditionalRowTakesPrecedence) {
  auto kb = bumper_kb();
  auto facts = truck_facts();
  auto fs = feasible_alternatives(kb, facts);
  auto tp = find(fs.alternatives, "thermoplastic", "none", "stamped_steel");
  // High production volume picks the cheaper thermoplastic fascia row.
  EXPECT_DOUBLE_EQ(tp.estimates[0].beta().lower, 12.0 + 3.0 + 30.0);
  facts.production_volume_thousands = 50;
  auto low = estimate_attributes(kb, facts, tp);
  EXPECT_DOUBLE_EQ(low[0].beta().lower, 14.0 + 3.0 + 30.0);
}

TEST(EstimateAttributes, RejectsExcludedAlternatives) {
  auto kb = bumper_kb();
  auto facts = truck_facts();
  Alternative bad;
  bad.assignment = {{"fascia", "none"}, {"energy_absorber", "foam"}, {"beam", "stamped_steel"}};
  EXPECT_EQ(error_code([&] { estimate_attributes(kb, facts, bad); }), Errc::precondition);
  bad.assignment[1].material = "hydraulic";
  EXPECT_EQ(error_code([&] { estimate_attributes(kb, facts, bad); }), Errc::precondition);
}

TEST(Ranking, OrderedAndRanked) {
  auto res = evaluate_integrated(bumper_kb(), truck_facts(), fixture_profile("typical"));
  ASSERT_EQ(res.ranking.size(), 14u);
  EXPECT_TRUE(res.errors.empty());
  for (std::size_t i = 0; i < res.ranking.size(); ++i) {
    EXPECT_EQ(res.ranking[i].rank, i + 1);
    if (i > 0) {
      EXPECT_GE(res.ranking[i - 1].expected_utility, res.ranking[i].expected_utility);
    }
    EXPECT_GT(res.ranking[i].expected_utility, 0.0);
    EXPECT_LT(res.ranking[i].expected_utility, 1.0);
  }
  EXPECT_EQ(res.trace.size(), 4u);  // three restrictions and one configuration rule
}

TEST(Ranking, TiesBrokenByEnumerationOrder) {
  auto p = two_attribute_profile(1.0, -1.0, 0.4, 0.3);
  std::vector<Alternative> alts{alt_with(0, {{"a", 0.2}, {"b", 0.2}}), alt_with(1, {{"a", 0.6}, {"b", 0.5}}),
                                alt_with(2, {{"a", 0.6}, {"b", 0.5}}), alt_with(3, {{"a", 0.6}, {"b", 0.5}})};
  std::swap(alts[1], alts[3]);
  auto r = rank_alternatives(alts, p);
  EXPECT_EQ(r.ranking[0].alternative.index, 1u);
  EXPECT_EQ(r.ranking[1].alternative.index, 2u);
  EXPECT_EQ(r.ranking[2].alternative.index, 3u);
  EXPECT_EQ(r.ranking[3].alternative.index, 0u);
}

TEST(Ranking, DominanceRespected) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.05, 0.6), d(0.0, 0.3), cd(-3, 3), kd(0.1, 0.8);
  for (int i = 0; i < 100; ++i) {
    auto p = two_attribute_profile(cd(rng), cd(rng), kd(rng), kd(rng));
    const double a = u(rng), b = u(rng);
    BetaSpec lo{b, b + 0.3, 2.0, 3.0};
    BetaSpec hi{b + d(rng), lo.upper + 0.05, 2.0, 3.0};
    auto r = rank_alternatives({alt_with(0, {{"a", a}, {"b", lo}}), alt_with(1, {{"a", a + d(rng)}, {"b", hi}})}, p);
    EXPECT_EQ(r.ranking[0].alternative.index, 1u);
  }
}

TEST(Ranking, PointEstimatesAggregateDirectly) {
  auto p = two_attribute_profile(2.0, -0.5, 0.5, 0.2);
  auto r = rank_alternatives({alt_with(0, {{"a", 0.3}, {"b", 0.9}})}, p);
  const double expect = aggregate(p, std::vector<double>{p.utilities[0](0.3), p.utilities[1](0.9)});
  EXPECT_DOUBLE_EQ(r.ranking[0].expected_utility, expect);
}

TEST(Ranking, ScoringFailuresAreCollected) {
  auto p = two_attribute_profile(1.0, 1.0, 0.5, 0.4);
  auto r = rank_alternatives({alt_with(0, {{"a", 0.3}, {"b", 0.2}}), alt_with(1, {{"a", BetaSpec{0.5, 1.5, 2, 2}}, {"b", 0.2}})}, p);
  ASSERT_EQ(r.ranking.size(), 1u);
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_EQ(r.errors[0].code, "estimate_range");
}

TEST(Integrated, ProfileMustMatchKnowledgeBase) {
  auto p = two_attribute_profile(1.0, 1.0, 0.5, 0.4);
  EXPECT_EQ(error_code([&] { evaluate_integrated(bumper_kb(), truck_facts(), p); }), Errc::alignment);
}

TEST(Compare, TypicalProfileMirrorsConventionalChoice) {
  auto rep = compare_modes(bumper_kb(), truck_facts(), fixture_profile("typical"));
  EXPECT_TRUE(rep.same_selection);
  EXPECT_EQ(*rep.integrated.alternative.material("fascia"), "none");
  EXPECT_DOUBLE_EQ(rep.integrated.expected_utility, rep.conventional.expected_utility);
}

TEST(Compare, AtypicalProfilePrefersFinishedBumper) {
  auto rep = compare_modes(bumper_kb(), truck_facts(), fixture_profile("atypical"));
  EXPECT_FALSE(rep.same_selection);
  EXPECT_TRUE(rep.conventional_in_integrated_set);
  EXPECT_EQ(*rep.integrated.alternative.material("fascia"), "thermoset");
  EXPECT_EQ(*rep.integrated.alternative.material("energy_absorber"), "foam");
  EXPECT_EQ(*rep.integrated.alternative.material("beam"), "stamped_steel");
  EXPECT_GT(rep.integrated.expected_utility, rep.conventional.expected_utility);
}

TEST(Compare, NeedsApplicabilityRules) {
  auto kb = bumper_kb();
  std::erase_if(kb.rules, [](const Rule& r) { return r.category == RuleCategory::applicability; });
  EXPECT_EQ(error_code([&] { compare_modes(kb, truck_facts(), fixture_profile("typical")); }), Errc::precondition);
}
