#pragma once

// Integrated evaluation: objective filtering, per-alternative attribute
// estimates, expected multiattribute utility, ranking, and the comparison
// against conventional (applicability-rule) selection.

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "maud/beta.hpp"
#include "maud/error.hpp"
#include "maud/expected_utility.hpp"
#include "maud/knowledge_base.hpp"
#include "maud/rule_engine.hpp"
#include "maud/serialization.hpp"
#include "maud/utility.hpp"

namespace maud {

/// Expected utilities closer than this are ties, broken by enumeration order.
inline constexpr double tie_tolerance = 1e-12;

namespace detail {

inline const EstimateRow& estimate_row(const KnowledgeBase& kb, const FactSet& facts, const SlotChoice& c) {
  for (const auto& row : kb.estimates)
    if (row.slot == c.slot && row.material == c.material && holds_all(row.when, facts)) return row;
  throw Error(Errc::kb_coverage, "no estimate row for " + c.slot + "/" + c.material, "kb.estimates");
}

/// Sum of independent component contributions. Points add exactly; one beta
/// plus points is a shifted beta; several betas are combined into the beta on
/// the summed support with the exact summed mean and variance.
inline AttributeEstimate sum_estimates(const std::string& attribute, const std::vector<AttributeEstimate>& parts) {
  double shift = 0.0;
  std::vector<BetaSpec> betas;
  for (const auto& p : parts) {
    if (p.is_point()) shift += p.point();
    else betas.push_back(p.beta());
  }
  AttributeEstimate out;
  out.attribute = attribute;
  if (betas.empty()) {
    out.value = shift;
  } else if (betas.size() == 1) {
    out.value = BetaSpec{betas[0].lower + shift, betas[0].upper + shift, betas[0].p, betas[0].q};
  } else {
    double lo = shift, hi = shift, mean = shift, var = 0.0;
    for (const auto& b : betas) {
      lo += b.lower;
      hi += b.upper;
      mean += beta_mean(b);
      var += beta_variance(b);
    }
    out.value = beta_from_moments(lo, hi, mean, var);
  }
  return out;
}

}  // namespace detail

/// System-level estimate per KB attribute (KB attribute order) for one
/// alternative under the given design context.
inline std::vector<AttributeEstimate> estimate_attributes(const KnowledgeBase& kb, const FactSet& facts,
                                                          const Alternative& alt) {
  if (alt.assignment.size() != kb.slots.size())
    throw Error(Errc::precondition, "alternative must assign every slot", "alternative");
  const auto feasible = run_restrictions(kb, facts).feasible;
  for (std::size_t i = 0; i < kb.slots.size(); ++i) {
    const auto& c = alt.assignment[i];
    if (c.slot != kb.slots[i].id)
      throw Error(Errc::precondition, "alternative slots are out of order", "alternative");
    if (std::find(feasible[i].begin(), feasible[i].end(), c.material) == feasible[i].end())
      throw Error(Errc::precondition, c.slot + "/" + c.material + " is excluded by restriction rules",
                  "alternative");
  }
  for (const auto& r : kb.rules) {
    if (r.category != RuleCategory::configuration) continue;
    if (detail::combination_matches(std::get<ForbidCombination>(r.effect), alt) &&
        holds_all(r.when, facts, detail::lookup_for(alt)))
      throw Error(Errc::precondition, "alternative is forbidden by configuration rule '" + r.id + "'",
                  "alternative");
  }
  std::vector<const EstimateRow*> rows;
  for (const auto& c : alt.assignment) rows.push_back(&detail::estimate_row(kb, facts, c));
  std::vector<AttributeEstimate> out;
  for (std::size_t a = 0; a < kb.attributes.size(); ++a) {
    std::vector<AttributeEstimate> parts;
    for (const auto* row : rows) parts.push_back(row->values[a]);
    out.push_back(detail::sum_estimates(kb.attributes[a].id, parts));
  }
  return out;
}

struct RankedAlternative {
  Alternative alternative;
  double expected_utility = 0.0;
  std::vector<double> attribute_utilities;  // profile attribute order
  std::size_t rank = 0;                     // 1-based
};

struct AlternativeError {
  Alternative alternative;
  std::string code;
  std::string message;
};

struct EvaluationResult {
  std::vector<std::string> slots;
  std::vector<std::string> attributes;
  std::vector<RankedAlternative> ranking;
  std::vector<AlternativeError> errors;
  std::vector<TraceEntry> trace;
  std::string profile_fingerprint;
};

/// Per-attribute expected utilities for one alternative, in profile order.
inline std::vector<double> attribute_expectations(const Alternative& alt, const UserProfile& profile) {
  std::vector<double> eu(profile.size());
  for (std::size_t j = 0; j < profile.size(); ++j) {
    const auto& id = profile.attributes[j].id;
    auto it = std::find_if(alt.estimates.begin(), alt.estimates.end(),
                           [&](const AttributeEstimate& e) { return e.attribute == id; });
    if (it == alt.estimates.end())
      throw Error(Errc::alignment, "alternative has no estimate for attribute '" + id + "'", "estimates." + id);
    eu[j] = expected_utility(profile.utilities[j], *it);
  }
  return eu;
}

inline EvaluationResult rank_alternatives(const std::vector<Alternative>& alternatives, const UserProfile& profile) {
  if (alternatives.empty()) throw Error(Errc::precondition, "no alternatives to rank", "alternatives");
  EvaluationResult res;
  for (const auto& a : profile.attributes) res.attributes.push_back(a.id);
  for (const auto& c : alternatives.front().assignment) res.slots.push_back(c.slot);
  res.profile_fingerprint = profile_fingerprint(profile);

  for (const auto& alt : alternatives) {
    try {
      RankedAlternative r;
      r.alternative = alt;
      r.attribute_utilities = attribute_expectations(alt, profile);
      r.expected_utility = aggregate_expected(profile, r.attribute_utilities);
      res.ranking.push_back(std::move(r));
    } catch (const Error& e) {
      res.errors.push_back({alt, std::string(code_name(e.code())), e.what()});
    }
  }

  // Exact descending order first, then runs of near-equal utilities are
  // reordered by enumeration index.
  auto& rk = res.ranking;
  std::stable_sort(rk.begin(), rk.end(), [](const RankedAlternative& a, const RankedAlternative& b) {
    if (a.expected_utility != b.expected_utility) return a.expected_utility > b.expected_utility;
    return a.alternative.index < b.alternative.index;
  });
  for (std::size_t start = 0; start < rk.size();) {
    std::size_t end = start + 1;
    while (end < rk.size() && rk[end - 1].expected_utility - rk[end].expected_utility <= tie_tolerance) ++end;
    std::stable_sort(rk.begin() + start, rk.begin() + end, [](const auto& a, const auto& b) {
      return a.alternative.index < b.alternative.index;
    });
    start = end;
  }
  for (std::size_t i = 0; i < rk.size(); ++i) rk[i].rank = i + 1;
  return res;
}

/// Feasible alternatives with estimates attached, plus the objective trace.
struct FeasibleSet {
  std::vector<Alternative> alternatives;
  std::vector<TraceEntry> trace;
};

inline FeasibleSet feasible_alternatives(const KnowledgeBase& kb, const FactSet& facts) {
  auto restr = run_restrictions(kb, facts);
  auto conf = enumerate_configurations(kb, facts, restr.feasible);
  FeasibleSet out;
  out.trace = std::move(restr.trace);
  out.trace.insert(out.trace.end(), conf.trace.begin(), conf.trace.end());
  out.alternatives = std::move(conf.alternatives);
  for (auto& alt : out.alternatives) alt.estimates = estimate_attributes(kb, facts, alt);
  return out;
}

namespace detail {
inline void check_profile_matches(const KnowledgeBase& kb, const UserProfile& profile) {
  if (kb.attributes.size() != profile.size())
    throw Error(Errc::alignment, "profile and knowledge base declare different attributes", "profile.attributes");
  for (const auto& a : kb.attributes)
    if (profile.index_of(a.id) < 0)
      throw Error(Errc::alignment, "profile lacks knowledge-base attribute '" + a.id + "'", "profile.attributes");
}
}  // namespace detail

/// Restrictions, configuration filtering and expected-utility ranking.
/// Subjective rules never run here.
inline EvaluationResult evaluate_integrated(const KnowledgeBase& kb, const FactSet& facts, const UserProfile& profile) {
  detail::check_profile_matches(kb, profile);
  auto feasible = feasible_alternatives(kb, facts);
  auto res = rank_alternatives(feasible.alternatives, profile);
  res.trace = std::move(feasible.trace);
  return res;
}

struct ModeSelection {
  Alternative alternative;
  double expected_utility = 0.0;
  std::vector<double> attribute_utilities;
};

struct ComparisonReport {
  ModeSelection conventional;
  ModeSelection integrated;
  bool same_selection = false;
  bool conventional_in_integrated_set = false;
  std::vector<TraceEntry> conventional_trace;
  EvaluationResult integrated_result;
  std::string profile_fingerprint;
};

inline ComparisonReport compare_modes(const KnowledgeBase& kb, const FactSet& facts, const UserProfile& profile) {
  if (!kb.has_applicability_rules())
    throw Error(Errc::precondition, "comparison needs applicability rules in the knowledge base", "kb.rules");
  detail::check_profile_matches(kb, profile);

  ComparisonReport rep;
  auto feasible = feasible_alternatives(kb, facts);
  auto conv = run_applicability(kb, facts, feasible.alternatives);
  rep.conventional_trace = feasible.trace;
  rep.conventional_trace.insert(rep.conventional_trace.end(), conv.trace.begin(), conv.trace.end());

  rep.integrated_result = rank_alternatives(feasible.alternatives, profile);
  rep.integrated_result.trace = feasible.trace;
  if (rep.integrated_result.ranking.empty())
    throw Error(Errc::estimate_range, "no alternative could be scored", "estimates");
  const auto& top = rep.integrated_result.ranking.front();
  rep.integrated = {top.alternative, top.expected_utility, top.attribute_utilities};

  rep.conventional.alternative = conv.selected;
  rep.conventional.attribute_utilities = attribute_expectations(conv.selected, profile);
  rep.conventional.expected_utility = aggregate_expected(profile, rep.conventional.attribute_utilities);
  rep.same_selection = conv.selected.same_assignment(top.alternative);
  rep.conventional_in_integrated_set =
      std::any_of(rep.integrated_result.ranking.begin(), rep.integrated_result.ranking.end(),
                  [&](const RankedAlternative& r) { return r.alternative.same_assignment(conv.selected); });
  rep.profile_fingerprint = rep.integrated_result.profile_fingerprint;
  return rep;
}

}  // namespace maud
