#pragma once

// Seeded generators for rule-engine property checks.

#include <random>
#include <string>
#include <vector>

#include "maud/maud.hpp"

namespace testing_support {

inline maud::FactSet random_facts(std::mt19937_64& rng) {
  auto pick = [&](std::initializer_list<const char*> xs) {
    return std::string(*(xs.begin() + rng() % xs.size()));
  };
  std::uniform_real_distribution<double> u(0.0, 1.0);
  maud::FactSet f;
  f.vehicle_type = pick({"sedan", "subcompact", "sport", "pickup_truck"});
  f.desired_finish = pick({"bright", "neutral_color", "match_body_color", "unknown"});
  f.bumper_shape = pick({"flat", "peaked", "curved"});
  f.cutouts_present = rng() & 1;
  f.highest_allowed_offset = pick({"large", "medium", "small"});
  f.cost_range = pick({"high", "medium", "low"});
  f.impact_rating = pick({"over_5mph", "5mph", "2_5mph", "no_standard"});
  f.curb_weight_lbs = 1800 + 3000 * u(rng);
  f.production_volume_thousands = 20 + 300 * u(rng);
  f.run_years = 1 + 9 * u(rng);
  f.lead_time_years = 0.5 + 4 * u(rng);
  return f;
}

/// Random restriction rule forbidding one declared material under a random
/// fact condition (or unconditionally).
inline maud::Rule random_restriction(std::mt19937_64& rng, const maud::KnowledgeBase& kb, const std::string& id) {
  const auto& slot = kb.slots[rng() % kb.slots.size()];
  maud::Rule r;
  r.id = id;
  r.category = maud::RuleCategory::restriction;
  r.objectivity = maud::Objectivity::objective;
  r.effect = maud::Forbid{slot.id, slot.materials[rng() % slot.materials.size()]};
  switch (rng() % 3) {
    case 0: break;
    case 1: {
      static const char* types[] = {"sedan", "subcompact", "sport", "pickup_truck"};
      r.when.push_back({maud::Condition::Subject::fact, "vehicle_type", maud::Op::eq, {std::string(types[rng() % 4])}});
      break;
    }
    default:
      r.when.push_back({maud::Condition::Subject::fact, "lead_time_years", maud::Op::lt,
                        {0.5 + 4.0 * std::uniform_real_distribution<double>(0, 1)(rng)}});
  }
  return r;
}

/// Bundled KB with a random subset of its rules kept, in shuffled order,
/// plus a few random restrictions.
inline maud::KnowledgeBase mutate_kb(std::mt19937_64& rng, const maud::KnowledgeBase& base) {
  maud::KnowledgeBase kb = base;
  kb.rules.clear();
  for (const auto& r : base.rules)
    if (rng() % 4 != 0) kb.rules.push_back(r);
  const int extra = static_cast<int>(rng() % 3);
  for (int i = 0; i < extra; ++i) kb.rules.push_back(random_restriction(rng, kb, "X" + std::to_string(i)));
  std::shuffle(kb.rules.begin(), kb.rules.end(), rng);
  return kb;
}

inline bool is_subset(const std::vector<std::vector<std::string>>& a, const std::vector<std::vector<std::string>>& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    for (const auto& m : a[i])
      if (std::find(b[i].begin(), b[i].end(), m) == b[i].end()) return false;
  return true;
}

/// Every trace entry names a rule whose conditions hold, and every material
/// missing from the feasible sets is explained by a forbid entry.
inline bool restriction_trace_sound(const maud::KnowledgeBase& kb, const maud::FactSet& facts,
                                    const maud::RestrictionResult& res) {
  for (const auto& e : res.trace) {
    auto it = std::find_if(kb.rules.begin(), kb.rules.end(), [&](const maud::Rule& r) { return r.id == e.rule_id; });
    if (it == kb.rules.end() || !maud::holds_all(it->when, facts)) return false;
    const auto& f = std::get<maud::Forbid>(it->effect);
    if (e.subjects.size() != 1 || e.subjects[0].slot != f.slot || e.subjects[0].material != f.material) return false;
    const auto& feas = res.feasible[kb.slot_index(f.slot)];
    if (std::find(feas.begin(), feas.end(), f.material) != feas.end()) return false;
  }
  for (std::size_t i = 0; i < kb.slots.size(); ++i)
    for (const auto& m : kb.slots[i].materials) {
      const auto& feas = res.feasible[i];
      if (std::find(feas.begin(), feas.end(), m) != feas.end()) continue;
      const bool explained = std::any_of(res.trace.begin(), res.trace.end(), [&](const maud::TraceEntry& e) {
        return e.subjects[0].slot == kb.slots[i].id && e.subjects[0].material == m;
      });
      if (!explained) return false;
    }
  return true;
}

}  // namespace testing_support
