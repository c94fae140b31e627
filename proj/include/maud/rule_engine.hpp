#pragma once

// Pure-filter production system over a KnowledgeBase. Objective rules only
// remove options (restriction: single materials, configuration: material
// combinations); subjective applicability rules pin one material per slot
// and run only in conventional mode.

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "maud/error.hpp"
#include "maud/knowledge_base.hpp"

namespace maud {

struct SlotChoice {
  std::string slot;
  std::string material;
  bool operator==(const SlotChoice&) const = default;
};

/// One material per slot, in KB slot order, with the index it received
/// during enumeration.
struct Alternative {
  std::size_t index = 0;
  std::vector<SlotChoice> assignment;
  std::vector<AttributeEstimate> estimates;  // filled by estimate_attributes

  const std::string* material(std::string_view slot) const {
    for (const auto& c : assignment)
      if (c.slot == slot) return &c.material;
    return nullptr;
  }
  bool same_assignment(const Alternative& o) const { return assignment == o.assignment; }
};

struct TraceEntry {
  std::string rule_id;
  RuleCategory category = RuleCategory::restriction;
  Objectivity objectivity = Objectivity::objective;
  /// forbid | forbid_combination | select | select_conflict | select_infeasible
  std::string action;
  std::vector<SlotChoice> subjects;
  std::size_t combinations_removed = 0;
  bool operator==(const TraceEntry&) const = default;
};

struct RestrictionResult {
  std::vector<std::vector<std::string>> feasible;  // aligned with kb.slots, KB order
  std::vector<TraceEntry> trace;
};

struct ConfigurationResult {
  std::vector<Alternative> alternatives;
  std::vector<TraceEntry> trace;
};

struct ApplicabilityResult {
  Alternative selected;
  std::vector<TraceEntry> trace;
};

/// Removes every material forbidden by a satisfied restriction rule.
/// The outcome does not depend on rule order.
inline RestrictionResult run_restrictions(const KnowledgeBase& kb, const FactSet& facts) {
  std::vector<std::set<std::string>> removed(kb.slots.size());
  std::vector<std::vector<std::string>> removed_by(kb.slots.size());  // rule ids per slot
  RestrictionResult out;
  for (const auto& r : kb.rules) {
    if (r.category != RuleCategory::restriction) continue;
    if (!holds_all(r.when, facts)) continue;
    const auto& f = std::get<Forbid>(r.effect);
    const auto si = static_cast<std::size_t>(kb.slot_index(f.slot));
    removed[si].insert(f.material);
    removed_by[si].push_back(r.id);
    out.trace.push_back({r.id, r.category, r.objectivity, "forbid", {{f.slot, f.material}}, 0});
  }
  for (std::size_t i = 0; i < kb.slots.size(); ++i) {
    std::vector<std::string> keep;
    for (const auto& m : kb.slots[i].materials)
      if (!removed[i].count(m)) keep.push_back(m);
    if (keep.empty())
      throw Error(Errc::infeasible_design,
                  "no feasible material remains for slot '" + kb.slots[i].id + "'", "facts",
                  {{"slot", kb.slots[i].id}, {"rules", removed_by[i]}});
    out.feasible.push_back(std::move(keep));
  }
  return out;
}

namespace detail {
inline bool combination_matches(const ForbidCombination& fc, const Alternative& alt) {
  return std::all_of(fc.parts.begin(), fc.parts.end(), [&](const SlotMaterials& part) {
    const std::string* m = alt.material(part.slot);
    return m && std::find(part.materials.begin(), part.materials.end(), *m) != part.materials.end();
  });
}

inline SlotLookup lookup_for(const Alternative& alt) {
  return [&alt](std::string_view slot) { return alt.material(slot); };
}
}  // namespace detail

/// Cartesian product of the feasible sets (first slot varies slowest) minus
/// combinations forbidden by satisfied configuration rules.
inline ConfigurationResult enumerate_configurations(const KnowledgeBase& kb, const FactSet& facts,
                                                    const std::vector<std::vector<std::string>>& feasible) {
  if (feasible.size() != kb.slots.size())
    throw Error(Errc::alignment, "feasible sets must align with the knowledge base slots");
  for (std::size_t i = 0; i < feasible.size(); ++i)
    if (feasible[i].empty())
      throw Error(Errc::precondition, "feasible set for slot '" + kb.slots[i].id + "' is empty");

  std::vector<const Rule*> config;
  for (const auto& r : kb.rules)
    if (r.category == RuleCategory::configuration) config.push_back(&r);
  std::vector<std::size_t> blocked(config.size(), 0);

  ConfigurationResult out;
  std::vector<std::size_t> idx(feasible.size(), 0);
  std::size_t ordinal = 0;
  while (true) {
    Alternative alt;
    for (std::size_t i = 0; i < feasible.size(); ++i) alt.assignment.push_back({kb.slots[i].id, feasible[i][idx[i]]});
    bool forbidden = false;
    for (std::size_t r = 0; r < config.size(); ++r) {
      const auto& fc = std::get<ForbidCombination>(config[r]->effect);
      if (detail::combination_matches(fc, alt) && holds_all(config[r]->when, facts, detail::lookup_for(alt))) {
        ++blocked[r];
        forbidden = true;
      }
    }
    if (!forbidden) {
      alt.index = ordinal++;
      out.alternatives.push_back(std::move(alt));
    }
    // odometer increment, last slot fastest
    auto k = static_cast<std::ptrdiff_t>(feasible.size()) - 1;
    while (k >= 0 && ++idx[k] == feasible[k].size()) idx[k--] = 0;
    if (k < 0) break;
  }

  nlohmann::json blockers = nlohmann::json::array();
  for (std::size_t r = 0; r < config.size(); ++r) {
    if (blocked[r] == 0) continue;
    TraceEntry e{config[r]->id, config[r]->category, config[r]->objectivity, "forbid_combination", {}, blocked[r]};
    for (const auto& part : std::get<ForbidCombination>(config[r]->effect).parts)
      for (const auto& m : part.materials) e.subjects.push_back({part.slot, m});
    out.trace.push_back(std::move(e));
    blockers.push_back(config[r]->id);
  }
  if (out.alternatives.empty())
    throw Error(Errc::infeasible_configuration, "every material combination is forbidden", "facts",
                {{"rules", blockers}});
  return out;
}

/// Conventional-mode selection: applicability rules pin slots in priority
/// order (higher first, then declaration order). After each pin the scan
/// restarts so rules conditioned on that slot can fire.
inline ApplicabilityResult run_applicability(const KnowledgeBase& kb, const FactSet& facts,
                                             const std::vector<Alternative>& alternatives) {
  if (alternatives.empty()) throw Error(Errc::precondition, "no alternatives to select from");
  ApplicabilityResult out;
  if (alternatives.size() == 1) {
    out.selected = alternatives.front();
    return out;
  }
  if (!kb.has_applicability_rules())
    throw Error(Errc::precondition, "knowledge base has no applicability rules");

  std::vector<const Rule*> rules;
  for (const auto& r : kb.rules)
    if (r.category == RuleCategory::applicability) rules.push_back(&r);
  std::stable_sort(rules.begin(), rules.end(), [](const Rule* a, const Rule* b) { return a->priority > b->priority; });

  std::vector<Alternative> candidates = alternatives;
  std::map<std::string, std::string> pinned;
  SlotLookup lookup = [&pinned](std::string_view slot) -> const std::string* {
    auto it = pinned.find(std::string(slot));
    return it == pinned.end() ? nullptr : &it->second;
  };
  std::vector<bool> done(rules.size(), false);

  for (bool fired = true; fired;) {
    fired = false;
    for (std::size_t i = 0; i < rules.size(); ++i) {
      if (done[i] || !holds_all(rules[i]->when, facts, lookup)) continue;
      done[i] = true;
      fired = true;
      const auto& sel = std::get<Select>(rules[i]->effect);
      TraceEntry e{rules[i]->id, rules[i]->category, rules[i]->objectivity, "select", {{sel.slot, sel.material}}, 0};
      if (auto it = pinned.find(sel.slot); it != pinned.end()) {
        if (it->second != sel.material) {
          e.action = "select_conflict";
          out.trace.push_back(std::move(e));
        }
        break;
      }
      std::vector<Alternative> narrowed;
      for (const auto& a : candidates)
        if (*a.material(sel.slot) == sel.material) narrowed.push_back(a);
      if (narrowed.empty()) {
        e.action = "select_infeasible";
        out.trace.push_back(std::move(e));
        break;
      }
      pinned[sel.slot] = sel.material;
      candidates = std::move(narrowed);
      out.trace.push_back(std::move(e));
      break;
    }
  }
  if (candidates.size() != 1) {
    nlohmann::json open = nlohmann::json::array();
    for (const auto& s : kb.slots) {
      std::set<std::string> seen;
      for (const auto& a : candidates) seen.insert(*a.material(s.id));
      if (seen.size() > 1) open.push_back(s.id);
    }
    throw Error(Errc::conventional_incomplete,
                "applicability rules left " + std::to_string(candidates.size()) + " alternatives", "kb.rules",
                {{"unpinned_slots", open}});
  }
  out.selected = candidates.front();
  return out;
}

}  // namespace maud
