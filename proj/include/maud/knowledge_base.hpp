#pragma once

// Declarative knowledge base: component slots, materials, attributes, rules
// and per-material estimate tables, plus the design-input fact set.

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "maud/beta.hpp"
#include "maud/error.hpp"
#include "maud/utility.hpp"

namespace maud {

inline constexpr int kb_format_version = 1;

// ---------------------------------------------------------------------------
// Design inputs

struct FactSet {
  std::string vehicle_type;
  std::string desired_finish;
  std::string bumper_shape;
  bool cutouts_present = false;
  std::string highest_allowed_offset;
  std::string cost_range;
  std::string impact_rating;
  double curb_weight_lbs = 0.0;
  double production_volume_thousands = 0.0;
  double run_years = 0.0;
  double lead_time_years = 0.0;

  bool operator==(const FactSet&) const = default;
};

using FactValue = std::variant<double, std::string, bool>;

enum class FactKind { enumerated, number, boolean };

struct FactField {
  std::string_view name;
  FactKind kind;
  std::vector<std::string_view> values;  // enumerated only
};

inline const std::vector<FactField>& fact_fields() {
  static const std::vector<FactField> fields{
      {"vehicle_type", FactKind::enumerated, {"sedan", "subcompact", "sport", "pickup_truck"}},
      {"desired_finish", FactKind::enumerated, {"bright", "neutral_color", "match_body_color", "unknown"}},
      {"bumper_shape", FactKind::enumerated, {"flat", "peaked", "curved"}},
      {"cutouts_present", FactKind::boolean, {}},
      {"highest_allowed_offset", FactKind::enumerated, {"large", "medium", "small"}},
      {"cost_range", FactKind::enumerated, {"high", "medium", "low"}},
      {"impact_rating", FactKind::enumerated, {"over_5mph", "5mph", "2_5mph", "no_standard"}},
      {"curb_weight_lbs", FactKind::number, {}},
      {"production_volume_thousands", FactKind::number, {}},
      {"run_years", FactKind::number, {}},
      {"lead_time_years", FactKind::number, {}},
  };
  return fields;
}

inline const FactField* find_fact_field(std::string_view name) {
  for (const auto& f : fact_fields())
    if (f.name == name) return &f;
  return nullptr;
}

inline FactValue fact_value(const FactSet& f, std::string_view name) {
  if (name == "vehicle_type") return f.vehicle_type;
  if (name == "desired_finish") return f.desired_finish;
  if (name == "bumper_shape") return f.bumper_shape;
  if (name == "cutouts_present") return f.cutouts_present;
  if (name == "highest_allowed_offset") return f.highest_allowed_offset;
  if (name == "cost_range") return f.cost_range;
  if (name == "impact_rating") return f.impact_rating;
  if (name == "curb_weight_lbs") return f.curb_weight_lbs;
  if (name == "production_volume_thousands") return f.production_volume_thousands;
  if (name == "run_years") return f.run_years;
  if (name == "lead_time_years") return f.lead_time_years;
  throw Error(Errc::validation, "unknown fact '" + std::string(name) + "'", "facts." + std::string(name));
}

inline FactSet parse_facts(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(Errc::validation, "facts must be an object", "facts");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!find_fact_field(it.key()))
      throw Error(Errc::validation, "unknown fact '" + it.key() + "'", "facts." + it.key());
  FactSet f;
  for (const auto& field : fact_fields()) {
    const std::string name(field.name);
    const std::string path = "facts." + name;
    if (!j.contains(name)) throw Error(Errc::validation, "missing fact '" + name + "'", path);
    const auto& v = j.at(name);
    switch (field.kind) {
      case FactKind::enumerated: {
        if (!v.is_string()) throw Error(Errc::validation, "expected a string", path);
        const auto s = v.get<std::string>();
        if (std::find(field.values.begin(), field.values.end(), s) == field.values.end()) {
          nlohmann::json allowed = nlohmann::json::array();
          for (auto a : field.values) allowed.push_back(std::string(a));
          throw Error(Errc::validation, "'" + s + "' is not a valid " + name, path,
                      {{"allowed", allowed}});
        }
        if (name == "vehicle_type") f.vehicle_type = s;
        else if (name == "desired_finish") f.desired_finish = s;
        else if (name == "bumper_shape") f.bumper_shape = s;
        else if (name == "highest_allowed_offset") f.highest_allowed_offset = s;
        else if (name == "cost_range") f.cost_range = s;
        else if (name == "impact_rating") f.impact_rating = s;
        break;
      }
      case FactKind::boolean:
        if (!v.is_boolean()) throw Error(Errc::validation, "expected true or false", path);
        f.cutouts_present = v.get<bool>();
        break;
      case FactKind::number: {
        if (!v.is_number()) throw Error(Errc::validation, "expected a number", path);
        const double d = v.get<double>();
        if (!(d > 0.0) || !std::isfinite(d)) throw Error(Errc::validation, "must be positive", path);
        if (name == "curb_weight_lbs") f.curb_weight_lbs = d;
        else if (name == "production_volume_thousands") f.production_volume_thousands = d;
        else if (name == "run_years") f.run_years = d;
        else if (name == "lead_time_years") f.lead_time_years = d;
        break;
      }
    }
  }
  return f;
}

inline nlohmann::json facts_to_json(const FactSet& f) {
  return {{"vehicle_type", f.vehicle_type},
          {"desired_finish", f.desired_finish},
          {"bumper_shape", f.bumper_shape},
          {"cutouts_present", f.cutouts_present},
          {"highest_allowed_offset", f.highest_allowed_offset},
          {"cost_range", f.cost_range},
          {"impact_rating", f.impact_rating},
          {"curb_weight_lbs", f.curb_weight_lbs},
          {"production_volume_thousands", f.production_volume_thousands},
          {"run_years", f.run_years},
          {"lead_time_years", f.lead_time_years}};
}

// ---------------------------------------------------------------------------
// Rules

enum class RuleCategory { configuration, restriction, applicability };
enum class Objectivity { objective, subjective };
enum class Op { eq, ne, in, not_in, lt, le, gt, ge };

constexpr std::string_view category_name(RuleCategory c) {
  switch (c) {
    case RuleCategory::configuration: return "configuration";
    case RuleCategory::restriction: return "restriction";
    case RuleCategory::applicability: return "applicability";
  }
  return "";
}

/// A predicate over a fact or over the material assigned to a slot.
struct Condition {
  enum class Subject { fact, slot } subject = Subject::fact;
  std::string name;
  Op op = Op::eq;
  std::vector<FactValue> values;  // one value except for in / not_in
};

struct SlotMaterials {
  std::string slot;
  std::vector<std::string> materials;
};

struct Forbid {
  std::string slot;
  std::string material;
};
struct ForbidCombination {
  std::vector<SlotMaterials> parts;  // matches when every part matches
};
struct Select {
  std::string slot;
  std::string material;
};
using Effect = std::variant<Forbid, ForbidCombination, Select>;

struct Rule {
  std::string id;
  std::string description;
  RuleCategory category = RuleCategory::restriction;
  Objectivity objectivity = Objectivity::objective;
  int priority = 0;  // applicability only; higher fires first
  std::vector<Condition> when;
  Effect effect;
};

struct Slot {
  std::string id;
  std::string label;
  std::vector<std::string> materials;
};

/// Contribution of one (slot, material) to every system attribute. Rows with
/// a non-empty `when` apply only in matching design contexts; the first
/// matching row wins and every pair has an unconditional fallback row.
struct EstimateRow {
  std::string slot;
  std::string material;
  std::vector<Condition> when;
  std::vector<AttributeEstimate> values;  // aligned with KnowledgeBase::attributes
};

struct KnowledgeBase {
  std::string name;
  std::vector<Slot> slots;
  std::vector<AttributeSpec> attributes;
  std::vector<Rule> rules;
  std::vector<EstimateRow> estimates;

  std::ptrdiff_t slot_index(std::string_view id) const {
    for (std::size_t i = 0; i < slots.size(); ++i)
      if (slots[i].id == id) return static_cast<std::ptrdiff_t>(i);
    return -1;
  }
  bool has_material(std::string_view slot, std::string_view material) const {
    auto i = slot_index(slot);
    if (i < 0) return false;
    const auto& m = slots[i].materials;
    return std::find(m.begin(), m.end(), material) != m.end();
  }
  bool has_applicability_rules() const {
    return std::any_of(rules.begin(), rules.end(),
                       [](const Rule& r) { return r.category == RuleCategory::applicability; });
  }
};

// ---------------------------------------------------------------------------
// Condition evaluation

namespace detail {

inline bool compare(Op op, const FactValue& actual, const std::vector<FactValue>& values) {
  switch (op) {
    case Op::eq: return actual == values.front();
    case Op::ne: return actual != values.front();
    case Op::in: return std::find(values.begin(), values.end(), actual) != values.end();
    case Op::not_in: return std::find(values.begin(), values.end(), actual) == values.end();
    default: break;
  }
  const double a = std::get<double>(actual);
  const double b = std::get<double>(values.front());
  switch (op) {
    case Op::lt: return a < b;
    case Op::le: return a <= b;
    case Op::gt: return a > b;
    case Op::ge: return a >= b;
    default: return false;
  }
}

}  // namespace detail

/// Slot lookup for conditions; returns nullptr when the slot is unassigned.
using SlotLookup = std::function<const std::string*(std::string_view)>;

/// A slot condition on an unassigned slot is false.
inline bool holds(const Condition& c, const FactSet& facts, const SlotLookup& slots) {
  if (c.subject == Condition::Subject::fact) return detail::compare(c.op, fact_value(facts, c.name), c.values);
  const std::string* m = slots ? slots(c.name) : nullptr;
  if (!m) return false;
  return detail::compare(c.op, FactValue{*m}, c.values);
}

inline bool holds_all(const std::vector<Condition>& cs, const FactSet& facts, const SlotLookup& slots = {}) {
  return std::all_of(cs.begin(), cs.end(), [&](const Condition& c) { return holds(c, facts, slots); });
}

// ---------------------------------------------------------------------------
// Loading

namespace detail {

struct SchemaCollector {
  nlohmann::json violations = nlohmann::json::array();
  void add(std::string field, std::string message, std::string rule_id = {}) {
    nlohmann::json v{{"field", std::move(field)}, {"message", std::move(message)}};
    if (!rule_id.empty()) v["rule_id"] = std::move(rule_id);
    violations.push_back(std::move(v));
  }
  void raise_if_any() const {
    if (violations.empty()) return;
    std::string msg = "knowledge base has " + std::to_string(violations.size()) + " schema violation(s): " +
                      violations.front().at("message").get<std::string>();
    throw Error(Errc::schema, msg, violations.front().at("field").get<std::string>(),
                {{"violations", violations}});
  }
};

inline Op parse_op(const std::string& s) {
  static const std::map<std::string, Op> ops{{"eq", Op::eq}, {"ne", Op::ne}, {"in", Op::in},
                                             {"not_in", Op::not_in}, {"lt", Op::lt}, {"le", Op::le},
                                             {"gt", Op::gt}, {"ge", Op::ge}};
  auto it = ops.find(s);
  if (it == ops.end()) throw Error(Errc::schema, "unknown operator '" + s + "'");
  return it->second;
}

inline FactValue json_to_value(const nlohmann::json& v) {
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return v.get<std::string>();
  throw Error(Errc::schema, "condition values must be strings, numbers or booleans");
}

inline nlohmann::json value_to_json(const FactValue& v) {
  return std::visit([](const auto& x) { return nlohmann::json(x); }, v);
}

inline std::string op_name(Op op) {
  switch (op) {
    case Op::eq: return "eq";
    case Op::ne: return "ne";
    case Op::in: return "in";
    case Op::not_in: return "not_in";
    case Op::lt: return "lt";
    case Op::le: return "le";
    case Op::gt: return "gt";
    case Op::ge: return "ge";
  }
  return "";
}

/// Parses and validates one condition against declared facts and slots.
inline Condition parse_condition(const nlohmann::json& j, const KnowledgeBase& kb, bool allow_slots,
                                 const std::string& path) {
  if (!j.is_object()) throw Error(Errc::schema, "condition must be an object", path);
  Condition c;
  if (j.contains("fact")) {
    c.subject = Condition::Subject::fact;
    c.name = j.at("fact").get<std::string>();
  } else if (j.contains("slot")) {
    if (!allow_slots) throw Error(Errc::schema, "this rule category may only test facts", path);
    c.subject = Condition::Subject::slot;
    c.name = j.at("slot").get<std::string>();
  } else {
    throw Error(Errc::schema, "condition needs 'fact' or 'slot'", path);
  }
  c.op = parse_op(j.value("op", std::string("eq")));
  if (!j.contains("value")) throw Error(Errc::schema, "condition needs 'value'", path + ".value");
  const auto& v = j.at("value");
  const bool list_op = c.op == Op::in || c.op == Op::not_in;
  if (list_op) {
    if (!v.is_array() || v.empty()) throw Error(Errc::schema, "in/not_in need a non-empty array", path + ".value");
    for (const auto& e : v) c.values.push_back(json_to_value(e));
  } else {
    c.values.push_back(json_to_value(v));
  }

  if (c.subject == Condition::Subject::fact) {
    const FactField* f = find_fact_field(c.name);
    if (!f) throw Error(Errc::schema, "unknown fact '" + c.name + "'", path + ".fact");
    const bool ordered = c.op == Op::lt || c.op == Op::le || c.op == Op::gt || c.op == Op::ge;
    for (const auto& val : c.values) {
      switch (f->kind) {
        case FactKind::number:
          if (!std::holds_alternative<double>(val))
            throw Error(Errc::schema, "fact '" + c.name + "' is numeric", path + ".value");
          break;
        case FactKind::boolean:
          if (!std::holds_alternative<bool>(val) || ordered)
            throw Error(Errc::schema, "fact '" + c.name + "' is boolean", path + ".value");
          break;
        case FactKind::enumerated: {
          if (!std::holds_alternative<std::string>(val) || ordered)
            throw Error(Errc::schema, "fact '" + c.name + "' is enumerated", path + ".value");
          const auto& s = std::get<std::string>(val);
          if (std::find(f->values.begin(), f->values.end(), s) == f->values.end())
            throw Error(Errc::schema, "'" + s + "' is not a value of fact '" + c.name + "'", path + ".value");
          break;
        }
      }
    }
  } else {
    if (kb.slot_index(c.name) < 0) throw Error(Errc::schema, "unknown slot '" + c.name + "'", path + ".slot");
    for (const auto& val : c.values) {
      if (!std::holds_alternative<std::string>(val) || !kb.has_material(c.name, std::get<std::string>(val)))
        throw Error(Errc::schema, "undeclared material in slot condition on '" + c.name + "'", path + ".value");
    }
    if (!(c.op == Op::eq || c.op == Op::ne || list_op))
      throw Error(Errc::schema, "slot conditions support eq, ne, in, not_in", path + ".op");
  }
  return c;
}

inline nlohmann::json condition_to_json(const Condition& c) {
  nlohmann::json j;
  j[c.subject == Condition::Subject::fact ? "fact" : "slot"] = c.name;
  j["op"] = op_name(c.op);
  if (c.op == Op::in || c.op == Op::not_in) {
    auto arr = nlohmann::json::array();
    for (const auto& v : c.values) arr.push_back(value_to_json(v));
    j["value"] = arr;
  } else {
    j["value"] = value_to_json(c.values.front());
  }
  return j;
}

inline AttributeEstimate parse_estimate(const nlohmann::json& j, const std::string& attribute,
                                        const std::string& path) {
  AttributeEstimate e;
  e.attribute = attribute;
  if (j.is_number()) {
    e.value = j.get<double>();
  } else if (j.is_object() && j.contains("point")) {
    e.value = j.at("point").get<double>();
  } else if (j.is_object() && j.contains("beta")) {
    const auto& b = j.at("beta");
    BetaSpec s{b.at("lower").get<double>(), b.at("upper").get<double>(), b.at("p").get<double>(),
               b.at("q").get<double>()};
    validate(s, path + ".beta");
    e.value = s;
  } else {
    throw Error(Errc::schema, "estimate must be a number, {point} or {beta}", path);
  }
  return e;
}

}  // namespace detail

inline Direction parse_direction(const std::string& s, const std::string& field) {
  if (s == "increasing_preferred") return Direction::increasing_preferred;
  if (s == "decreasing_preferred") return Direction::decreasing_preferred;
  throw Error(Errc::validation, "direction must be increasing_preferred or decreasing_preferred", field);
}

inline std::string direction_name(Direction d) {
  return d == Direction::increasing_preferred ? "increasing_preferred" : "decreasing_preferred";
}

inline AttributeSpec parse_attribute(const nlohmann::json& j, const std::string& field) {
  if (!j.is_object()) throw Error(Errc::validation, "attribute must be an object", field);
  try {
    AttributeSpec a;
    a.id = j.at("id").get<std::string>();
    a.label = j.value("label", a.id);
    a.units = j.value("units", std::string());
    a.range_worst = j.at("range_worst").get<double>();
    a.range_best = j.at("range_best").get<double>();
    if (j.contains("direction"))
      a.direction = parse_direction(j.at("direction").get<std::string>(), field + ".direction");
    else
      a.direction = a.range_best > a.range_worst ? Direction::increasing_preferred
                                                 : Direction::decreasing_preferred;
    validate(a, field);
    return a;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::validation, std::string("malformed attribute: ") + e.what(), field);
  }
}

inline nlohmann::json attribute_to_json(const AttributeSpec& a) {
  return {{"id", a.id},
          {"label", a.label},
          {"units", a.units},
          {"range_worst", a.range_worst},
          {"range_best", a.range_best},
          {"direction", direction_name(a.direction)}};
}

/// Parses and fully validates a knowledge-base document. All structural
/// problems are collected and reported together as schema violations.
inline KnowledgeBase load_knowledge_base(const nlohmann::json& doc) {
  detail::SchemaCollector errors;
  KnowledgeBase kb;
  if (!doc.is_object()) throw Error(Errc::schema, "knowledge base must be an object", "");
  if (!doc.contains("format_version") || !doc.at("format_version").is_number_integer() ||
      doc.at("format_version").get<int>() != kb_format_version)
    throw Error(Errc::schema, "unsupported format_version (expected 1)", "format_version");
  for (const char* key : {"slots", "attributes", "rules", "estimates"})
    if (!doc.contains(key) || !doc.at(key).is_array())
      errors.add(key, std::string("missing array '") + key + "'");
  errors.raise_if_any();
  kb.name = doc.value("name", std::string());

  auto guarded = [&](const std::string& path, const std::string& rule_id, auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      errors.add(e.field().empty() ? path : e.field(), e.what(), rule_id);
    } catch (const nlohmann::json::exception& e) {
      errors.add(path, e.what(), rule_id);
    }
  };

  std::set<std::string> slot_ids;
  for (std::size_t i = 0; i < doc.at("slots").size(); ++i) {
    const std::string path = "slots[" + std::to_string(i) + "]";
    guarded(path, "", [&] {
      const auto& js = doc.at("slots")[i];
      Slot s{js.at("id").get<std::string>(), js.value("label", std::string()), {}};
      if (s.label.empty()) s.label = s.id;
      for (const auto& m : js.at("materials")) s.materials.push_back(m.get<std::string>());
      if (s.materials.empty()) throw Error(Errc::schema, "slot '" + s.id + "' has no materials", path);
      std::set<std::string> uniq(s.materials.begin(), s.materials.end());
      if (uniq.size() != s.materials.size())
        throw Error(Errc::schema, "slot '" + s.id + "' lists a material twice", path);
      if (!slot_ids.insert(s.id).second) throw Error(Errc::schema, "duplicate slot '" + s.id + "'", path);
      kb.slots.push_back(std::move(s));
    });
  }
  if (kb.slots.empty() && errors.violations.empty()) errors.add("slots", "at least one slot is required");

  std::set<std::string> attr_ids;
  for (std::size_t i = 0; i < doc.at("attributes").size(); ++i) {
    const std::string path = "attributes[" + std::to_string(i) + "]";
    guarded(path, "", [&] {
      auto a = parse_attribute(doc.at("attributes")[i], path);
      if (!attr_ids.insert(a.id).second) throw Error(Errc::schema, "duplicate attribute '" + a.id + "'", path);
      kb.attributes.push_back(std::move(a));
    });
  }

  std::set<std::string> rule_ids;
  for (std::size_t i = 0; i < doc.at("rules").size(); ++i) {
    const std::string path = "rules[" + std::to_string(i) + "]";
    const auto& jr = doc.at("rules")[i];
    const std::string rid = jr.is_object() ? jr.value("id", std::string()) : std::string();
    guarded(path, rid, [&] {
      Rule r;
      r.id = jr.at("id").get<std::string>();
      if (!rule_ids.insert(r.id).second) throw Error(Errc::schema, "duplicate rule id '" + r.id + "'", path + ".id");
      r.description = jr.value("description", std::string());
      const auto cat = jr.at("category").get<std::string>();
      if (cat == "configuration") r.category = RuleCategory::configuration;
      else if (cat == "restriction") r.category = RuleCategory::restriction;
      else if (cat == "applicability") r.category = RuleCategory::applicability;
      else throw Error(Errc::schema, "unknown rule category '" + cat + "'", path + ".category");
      const auto obj = jr.at("objectivity").get<std::string>();
      if (obj == "objective") r.objectivity = Objectivity::objective;
      else if (obj == "subjective") r.objectivity = Objectivity::subjective;
      else throw Error(Errc::schema, "unknown objectivity '" + obj + "'", path + ".objectivity");
      const bool applicability = r.category == RuleCategory::applicability;
      if (applicability != (r.objectivity == Objectivity::subjective))
        throw Error(Errc::schema,
                    "rule '" + r.id + "': " + cat + " rules must be " +
                        (applicability ? "subjective" : "objective"),
                    path + ".objectivity");
      r.priority = jr.value("priority", 0);
      const bool allow_slots = r.category != RuleCategory::restriction;
      if (jr.contains("when")) {
        const auto& w = jr.at("when");
        for (std::size_t k = 0; k < w.size(); ++k)
          r.when.push_back(detail::parse_condition(w[k], kb, allow_slots, path + ".when[" + std::to_string(k) + "]"));
      }
      const auto& eff = jr.at("effect");
      auto check_pair = [&](const std::string& slot, const std::string& material, const std::string& p) {
        if (kb.slot_index(slot) < 0) throw Error(Errc::schema, "rule '" + r.id + "' names undeclared slot '" + slot + "'", p);
        if (!kb.has_material(slot, material))
          throw Error(Errc::schema, "rule '" + r.id + "' names undeclared material '" + material + "' in slot '" + slot + "'", p);
      };
      if (eff.contains("forbid")) {
        if (r.category != RuleCategory::restriction)
          throw Error(Errc::schema, "rule '" + r.id + "': forbid effects belong to restriction rules", path + ".effect");
        Forbid f{eff.at("forbid").at("slot").get<std::string>(), eff.at("forbid").at("material").get<std::string>()};
        check_pair(f.slot, f.material, path + ".effect.forbid");
        r.effect = f;
      } else if (eff.contains("forbid_combination")) {
        if (r.category != RuleCategory::configuration)
          throw Error(Errc::schema, "rule '" + r.id + "': forbid_combination belongs to configuration rules", path + ".effect");
        ForbidCombination fc;
        const auto& parts = eff.at("forbid_combination");
        if (!parts.is_array() || parts.size() < 2)
          throw Error(Errc::schema, "rule '" + r.id + "': forbid_combination needs at least two slots", path + ".effect");
        std::set<std::string> seen;
        for (std::size_t k = 0; k < parts.size(); ++k) {
          const std::string pp = path + ".effect.forbid_combination[" + std::to_string(k) + "]";
          SlotMaterials sm;
          sm.slot = parts[k].at("slot").get<std::string>();
          if (parts[k].contains("materials"))
            for (const auto& m : parts[k].at("materials")) sm.materials.push_back(m.get<std::string>());
          else
            sm.materials.push_back(parts[k].at("material").get<std::string>());
          if (sm.materials.empty()) throw Error(Errc::schema, "empty material list", pp);
          for (const auto& m : sm.materials) check_pair(sm.slot, m, pp);
          if (!seen.insert(sm.slot).second) throw Error(Errc::schema, "slot repeated in combination", pp);
          fc.parts.push_back(std::move(sm));
        }
        r.effect = fc;
      } else if (eff.contains("select")) {
        if (r.category != RuleCategory::applicability)
          throw Error(Errc::schema, "rule '" + r.id + "': objective rules cannot select", path + ".effect");
        Select s{eff.at("select").at("slot").get<std::string>(), eff.at("select").at("material").get<std::string>()};
        check_pair(s.slot, s.material, path + ".effect.select");
        r.effect = s;
      } else {
        throw Error(Errc::schema, "rule '" + r.id + "' has no recognised effect", path + ".effect");
      }
      kb.rules.push_back(std::move(r));
    });
  }

  for (std::size_t i = 0; i < doc.at("estimates").size(); ++i) {
    const std::string path = "estimates[" + std::to_string(i) + "]";
    guarded(path, "", [&] {
      const auto& je = doc.at("estimates")[i];
      EstimateRow row;
      row.slot = je.at("slot").get<std::string>();
      row.material = je.at("material").get<std::string>();
      if (!kb.has_material(row.slot, row.material))
        throw Error(Errc::schema, "estimate row for undeclared " + row.slot + "/" + row.material, path);
      if (je.contains("when"))
        for (std::size_t k = 0; k < je.at("when").size(); ++k)
          row.when.push_back(detail::parse_condition(je.at("when")[k], kb, false, path + ".when[" + std::to_string(k) + "]"));
      const auto& vals = je.at("values");
      for (const auto& a : kb.attributes) {
        if (!vals.contains(a.id))
          throw Error(Errc::schema, "estimate row " + row.slot + "/" + row.material + " lacks attribute '" + a.id + "'",
                      path + ".values." + a.id);
        row.values.push_back(detail::parse_estimate(vals.at(a.id), a.id, path + ".values." + a.id));
      }
      for (auto it = vals.begin(); it != vals.end(); ++it)
        if (!attr_ids.count(it.key()))
          throw Error(Errc::schema, "estimate names undeclared attribute '" + it.key() + "'", path + ".values." + it.key());
      kb.estimates.push_back(std::move(row));
    });
  }

  for (const auto& s : kb.slots)
    for (const auto& m : s.materials) {
      const bool fallback = std::any_of(kb.estimates.begin(), kb.estimates.end(), [&](const EstimateRow& r) {
        return r.slot == s.id && r.material == m && r.when.empty();
      });
      if (!fallback)
        errors.add("estimates", "missing unconditional estimate row for " + s.id + "/" + m);
    }
  errors.raise_if_any();
  return kb;
}

inline KnowledgeBase load_knowledge_base(std::string_view bytes) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(bytes);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::malformed, std::string("knowledge base is not valid JSON: ") + e.what(), "");
  }
  return load_knowledge_base(doc);
}

}  // namespace maud
