#pragma once

// Output forms for evaluation results and comparison reports.

#include <iomanip>
#include <sstream>
#include <string>

#include <json.hpp>

#include "maud/error.hpp"
#include "maud/evaluation.hpp"
#include "maud/serialization.hpp"

namespace maud {

enum class OutputFormat { table, document, csv };

inline OutputFormat parse_format(const std::string& s) {
  if (s == "table") return OutputFormat::table;
  if (s == "document" || s == "json") return OutputFormat::document;
  if (s == "csv") return OutputFormat::csv;
  throw Error(Errc::usage, "unknown output format '" + s + "' (table, document, csv)", "format");
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json trace_to_json(const std::vector<TraceEntry>& trace) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& e : trace) {
    nlohmann::json subj = nlohmann::json::array();
    for (const auto& s : e.subjects) subj.push_back({{"slot", s.slot}, {"material", s.material}});
    nlohmann::json j{{"rule_id", e.rule_id},
                     {"category", category_name(e.category)},
                     {"objectivity", e.objectivity == Objectivity::objective ? "objective" : "subjective"},
                     {"action", e.action},
                     {"subjects", subj}};
    if (e.action == "forbid_combination") j["combinations_removed"] = e.combinations_removed;
    out.push_back(std::move(j));
  }
  return out;
}

inline std::vector<TraceEntry> trace_from_json(const nlohmann::json& j) {
  std::vector<TraceEntry> out;
  for (const auto& e : j) {
    TraceEntry t;
    t.rule_id = e.at("rule_id").get<std::string>();
    const auto cat = e.at("category").get<std::string>();
    t.category = cat == "configuration" ? RuleCategory::configuration
                 : cat == "restriction" ? RuleCategory::restriction
                                        : RuleCategory::applicability;
    t.objectivity = e.at("objectivity").get<std::string>() == "objective" ? Objectivity::objective
                                                                         : Objectivity::subjective;
    t.action = e.at("action").get<std::string>();
    for (const auto& s : e.at("subjects")) t.subjects.push_back({s.at("slot"), s.at("material")});
    t.combinations_removed = e.value("combinations_removed", std::size_t{0});
    out.push_back(std::move(t));
  }
  return out;
}

inline nlohmann::json alternative_to_json(const Alternative& a) {
  nlohmann::json assign = nlohmann::json::object(), est = nlohmann::json::array();
  nlohmann::json order = nlohmann::json::array();
  for (const auto& c : a.assignment) {
    assign[c.slot] = c.material;
    order.push_back(c.slot);
  }
  for (const auto& e : a.estimates) est.push_back(estimate_to_json(e));
  return {{"index", a.index}, {"assignment", assign}, {"slot_order", order}, {"estimates", est}};
}

inline Alternative alternative_from_json(const nlohmann::json& j) {
  Alternative a;
  a.index = j.at("index").get<std::size_t>();
  for (const auto& s : j.at("slot_order")) {
    const auto slot = s.get<std::string>();
    a.assignment.push_back({slot, j.at("assignment").at(slot).get<std::string>()});
  }
  for (const auto& e : j.at("estimates")) a.estimates.push_back(estimate_from_json(e));
  return a;
}

inline nlohmann::json result_to_json(const EvaluationResult& r) {
  nlohmann::json ranking = nlohmann::json::array(), errors = nlohmann::json::array();
  for (const auto& x : r.ranking) {
    nlohmann::json per = nlohmann::json::object();
    for (std::size_t j = 0; j < r.attributes.size(); ++j) per[r.attributes[j]] = x.attribute_utilities[j];
    ranking.push_back({{"rank", x.rank},
                       {"alternative", alternative_to_json(x.alternative)},
                       {"expected_utility", x.expected_utility},
                       {"attribute_utilities", per}});
  }
  for (const auto& e : r.errors)
    errors.push_back({{"alternative", alternative_to_json(e.alternative)}, {"code", e.code}, {"message", e.message}});
  return {{"slots", r.slots},
          {"attributes", r.attributes},
          {"ranking", ranking},
          {"errors", errors},
          {"trace", trace_to_json(r.trace)},
          {"profile_fingerprint", r.profile_fingerprint}};
}

inline EvaluationResult result_from_json(const nlohmann::json& j) {
  try {
    EvaluationResult r;
    r.slots = j.at("slots").get<std::vector<std::string>>();
    r.attributes = j.at("attributes").get<std::vector<std::string>>();
    for (const auto& x : j.at("ranking")) {
      RankedAlternative ra;
      ra.rank = x.at("rank").get<std::size_t>();
      ra.alternative = alternative_from_json(x.at("alternative"));
      ra.expected_utility = x.at("expected_utility").get<double>();
      for (const auto& a : r.attributes) ra.attribute_utilities.push_back(x.at("attribute_utilities").at(a).get<double>());
      r.ranking.push_back(std::move(ra));
    }
    for (const auto& e : j.at("errors"))
      r.errors.push_back({alternative_from_json(e.at("alternative")), e.at("code"), e.at("message")});
    r.trace = trace_from_json(j.at("trace"));
    r.profile_fingerprint = j.at("profile_fingerprint").get<std::string>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::validation, std::string("malformed evaluation result: ") + e.what(), "result");
  }
}

inline nlohmann::json selection_to_json(const ModeSelection& s, const std::vector<std::string>& attributes) {
  nlohmann::json per = nlohmann::json::object();
  for (std::size_t j = 0; j < attributes.size(); ++j) per[attributes[j]] = s.attribute_utilities[j];
  return {{"alternative", alternative_to_json(s.alternative)},
          {"expected_utility", s.expected_utility},
          {"attribute_utilities", per}};
}

inline nlohmann::json comparison_to_json(const ComparisonReport& c) {
  const auto& attrs = c.integrated_result.attributes;
  return {{"conventional", selection_to_json(c.conventional, attrs)},
          {"integrated", selection_to_json(c.integrated, attrs)},
          {"same_selection", c.same_selection},
          {"conventional_in_integrated_set", c.conventional_in_integrated_set},
          {"conventional_trace", trace_to_json(c.conventional_trace)},
          {"integrated_result", result_to_json(c.integrated_result)},
          {"profile_fingerprint", c.profile_fingerprint}};
}

// ---------------------------------------------------------------------------
// Text

namespace detail {
inline std::string fmt_utility(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(6) << v;
  return os.str();
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}
}  // namespace detail

/// Flat table: slot columns, one E[U_j] column per attribute, overall E[U], rank.
inline std::string render_csv(const EvaluationResult& r) {
  std::ostringstream os;
  bool first = true;
  auto cell = [&](const std::string& s) {
    if (!first) os << ',';
    os << detail::csv_field(s);
    first = false;
  };
  for (const auto& s : r.slots) cell(s);
  for (const auto& a : r.attributes) cell("EU_" + a);
  cell("EU");
  cell("rank");
  os << '\n';
  for (const auto& x : r.ranking) {
    first = true;
    for (const auto& c : x.alternative.assignment) cell(c.material);
    for (double u : x.attribute_utilities) cell(detail::fmt_utility(u));
    cell(detail::fmt_utility(x.expected_utility));
    cell(std::to_string(x.rank));
    os << '\n';
  }
  return os.str();
}

inline std::string render_table(const EvaluationResult& r) {
  std::vector<std::string> header;
  for (const auto& s : r.slots) header.push_back(s);
  for (const auto& a : r.attributes) header.push_back("E[U] " + a);
  header.push_back("E[U]");
  header.push_back("rank");
  std::vector<std::vector<std::string>> rows;
  for (const auto& x : r.ranking) {
    std::vector<std::string> row;
    for (const auto& c : x.alternative.assignment) row.push_back(c.material);
    for (double u : x.attribute_utilities) row.push_back(detail::fmt_utility(u));
    row.push_back(detail::fmt_utility(x.expected_utility));
    row.push_back(std::to_string(x.rank));
    rows.push_back(std::move(row));
  }
  std::vector<std::size_t> width(header.size());
  for (std::size_t i = 0; i < header.size(); ++i) {
    width[i] = header[i].size();
    for (const auto& row : rows) width[i] = std::max(width[i], row[i].size());
  }
  std::ostringstream os;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i)
      os << (i ? "  " : "") << std::left << std::setw(static_cast<int>(width[i])) << cells[i];
    os << '\n';
  };
  line(header);
  for (const auto& row : rows) line(row);
  for (const auto& e : r.errors) {
    os << "error:";
    for (const auto& c : e.alternative.assignment) os << ' ' << c.slot << '=' << c.material;
    os << " [" << e.code << "] " << e.message << '\n';
  }
  return os.str();
}

inline std::string render(const EvaluationResult& r, OutputFormat f) {
  switch (f) {
    case OutputFormat::table: return render_table(r);
    case OutputFormat::csv: return render_csv(r);
    case OutputFormat::document: return result_to_json(r).dump(2) + "\n";
  }
  return {};
}

inline std::string render(const ComparisonReport& c, OutputFormat f) {
  if (f == OutputFormat::document) return comparison_to_json(c).dump(2) + "\n";
  if (f == OutputFormat::csv) return render_csv(c.integrated_result);
  const auto& slots = c.integrated_result.slots;
  std::size_t w = 9;
  for (const auto& s : slots) w = std::max(w, s.size());
  std::ostringstream os;
  os << std::left << std::setw(static_cast<int>(w)) << "component" << "  " << std::setw(20) << "conventional"
     << "  " << "integrated" << '\n';
  for (const auto& s : slots)
    os << std::setw(static_cast<int>(w)) << s << "  " << std::setw(20) << *c.conventional.alternative.material(s)
       << "  " << *c.integrated.alternative.material(s) << '\n';
  os << std::setw(static_cast<int>(w)) << "E[U]" << "  " << std::setw(20)
     << detail::fmt_utility(c.conventional.expected_utility) << "  "
     << detail::fmt_utility(c.integrated.expected_utility) << '\n';
  os << "same selection: " << (c.same_selection ? "yes" : "no") << '\n';
  for (const auto& e : c.conventional_trace)
    if (e.objectivity == Objectivity::subjective)
      os << "conventional " << e.action << ": " << e.rule_id << '\n';
  return os.str();
}

}  // namespace maud
