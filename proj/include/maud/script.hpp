#pragma once

// Scripted (non-interactive) assessment. An answer script lists numeric
// answers keyed by (attribute id, question kind, step); replaying it walks
// the same question sequence as an interactive session.

#include <map>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "maud/assessment.hpp"
#include "maud/error.hpp"
#include "maud/knowledge_base.hpp"

namespace maud {

struct ScriptedAnswer {
  std::string attribute;
  QuestionKind kind = QuestionKind::certainty_equivalent;
  int step = 0;
  double value = 0.0;
};

using AnswerScript = std::vector<ScriptedAnswer>;

inline AnswerScript parse_answer_script(const nlohmann::json& j) {
  const auto& arr = j.is_array() ? j : j.at("answers");
  AnswerScript out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string path = "answers[" + std::to_string(i) + "]";
    try {
      ScriptedAnswer a;
      a.attribute = arr[i].at("attribute").get<std::string>();
      const auto kind = arr[i].at("kind").get<std::string>();
      if (kind == "certainty_equivalent") a.kind = QuestionKind::certainty_equivalent;
      else if (kind == "probability_equivalence") a.kind = QuestionKind::probability_equivalence;
      else throw Error(Errc::validation, "unknown question kind '" + kind + "'", path + ".kind");
      a.step = arr[i].value("step", 0);
      a.value = arr[i].at("value").get<double>();
      out.push_back(std::move(a));
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::validation, std::string("malformed answer: ") + e.what(), path);
    }
  }
  return out;
}

inline nlohmann::json answer_script_to_json(const AnswerScript& s) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& a : s)
    arr.push_back({{"attribute", a.attribute}, {"kind", kind_name(a.kind)}, {"step", a.step}, {"value", a.value}});
  return {{"answers", arr}};
}

/// Attribute list plus CE question count, as read by `maud assess --attributes`.
struct AssessmentSetup {
  std::vector<AttributeSpec> attributes;
  int ce_count = 1;
};

inline AssessmentSetup parse_assessment_setup(const nlohmann::json& j) {
  AssessmentSetup s;
  const auto& arr = j.is_array() ? j : j.at("attributes");
  for (std::size_t i = 0; i < arr.size(); ++i)
    s.attributes.push_back(parse_attribute(arr[i], "attributes[" + std::to_string(i) + "]"));
  if (j.is_object()) s.ce_count = j.value("ce_count", 1);
  return s;
}

/// Answers every question of a fresh session from the script, in protocol
/// order. Missing or unused answers are errors.
inline Session run_answer_script(const AssessmentSetup& setup, const AnswerScript& script) {
  std::map<std::tuple<std::string, QuestionKind, int>, double> by_key;
  for (const auto& a : script) {
    if (!by_key.emplace(std::make_tuple(a.attribute, a.kind, a.step), a.value).second)
      throw Error(Errc::validation, "duplicate scripted answer for '" + a.attribute + "'", "answers");
  }
  Session s = start_session(setup.attributes, setup.ce_count);
  std::size_t used = 0;
  while (auto q = next_question(s)) {
    auto it = by_key.find({q->attribute_id, q->kind, q->step});
    if (it == by_key.end())
      throw Error(Errc::validation,
                  "script has no " + std::string(kind_name(q->kind)) + " answer for '" + q->attribute_id +
                      "' step " + std::to_string(q->step),
                  "answers");
    s = submit_answer(s, q->sequence, it->second);
    ++used;
  }
  if (used != script.size()) throw Error(Errc::validation, "script contains answers no question asked for", "answers");
  return s;
}

}  // namespace maud
