#pragma once

// JSON forms of profiles, sessions and estimates, the profile document
// written by `maud assess` and stored by the service, and profile
// fingerprints.

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>

#include <json.hpp>

#include "maud/assessment.hpp"
#include "maud/beta.hpp"
#include "maud/error.hpp"
#include "maud/knowledge_base.hpp"
#include "maud/utility.hpp"

namespace maud {

inline constexpr int profile_format_version = 1;

/// 64-bit FNV-1a, rendered as 16 hex digits.
inline std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string mode_name(AggregationMode m) {
  return m == AggregationMode::multiplicative ? "multiplicative" : "additive_limit";
}

// ---------------------------------------------------------------------------
// Profile

inline nlohmann::json profile_to_json(const UserProfile& p) {
  nlohmann::json attrs = nlohmann::json::array(), utils = nlohmann::json::array();
  for (std::size_t j = 0; j < p.size(); ++j) {
    attrs.push_back(attribute_to_json(p.attributes[j]));
    utils.push_back({{"attribute", p.attributes[j].id}, {"risk_coefficient", p.utilities[j].risk_coefficient()}});
  }
  return {{"attributes", attrs},
          {"utilities", utils},
          {"scaling_constants", p.scaling_constants},
          {"master_constant", p.master_constant},
          {"aggregation_mode", mode_name(p.aggregation_mode)}};
}

/// Canonical fingerprint: keys sorted, shortest round-trip doubles.
inline std::string profile_fingerprint(const UserProfile& p) { return fnv1a_hex(profile_to_json(p).dump()); }

inline UserProfile profile_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(Errc::validation, "profile must be an object", "profile");
  try {
    UserProfile p;
    const auto& attrs = j.at("attributes");
    const auto& utils = j.at("utilities");
    if (attrs.size() != utils.size())
      throw Error(Errc::alignment, "utilities must align with attributes", "profile.utilities");
    for (std::size_t i = 0; i < attrs.size(); ++i) {
      auto a = parse_attribute(attrs[i], "profile.attributes[" + std::to_string(i) + "]");
      if (utils[i].at("attribute").get<std::string>() != a.id)
        throw Error(Errc::alignment, "utility does not belong to attribute '" + a.id + "'",
                    "profile.utilities[" + std::to_string(i) + "]");
      p.utilities.push_back(make_exponential_utility(a, utils[i].at("risk_coefficient").get<double>()));
      p.attributes.push_back(std::move(a));
    }
    p.scaling_constants = j.at("scaling_constants").get<std::vector<double>>();
    p.master_constant = j.at("master_constant").get<double>();
    const auto mode = j.at("aggregation_mode").get<std::string>();
    if (mode == "multiplicative") p.aggregation_mode = AggregationMode::multiplicative;
    else if (mode == "additive_limit") p.aggregation_mode = AggregationMode::additive_limit;
    else throw Error(Errc::validation, "unknown aggregation mode '" + mode + "'", "profile.aggregation_mode");
    validate(p);
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::validation, std::string("malformed profile: ") + e.what(), "profile");
  }
}

// ---------------------------------------------------------------------------
// Sessions

inline nlohmann::json session_to_json(const Session& s) {
  nlohmann::json attrs = nlohmann::json::array(), log = nlohmann::json::array();
  for (const auto& a : s.attributes) attrs.push_back(attribute_to_json(a));
  for (const auto& r : s.responses)
    log.push_back({{"sequence", r.sequence},
                   {"kind", kind_name(r.kind)},
                   {"attribute", r.attribute},
                   {"step", r.step},
                   {"answer", r.answer},
                   {"timestamp", r.timestamp}});
  return {{"id", s.id}, {"attributes", attrs}, {"ce_count", s.ce_count}, {"responses", log}};
}

/// Rebuilds a session by replaying its logged answers, so every logged
/// answer is re-validated.
inline Session session_from_json(const nlohmann::json& j) {
  try {
    std::vector<AttributeSpec> attrs;
    for (std::size_t i = 0; i < j.at("attributes").size(); ++i)
      attrs.push_back(parse_attribute(j.at("attributes")[i], "session.attributes[" + std::to_string(i) + "]"));
    Session s = start_session(std::move(attrs), j.value("ce_count", 1), j.value("id", std::string()));
    for (const auto& r : j.at("responses")) {
      auto q = next_question(s);
      if (q && (r.at("attribute").get<std::string>() != q->attribute_id ||
                r.at("kind").get<std::string>() != kind_name(q->kind)))
        throw Error(Errc::sequence, "logged response does not match the question asked", "session.responses");
      s = submit_answer(s, r.at("sequence").get<std::size_t>(), r.at("answer").get<double>(),
                        r.value("timestamp", std::string("-")));
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::validation, std::string("malformed session log: ") + e.what(), "session");
  }
}

inline nlohmann::json question_to_json(const Question& q) {
  return {{"sequence", q.sequence},
          {"kind", kind_name(q.kind)},
          {"attribute", q.attribute_id},
          {"attribute_index", q.attribute_index},
          {"step", q.step},
          {"prompt", q.prompt},
          {"domain", {{"lower", q.domain.lower}, {"upper", q.domain.upper}, {"open", q.domain.open}}},
          {"lottery", {{"probability", q.lottery_probability}, {"best", q.best}, {"worst", q.worst}}}};
}

// ---------------------------------------------------------------------------
// Profile documents

struct ProfileDocument {
  std::string owner;
  UserProfile profile;
  std::string fingerprint;
  std::optional<Session> session;
};

inline nlohmann::json profile_document_to_json(const ProfileDocument& d) {
  nlohmann::json j{{"format_version", profile_format_version},
                   {"owner", d.owner},
                   {"profile", profile_to_json(d.profile)},
                   {"fingerprint", profile_fingerprint(d.profile)}};
  j["session_log"] = d.session ? session_to_json(*d.session) : nlohmann::json(nullptr);
  return j;
}

inline ProfileDocument make_profile_document(const Session& s, std::string owner = {}) {
  ProfileDocument d;
  d.owner = std::move(owner);
  d.profile = finalize_profile(s);
  d.fingerprint = profile_fingerprint(d.profile);
  d.session = s;
  return d;
}

/// Validates a profile document: payload invariants, fingerprint, and (when
/// present) that the session log replays to the payload.
inline ProfileDocument parse_profile_document(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(Errc::validation, "profile document must be an object", "");
  if (j.value("format_version", 0) != profile_format_version)
    throw Error(Errc::validation, "unsupported format_version (expected 1)", "format_version");
  if (!j.contains("profile")) throw Error(Errc::validation, "missing 'profile'", "profile");
  ProfileDocument d;
  d.owner = j.value("owner", std::string());
  d.profile = profile_from_json(j.at("profile"));
  d.fingerprint = profile_fingerprint(d.profile);
  if (j.contains("fingerprint") && j.at("fingerprint").get<std::string>() != d.fingerprint)
    throw Error(Errc::validation, "fingerprint does not match profile payload", "fingerprint");
  if (j.contains("session_log") && !j.at("session_log").is_null()) {
    Session s = session_from_json(j.at("session_log"));
    if (profile_fingerprint(finalize_profile(s)) != d.fingerprint)
      throw Error(Errc::validation, "session log does not replay to the stored profile", "session_log");
    d.session = std::move(s);
  }
  return d;
}

// ---------------------------------------------------------------------------
// Estimates

inline nlohmann::json beta_to_json(const BetaSpec& s) {
  return {{"lower", s.lower}, {"upper", s.upper}, {"p", s.p}, {"q", s.q}};
}

inline nlohmann::json estimate_to_json(const AttributeEstimate& e) {
  if (e.is_point()) return {{"attribute", e.attribute}, {"point", e.point()}};
  return {{"attribute", e.attribute}, {"beta", beta_to_json(e.beta())}};
}

inline AttributeEstimate estimate_from_json(const nlohmann::json& j) {
  AttributeEstimate e;
  e.attribute = j.at("attribute").get<std::string>();
  if (j.contains("point")) {
    e.value = j.at("point").get<double>();
  } else {
    const auto& b = j.at("beta");
    e.value = BetaSpec{b.at("lower").get<double>(), b.at("upper").get<double>(), b.at("p").get<double>(),
                       b.at("q").get<double>()};
  }
  return e;
}

}  // namespace maud
