#pragma once

// Transport-independent request router for the HTTP service. Every handler
// is a thin wrapper over the library; http.hpp binds it to a socket.

#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "maud/assessment.hpp"
#include "maud/beta.hpp"
#include "maud/error.hpp"
#include "maud/evaluation.hpp"
#include "maud/knowledge_base.hpp"
#include "maud/report.hpp"
#include "maud/script.hpp"
#include "maud/serialization.hpp"
#include "maud/service/store.hpp"

namespace maud::service {

struct Request {
  std::string method;
  std::string path;
  std::string body;
};

struct Response {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

inline int http_status(Errc c) {
  switch (c) {
    case Errc::not_found: return 404;
    case Errc::sequence:
    case Errc::conflict:
    case Errc::session_incomplete: return 409;
    case Errc::malformed:
    case Errc::usage: return 400;
    case Errc::io: return 500;
    default: return 422;
  }
}

inline Response error_response(const Error& e) { return {http_status(e.code()), e.to_json().dump()}; }

class Api {
 public:
  explicit Api(DocumentStore& store) : store_(store) {}

  Response handle(const Request& req) {
    try {
      return route(req);
    } catch (const Error& e) {
      return error_response(e);
    } catch (const nlohmann::json::exception& e) {
      return error_response(Error(Errc::validation, std::string("malformed request body: ") + e.what(), "body"));
    } catch (const std::exception& e) {
      return error_response(Error(Errc::io, e.what()));
    }
  }

 private:
  static std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : path.substr(0, path.find('?'))) {
      if (c == '/') {
        if (!cur.empty()) parts.push_back(std::move(cur));
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (!cur.empty()) parts.push_back(std::move(cur));
    return parts;
  }

  static nlohmann::json parse_body(const Request& req) {
    if (req.body.empty()) return nlohmann::json::object();
    try {
      return nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(Errc::malformed, std::string("request body is not valid JSON: ") + e.what(), "body");
    }
  }

  static Response ok(const nlohmann::json& j, int status = 200) { return {status, j.dump()}; }

  Response route(const Request& req) {
    const auto p = split_path(req.path);
    const auto& m = req.method;
    if (m == "OPTIONS") return {204, "", "text/plain"};
    if (p.empty()) return ok({{"service", "maud"}, {"status", "ok"}});

    if (p[0] == "sessions") {
      if (p.size() == 1 && m == "POST") return create_session(parse_body(req));
      if (p.size() == 2 && m == "GET") return ok(session_to_json(load_session(p[1])));
      if (p.size() == 3 && p[2] == "question" && m == "GET") return get_question(p[1]);
      if (p.size() == 3 && p[2] == "answers" && m == "POST") return post_answer(p[1], parse_body(req));
      if (p.size() == 3 && p[2] == "finalize" && m == "POST") return finalize(p[1], parse_body(req));
    } else if (p[0] == "profiles") {
      if (p.size() == 1 && m == "GET") return list("profile");
      if (p.size() == 1 && m == "POST") return store_profile(req.body);
      if (p.size() == 2 && m == "GET") return fetch("profile", p[1]);
    } else if (p[0] == "kbs") {
      if (p.size() == 1 && m == "GET") return list("kb");
      if (p.size() == 1 && m == "POST") return store_kb(req.body);
      if (p.size() == 2 && m == "GET") return fetch("kb", p[1]);
    } else if (p[0] == "evaluate" && p.size() == 1 && m == "POST") {
      return evaluate(parse_body(req));
    } else if (p[0] == "beta" && p.size() == 2 && p[1] == "fit" && m == "POST") {
      return fit(parse_body(req));
    }
    throw Error(Errc::not_found, "no route for " + m + " " + req.path, "path");
  }

  // -- sessions -------------------------------------------------------------

  Session load_session(const std::string& id) const {
    auto bytes = store_.get_session(id);
    if (!bytes) throw Error(Errc::not_found, "unknown session '" + id + "'", "session_id");
    return session_from_json(nlohmann::json::parse(*bytes));
  }

  static nlohmann::json progress(const Session& s) {
    nlohmann::json j{{"session_id", s.id},
                     {"answered", s.responses.size()},
                     {"total_questions", s.total_questions()},
                     {"done", s.complete()}};
    if (auto q = next_question(s)) j["question"] = question_to_json(*q);
    return j;
  }

  Response create_session(const nlohmann::json& body) {
    auto setup = parse_assessment_setup(body);
    Session s = start_session(std::move(setup.attributes), setup.ce_count);
    std::lock_guard lock(session_mu_);
    store_.put_session(s.id, session_to_json(s).dump());
    return ok(progress(s), 201);
  }

  Response get_question(const std::string& id) const { return ok(progress(load_session(id))); }

  Response post_answer(const std::string& id, const nlohmann::json& body) {
    if (!body.contains("index") || !body.at("index").is_number_unsigned())
      throw Error(Errc::validation, "answer needs a non-negative integer 'index'", "index");
    if (!body.contains("answer") || !body.at("answer").is_number())
      throw Error(Errc::validation, "answer needs a numeric 'answer'", "answer");
    // Load, check index, append and store under one lock so concurrent
    // submissions for the same index cannot both succeed.
    std::lock_guard lock(session_mu_);
    Session s = load_session(id);
    s = submit_answer(s, body.at("index").get<std::size_t>(), body.at("answer").get<double>());
    store_.put_session(id, session_to_json(s).dump());
    return ok(progress(s));
  }

  Response finalize(const std::string& id, const nlohmann::json& body) {
    Session s = load_session(id);
    auto diag = finalize_with_diagnostics(s);
    ProfileDocument doc{body.value("owner", std::string()), diag.profile, profile_fingerprint(diag.profile), s};
    const auto bytes = profile_document_to_json(doc).dump();
    auto entry = store_.put("profile", bytes, doc.owner, doc.fingerprint);
    return ok({{"profile_id", entry.id},
               {"fingerprint", doc.fingerprint},
               {"profile", profile_to_json(doc.profile)},
               {"residuals", diag.residuals}},
              201);
  }

  // -- documents ------------------------------------------------------------

  Response list(const std::string& kind) const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& e : store_.list(kind)) arr.push_back(entry_to_json(e));
    return ok({{kind + "s", arr}});
  }

  Response fetch(const std::string& kind, const std::string& id) const {
    auto bytes = store_.get(kind, id);
    if (!bytes) throw Error(Errc::not_found, "unknown " + kind + " '" + id + "'", kind + "_id");
    return {200, *bytes};
  }

  Response store_profile(const std::string& bytes) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(bytes);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(Errc::malformed, std::string("profile document is not valid JSON: ") + e.what(), "body");
    }
    auto doc = parse_profile_document(j);
    auto entry = store_.put("profile", bytes, doc.owner, doc.fingerprint);
    return ok({{"id", entry.id}, {"fingerprint", doc.fingerprint}, {"created", entry.created}}, 201);
  }

  Response store_kb(const std::string& bytes) {
    auto kb = load_knowledge_base(std::string_view(bytes));
    auto entry = store_.put("kb", bytes, kb.name, fnv1a_hex(bytes));
    nlohmann::json slots = nlohmann::json::array();
    for (const auto& s : kb.slots) slots.push_back({{"id", s.id}, {"materials", s.materials}});
    return ok({{"id", entry.id}, {"fingerprint", entry.fingerprint}, {"created", entry.created}, {"slots", slots}},
              201);
  }

  // -- evaluation -----------------------------------------------------------

  Response evaluate(const nlohmann::json& body) {
    for (const char* key : {"kb_id", "profile_id", "facts"})
      if (!body.contains(key)) throw Error(Errc::validation, std::string("missing '") + key + "'", key);
    const auto kb_id = body.at("kb_id").get<std::string>();
    const auto profile_id = body.at("profile_id").get<std::string>();
    auto kb_bytes = store_.get("kb", kb_id);
    if (!kb_bytes) throw Error(Errc::not_found, "unknown kb '" + kb_id + "'", "kb_id");
    auto profile_bytes = store_.get("profile", profile_id);
    if (!profile_bytes) throw Error(Errc::not_found, "unknown profile '" + profile_id + "'", "profile_id");
    const auto facts = parse_facts(body.at("facts"));
    const auto kb = load_knowledge_base(std::string_view(*kb_bytes));
    const auto doc = parse_profile_document(nlohmann::json::parse(*profile_bytes));
    const auto mode = body.value("mode", std::string("integrated"));
    if (mode == "integrated") return ok(result_to_json(evaluate_integrated(kb, facts, doc.profile)));
    if (mode == "compare") return ok(comparison_to_json(compare_modes(kb, facts, doc.profile)));
    throw Error(Errc::validation, "mode must be 'integrated' or 'compare'", "mode");
  }

  static Response fit(const nlohmann::json& body) {
    const double lower = body.at("lower").get<double>();
    const double upper = body.at("upper").get<double>();
    Shape known;
    double known_value;
    if (body.contains("p")) {
      known = Shape::p;
      known_value = body.at("p").get<double>();
    } else if (body.contains("q")) {
      known = Shape::q;
      known_value = body.at("q").get<double>();
    } else {
      throw Error(Errc::validation, "give one of 'p' or 'q'", "p");
    }
    Statistic stat;
    double target;
    if (body.contains("mode")) {
      stat = Statistic::mode;
      target = body.at("mode").get<double>();
    } else if (body.contains("mean")) {
      stat = Statistic::mean;
      target = body.at("mean").get<double>();
    } else {
      throw Error(Errc::validation, "give one of 'mode' or 'mean'", "mode");
    }
    const auto spec = fit_beta(lower, upper, known, known_value, stat, target);
    return ok(beta_summary(spec, body.value("samples", 101)));
  }

 public:
  /// Fitted spec with its mean, mode and sampled density curve.
  static nlohmann::json beta_summary(const BetaSpec& spec, int samples) {
    nlohmann::json j = beta_to_json(spec);
    j["mean"] = beta_mean(spec);
    j["mode"] = spec.p + spec.q == 2.0 ? nlohmann::json(nullptr) : nlohmann::json(beta_mode(spec));
    nlohmann::json pts = nlohmann::json::array();
    samples = std::clamp(samples, 2, 2001);
    for (int i = 0; i < samples; ++i) {
      const double x = spec.lower + spec.range() * i / (samples - 1);
      pts.push_back({x, beta_density(spec, x)});
    }
    j["density"] = pts;
    return j;
  }

 private:
  DocumentStore& store_;
  std::mutex session_mu_;
};

}  // namespace maud::service
