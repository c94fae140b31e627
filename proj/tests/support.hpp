#pragma once

#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "maud/maud.hpp"

namespace testing_support {

inline std::string data_path(const std::string& name) { return std::string(MAUD_DATA_DIR) + "/" + name; }

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline nlohmann::json data_json(const std::string& name) { return nlohmann::json::parse(slurp(data_path(name))); }

inline maud::KnowledgeBase bumper_kb() { return maud::load_knowledge_base(data_json("bumper_kb.json")); }
inline maud::FactSet truck_facts() { return maud::parse_facts(data_json("truck_facts.json")); }
inline maud::UserProfile fixture_profile(const std::string& which) {
  return maud::parse_profile_document(data_json(which + "_profile.json")).profile;
}

inline maud::AttributeSpec unit_attribute(const std::string& id = "x") {
  return {id, id, "", 0.0, 1.0, maud::Direction::increasing_preferred};
}

/// Random attribute with either direction and a random span.
inline maud::AttributeSpec random_attribute(std::mt19937_64& rng, const std::string& id) {
  std::uniform_real_distribution<double> lo(-50.0, 50.0), span(0.5, 100.0);
  const double a = lo(rng), b = a + span(rng);
  if (rng() & 1) return {id, id, "", b, a, maud::Direction::decreasing_preferred};
  return {id, id, "", a, b, maud::Direction::increasing_preferred};
}

inline std::vector<double> random_k(std::mt19937_64& rng, std::size_t n, double lo = 0.05, double hi = 0.95) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> k(n);
  for (auto& v : k) v = d(rng);
  return k;
}

template <class F>
maud::Errc error_code(F&& f) {
  try {
    f();
  } catch (const maud::Error& e) {
    return e.code();
  }
  return maud::Errc::io;  // sentinel: nothing thrown
}

}  // namespace testing_support
