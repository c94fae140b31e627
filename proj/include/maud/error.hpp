#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

#include <json.hpp>

namespace maud {

/// Every failure the library can report. Each value maps to exactly one
/// machine-readable code (see code_name) so the service and CLI can render
/// errors without string matching.
enum class Errc {
  invalid_attribute,
  out_of_range,
  invalid_weights,
  alignment,
  domain,
  invalid_beta,
  undefined_mode,
  infeasible_fit,
  estimate_range,
  unsupported_shape,
  unsupported_profile,
  validation,
  degenerate_answer,
  extreme_answer,
  sequence,
  invalid_scaling,
  session_incomplete,
  schema,
  infeasible_design,
  infeasible_configuration,
  conventional_incomplete,
  kb_coverage,
  precondition,
  not_found,
  conflict,
  malformed,
  usage,
  io,
};

constexpr std::string_view code_name(Errc c) noexcept {
  switch (c) {
    case Errc::invalid_attribute: return "invalid_attribute";
    case Errc::out_of_range: return "out_of_range";
    case Errc::invalid_weights: return "invalid_weights";
    case Errc::alignment: return "alignment";
    case Errc::domain: return "domain";
    case Errc::invalid_beta: return "invalid_beta";
    case Errc::undefined_mode: return "undefined_mode";
    case Errc::infeasible_fit: return "infeasible_fit";
    case Errc::estimate_range: return "estimate_range";
    case Errc::unsupported_shape: return "unsupported_shape";
    case Errc::unsupported_profile: return "unsupported_profile";
    case Errc::validation: return "validation";
    case Errc::degenerate_answer: return "degenerate_answer";
    case Errc::extreme_answer: return "extreme_answer";
    case Errc::sequence: return "sequence";
    case Errc::invalid_scaling: return "invalid_scaling";
    case Errc::session_incomplete: return "session_incomplete";
    case Errc::schema: return "schema";
    case Errc::infeasible_design: return "infeasible_design";
    case Errc::infeasible_configuration: return "infeasible_configuration";
    case Errc::conventional_incomplete: return "conventional_incomplete";
    case Errc::kb_coverage: return "kb_coverage";
    case Errc::precondition: return "precondition";
    case Errc::not_found: return "not_found";
    case Errc::conflict: return "conflict";
    case Errc::malformed: return "malformed";
    case Errc::usage: return "usage";
    case Errc::io: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string message, std::string field = {},
        nlohmann::json details = nlohmann::json::object())
      : std::runtime_error(std::move(message)),
        code_(code),
        field_(std::move(field)),
        details_(std::move(details)) {}

  Errc code() const noexcept { return code_; }
  /// Dotted path of the offending input field, empty when not applicable.
  const std::string& field() const noexcept { return field_; }
  /// Structured extras, e.g. admissible bounds or blocking rule ids.
  const nlohmann::json& details() const noexcept { return details_; }

  nlohmann::json to_json() const {
    nlohmann::json j{{"code", code_name(code_)}, {"message", what()}};
    j["field"] = field_;
    if (!details_.empty()) j["details"] = details_;
    return j;
  }

 private:
  Errc code_;
  std::string field_;
  nlohmann::json details_;
};

}  // namespace maud
