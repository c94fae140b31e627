#pragma once

// Lottery-question elicitation of a multiplicative utility profile.
//
// Protocol: for each attribute in order, `ce_count` certainty-equivalent
// questions on the 50/50 lottery between the attribute's best and worst
// levels; then one probability-equivalence question per attribute, whose
// indifference probability is read directly as the scaling constant k_j.
// The session state is a pure function of its response log.

#include <chrono>
#include <cmath>
#include <ctime>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "maud/error.hpp"
#include "maud/numeric.hpp"
#include "maud/utility.hpp"

namespace maud {

enum class QuestionKind { certainty_equivalent, probability_equivalence };

constexpr std::string_view kind_name(QuestionKind k) {
  return k == QuestionKind::certainty_equivalent ? "certainty_equivalent"
                                                 : "probability_equivalence";
}

/// Closed interval unless `open`, in which case both ends are excluded.
struct AnswerDomain {
  double lower = 0.0;
  double upper = 1.0;
  bool open = false;

  bool admits(double v) const {
    if (!std::isfinite(v)) return false;
    return open ? (v > lower && v < upper) : (v >= lower && v <= upper);
  }
};

struct Question {
  std::size_t sequence = 0;
  QuestionKind kind = QuestionKind::certainty_equivalent;
  std::size_t attribute_index = 0;
  std::string attribute_id;
  int step = 0;  // CE repetition index; 0 for probability questions
  std::string prompt;
  AnswerDomain domain;
  // Lottery outcomes shown to the user. For CE: best/worst of the attribute
  // at probability 0.5. For probability equivalence: all-best vs all-worst.
  double lottery_probability = 0.5;
  double best = 1.0;
  double worst = 0.0;
};

struct Response {
  std::size_t sequence = 0;
  QuestionKind kind = QuestionKind::certainty_equivalent;
  std::string attribute;
  int step = 0;
  double answer = 0.0;
  std::string timestamp;
};

enum class SessionPhase { eliciting_utilities, eliciting_scaling, complete };

struct SessionState {
  SessionPhase phase = SessionPhase::eliciting_utilities;
  std::size_t attribute_index = 0;
  int step = 0;
};

inline constexpr int max_ce_count = 3;
inline constexpr double max_risk_coefficient = 50.0;
inline constexpr std::size_t min_attributes = 2;
inline constexpr std::size_t max_attributes = 12;

struct Session {
  std::string id;
  std::vector<AttributeSpec> attributes;
  int ce_count = 1;
  std::vector<Response> responses;

  std::size_t total_questions() const {
    return attributes.size() * static_cast<std::size_t>(ce_count + 1);
  }
  bool complete() const { return responses.size() >= total_questions(); }

  SessionState state() const {
    const std::size_t n = responses.size();
    const std::size_t ce_total = attributes.size() * static_cast<std::size_t>(ce_count);
    if (n < ce_total)
      return {SessionPhase::eliciting_utilities, n / ce_count, static_cast<int>(n % ce_count)};
    if (n < total_questions()) return {SessionPhase::eliciting_scaling, n - ce_total, 0};
    return {SessionPhase::complete, 0, 0};
  }
};

namespace detail {

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::string random_token() {
  std::random_device rd;
  std::mt19937_64 gen((static_cast<std::uint64_t>(rd()) << 32) ^ rd());
  std::ostringstream os;
  os << std::hex << gen() << gen();
  return os.str();
}

/// u_c(z) for the normalized exponential family.
inline double normalized_exponential(double c, double z) {
  if (std::abs(c) < linearity_threshold) return z;
  return std::expm1(-c * z) / std::expm1(-c);
}

/// d u_c(z) / dc.
inline double normalized_exponential_dc(double c, double z) {
  if (std::abs(c) < 1e-6) return 0.5 * z * (1.0 - z) * (1.0 + c * (1.0 - 2.0 * z) / 3.0);
  const double n = -std::expm1(-c * z);
  const double d = -std::expm1(-c);
  return (z * std::exp(-c * z) * d - n * std::exp(-c)) / (d * d);
}

/// Certainty equivalent (normalized) of the 50/50 best/worst lottery for a given c.
inline double ce_position(double c) {
  if (std::abs(c) < linearity_threshold) return 0.5;
  return -std::log1p(std::expm1(-c) / 2.0) / c;
}

}  // namespace detail

/// Normalized certainty equivalent implied by risk coefficient c; the inverse
/// of fitting a single CE answer.
inline double certainty_equivalent_for(const AttributeSpec& a, double c) {
  return a.from_normalized(detail::ce_position(c));
}

/// Admissible CE answers: levels whose fitted |c| stays within the bracket.
inline AnswerDomain ce_domain(const AttributeSpec& a) {
  const double z_lo = detail::ce_position(max_risk_coefficient);
  const double z_hi = detail::ce_position(-max_risk_coefficient);
  const double x1 = a.from_normalized(z_lo), x2 = a.from_normalized(z_hi);
  return {std::min(x1, x2), std::max(x1, x2), false};
}

inline Session start_session(std::vector<AttributeSpec> attributes, int ce_count = 1,
                             std::string id = {}) {
  if (attributes.size() < min_attributes || attributes.size() > max_attributes)
    throw Error(Errc::unsupported_profile, "a profile needs between 2 and 12 attributes",
                "attributes", {{"count", attributes.size()}});
  if (ce_count < 1 || ce_count > max_ce_count)
    throw Error(Errc::validation, "ce_count must be between 1 and 3", "ce_count");
  std::set<std::string> seen;
  for (std::size_t j = 0; j < attributes.size(); ++j) {
    const std::string field = "attributes[" + std::to_string(j) + "]";
    validate(attributes[j], field);
    if (!seen.insert(attributes[j].id).second)
      throw Error(Errc::validation, "duplicate attribute id '" + attributes[j].id + "'", field + ".id");
  }
  Session s;
  s.id = id.empty() ? detail::random_token() : std::move(id);
  s.attributes = std::move(attributes);
  s.ce_count = ce_count;
  return s;
}

inline std::optional<Question> next_question(const Session& s) {
  const auto st = s.state();
  if (st.phase == SessionPhase::complete) return std::nullopt;
  Question q;
  q.sequence = s.responses.size();
  q.attribute_index = st.attribute_index;
  const auto& a = s.attributes[st.attribute_index];
  q.attribute_id = a.id;
  std::ostringstream prompt;
  if (st.phase == SessionPhase::eliciting_utilities) {
    q.kind = QuestionKind::certainty_equivalent;
    q.step = st.step;
    q.domain = ce_domain(a);
    q.lottery_probability = 0.5;
    q.best = a.range_best;
    q.worst = a.range_worst;
    prompt << "A lottery gives " << a.label << " = " << a.range_best << ' ' << a.units
           << " with probability 0.5, otherwise " << a.range_worst << ' ' << a.units
           << ". Which sure level of " << a.label << " is just as attractive as the lottery?";
  } else {
    q.kind = QuestionKind::probability_equivalence;
    q.domain = {0.0, 1.0, true};
    q.lottery_probability = 0.0;
    q.best = 1.0;
    q.worst = 0.0;
    prompt << "Option A: " << a.label << " at its best (" << a.range_best << ' ' << a.units
           << ") with every other attribute at its worst. Option B: a lottery giving every "
              "attribute at its best with probability P, otherwise every attribute at its "
              "worst. At which P are you indifferent between A and B?";
  }
  q.prompt = prompt.str();
  return q;
}

/// Applies one answer. `sequence` must equal the pending question's sequence.
inline Session submit_answer(const Session& s, std::size_t sequence, double answer,
                             std::string timestamp = {}) {
  auto q = next_question(s);
  if (!q)
    throw Error(Errc::sequence, "session is already complete", "index",
                {{"expected", s.responses.size()}});
  if (sequence != q->sequence)
    throw Error(Errc::sequence,
                "answer index " + std::to_string(sequence) + " does not match pending question " +
                    std::to_string(q->sequence),
                "index", {{"expected", q->sequence}});
  if (!q->domain.admits(answer))
    throw Error(Errc::domain, "answer outside the admissible domain", "answer",
                {{"lower", q->domain.lower}, {"upper", q->domain.upper}, {"open", q->domain.open}});
  Session next = s;
  next.responses.push_back({q->sequence, q->kind, q->attribute_id, q->step, answer,
                            timestamp.empty() ? detail::utc_timestamp() : std::move(timestamp)});
  return next;
}

struct AttributeFit {
  SingleAttributeUtility utility;
  /// u(CE_i) - 0.5 for each response; all zero for a single answer.
  std::vector<double> residuals;
};

/// Fits the risk coefficient from certainty-equivalent answers to the 50/50
/// best/worst lottery. Several answers are reconciled by least squares on
/// the utility residuals.
inline AttributeFit fit_single_attribute(const AttributeSpec& a, std::span<const double> ce_answers) {
  validate(a);
  if (ce_answers.empty())
    throw Error(Errc::precondition, "at least one certainty equivalent is required",
                "responses");
  std::vector<double> z;
  std::vector<double> single;
  for (std::size_t i = 0; i < ce_answers.size(); ++i) {
    const double zi = a.normalized(ce_answers[i]);
    const std::string field = "responses[" + std::to_string(i) + "]";
    if (!(zi > 0.0 && zi < 1.0))
      throw Error(Errc::degenerate_answer, "certainty equivalent must lie strictly inside the range",
                  field);
    const double bound = max_risk_coefficient + 1.0;
    auto h = [zi](double c) { return detail::normalized_exponential(c, zi) - 0.5; };
    if (h(-bound) > 0.0 || h(bound) < 0.0)
      throw Error(Errc::extreme_answer,
                  "answer implies an extreme risk attitude; please re-answer", field,
                  {{"domain", {ce_domain(a).lower, ce_domain(a).upper}}});
    double c = numeric::bisect(h, -bound, bound, 1e-14);
    c = numeric::newton_polish(h, [zi](double cc) { return detail::normalized_exponential_dc(cc, zi); },
                               c, -bound, bound);
    if (std::abs(c) > max_risk_coefficient + 1e-9)
      throw Error(Errc::extreme_answer,
                  "answer implies an extreme risk attitude; please re-answer", field,
                  {{"domain", {ce_domain(a).lower, ce_domain(a).upper}}});
    z.push_back(zi);
    single.push_back(c);
  }

  double c = single.front();
  if (single.size() > 1) {
    const auto [lo_it, hi_it] = std::minmax_element(single.begin(), single.end());
    const double lo = *lo_it, hi = *hi_it;
    if (hi - lo > 0.0) {
      // Stationary point of sum (u_c(z_i) - 0.5)^2; the gradient is <= 0 at
      // the smallest single fit and >= 0 at the largest.
      auto grad = [&](double cc) {
        double g = 0.0;
        for (double zi : z)
          g += (detail::normalized_exponential(cc, zi) - 0.5) * detail::normalized_exponential_dc(cc, zi);
        return g;
      };
      c = numeric::bisect(grad, lo, hi, 1e-14);
    }
  }
  AttributeFit fit{make_exponential_utility(a, c), {}};
  for (double zi : z) fit.residuals.push_back(fit.utility.at_normalized(zi) - 0.5);
  return fit;
}

inline AttributeFit fit_single_attribute(const AttributeSpec& a, const std::vector<double>& answers) {
  return fit_single_attribute(a, std::span<const double>(answers));
}

struct ProfileFit {
  UserProfile profile;
  std::vector<std::vector<double>> residuals;  // per attribute
};

inline ProfileFit finalize_with_diagnostics(const Session& s) {
  if (!s.complete())
    throw Error(Errc::session_incomplete,
                "session has " + std::to_string(s.responses.size()) + " of " +
                    std::to_string(s.total_questions()) + " answers",
                "session");
  const std::size_t J = s.attributes.size();
  std::vector<double> risk(J), k(J);
  ProfileFit out;
  out.residuals.resize(J);
  for (std::size_t j = 0; j < J; ++j) {
    std::vector<double> ce;
    for (int step = 0; step < s.ce_count; ++step)
      ce.push_back(s.responses[j * s.ce_count + step].answer);
    auto fit = fit_single_attribute(s.attributes[j], ce);
    risk[j] = fit.utility.risk_coefficient();
    out.residuals[j] = std::move(fit.residuals);
    const double pi = s.responses[J * s.ce_count + j].answer;
    if (!(pi > 0.0 && pi < 1.0))
      throw Error(Errc::invalid_scaling, "indifference probability must lie in (0, 1)",
                  "responses[" + std::to_string(J * s.ce_count + j) + "]");
    k[j] = pi;
  }
  out.profile = make_profile(s.attributes, risk, k);
  return out;
}

inline UserProfile finalize_profile(const Session& s) { return finalize_with_diagnostics(s).profile; }

/// Rebuilds a session by feeding answers in order; throws on the first
/// rejected answer.
inline Session replay(const Session& log) {
  Session s = start_session(log.attributes, log.ce_count, log.id);
  for (const auto& r : log.responses) s = submit_answer(s, r.sequence, r.answer, r.timestamp);
  return s;
}

}  // namespace maud
