#pragma once

// Single-attribute exponential utilities and the multiplicative
// multiattribute aggregation with its master scaling constant.

#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "maud/error.hpp"
#include "maud/numeric.hpp"

namespace maud {

enum class Direction { increasing_preferred, decreasing_preferred };

struct AttributeSpec {
  std::string id;
  std::string label;
  std::string units;
  double range_worst = 0.0;
  double range_best = 1.0;
  Direction direction = Direction::increasing_preferred;

  double range_min() const { return std::min(range_worst, range_best); }
  double range_max() const { return std::max(range_worst, range_best); }
  bool contains(double x) const { return x >= range_min() && x <= range_max(); }

  /// Position of x on the worst->best axis; 0 at worst, 1 at best.
  double normalized(double x) const { return (x - range_worst) / (range_best - range_worst); }
  double from_normalized(double z) const { return range_worst + z * (range_best - range_worst); }

  bool operator==(const AttributeSpec&) const = default;
};

inline void validate(const AttributeSpec& a, const std::string& field = "attribute") {
  if (a.id.empty()) throw Error(Errc::invalid_attribute, "attribute id is empty", field + ".id");
  if (!std::isfinite(a.range_worst) || !std::isfinite(a.range_best))
    throw Error(Errc::invalid_attribute, "attribute '" + a.id + "' has a non-finite range", field);
  if (a.range_worst == a.range_best)
    throw Error(Errc::invalid_attribute, "attribute '" + a.id + "' has a degenerate range", field);
  const bool up = a.range_best > a.range_worst;
  if (up != (a.direction == Direction::increasing_preferred))
    throw Error(Errc::invalid_attribute,
                "attribute '" + a.id + "' direction disagrees with its worst/best orientation",
                field + ".direction");
}

/// Risk coefficients with magnitude below this are the linear limit.
inline constexpr double linearity_threshold = 1e-9;

/// Exponential utility normalized to 0 at the worst level and 1 at the best.
///
/// Stored in the normalized coordinate z = (x - worst) / (best - worst):
///   u(z) = (1 - exp(-c z)) / (1 - exp(-c)),   u(z) = z when c == 0.
/// c > 0 is concave (risk averse), c < 0 convex (risk seeking). In raw units
/// this is the a - b exp(s x) family; see raw_coefficients().
class SingleAttributeUtility {
 public:
  SingleAttributeUtility() = default;

  const AttributeSpec& attribute() const { return attribute_; }
  double risk_coefficient() const { return c_; }
  bool is_linear() const { return c_ == 0.0; }

  /// Utility at a normalized position; no range check.
  double at_normalized(double z) const {
    if (c_ == 0.0) return z;
    return std::expm1(-c_ * z) / std::expm1(-c_);
  }

  double operator()(double x) const {
    if (!std::isfinite(x) || !attribute_.contains(x))
      throw Error(Errc::out_of_range,
                  "level " + std::to_string(x) + " is outside the range of attribute '" +
                      attribute_.id + "'",
                  "x",
                  {{"lower", attribute_.range_min()}, {"upper", attribute_.range_max()}});
    return at_normalized(attribute_.normalized(x));
  }

  struct RawCoefficients {
    double a, b, exponent;  // u(x) = a - b * exp(exponent * x)
  };
  /// Coefficients of the a - b e^{s x} form in raw attribute units.
  /// Meaningless for the linear limit.
  RawCoefficients raw_coefficients() const {
    const double span = attribute_.range_best - attribute_.range_worst;
    const double denom = -std::expm1(-c_);
    const double s = -c_ / span;
    return {1.0 / denom, std::exp(c_ * attribute_.range_worst / span) / denom, s};
  }

  bool operator==(const SingleAttributeUtility&) const = default;

 private:
  friend SingleAttributeUtility make_exponential_utility(const AttributeSpec&, double);
  AttributeSpec attribute_;
  double c_ = 0.0;
};

inline SingleAttributeUtility make_exponential_utility(const AttributeSpec& attribute,
                                                       double risk_coefficient) {
  validate(attribute);
  if (!std::isfinite(risk_coefficient))
    throw Error(Errc::invalid_attribute, "risk coefficient must be finite", "risk_coefficient");
  SingleAttributeUtility u;
  u.attribute_ = attribute;
  u.c_ = std::abs(risk_coefficient) < linearity_threshold ? 0.0 : risk_coefficient;
  return u;
}

inline double evaluate_utility(const SingleAttributeUtility& u, double x) { return u(x); }

enum class AggregationMode { multiplicative, additive_limit };

/// |sum k - 1| at or below this selects the additive form.
inline constexpr double additive_tolerance = 1e-9;

struct MasterConstant {
  double K = 0.0;
  AggregationMode mode = AggregationMode::additive_limit;
};

namespace detail {
// prod(1 + K k_j) - 1 - K, evaluated through log1p/expm1 so it stays
// accurate for K near the trivial root.
inline double master_residual(std::span<const double> k, double K) {
  double s = 0.0;
  for (double kj : k) s += std::log1p(K * kj);
  return std::expm1(s) - K;
}
inline double master_residual_slope(std::span<const double> k, double K) {
  double s = 0.0, d = 0.0;
  for (double kj : k) {
    s += std::log1p(K * kj);
    d += kj / (1.0 + K * kj);
  }
  return std::exp(s) * d - 1.0;
}
}  // namespace detail

/// Nontrivial root of 1 + K = prod(1 + K k_j).
inline MasterConstant solve_master_constant(std::span<const double> k) {
  if (k.size() < 2)
    throw Error(Errc::invalid_weights, "at least two scaling constants are required",
                "scaling_constants");
  for (std::size_t j = 0; j < k.size(); ++j) {
    if (!(k[j] > 0.0 && k[j] < 1.0))
      throw Error(Errc::invalid_weights, "scaling constant must lie in (0, 1)",
                  "scaling_constants[" + std::to_string(j) + "]");
  }
  const double sum = std::accumulate(k.begin(), k.end(), 0.0);
  if (std::abs(sum - 1.0) <= additive_tolerance) return {0.0, AggregationMode::additive_limit};

  auto g = [&](double K) { return detail::master_residual(k, K); };
  auto dg = [&](double K) { return detail::master_residual_slope(k, K); };
  double lo, hi;
  if (sum < 1.0) {
    lo = 1e-12;
    hi = 1.0;
    while (g(hi) <= 0.0) {
      hi *= 2.0;
      if (hi > 1e300) throw Error(Errc::invalid_weights, "master constant did not bracket");
    }
    // g(lo) is negative unless sum is within rounding of 1.
  } else {
    lo = -1.0 + 1e-12;
    hi = -1e-12;
  }
  double K = numeric::bisect(g, lo, hi, 1e-12 * std::max(1.0, std::abs(hi)));
  K = numeric::newton_polish(g, dg, K, lo, hi);
  return {K, AggregationMode::multiplicative};
}

inline MasterConstant solve_master_constant(const std::vector<double>& k) {
  return solve_master_constant(std::span<const double>(k));
}

struct UserProfile {
  std::vector<AttributeSpec> attributes;
  std::vector<SingleAttributeUtility> utilities;
  std::vector<double> scaling_constants;
  double master_constant = 0.0;
  AggregationMode aggregation_mode = AggregationMode::additive_limit;

  std::size_t size() const { return attributes.size(); }
  std::ptrdiff_t index_of(std::string_view attribute_id) const {
    for (std::size_t j = 0; j < attributes.size(); ++j)
      if (attributes[j].id == attribute_id) return static_cast<std::ptrdiff_t>(j);
    return -1;
  }
  bool operator==(const UserProfile&) const = default;
};

/// Builds a profile, solving the master constant from the scaling constants.
inline UserProfile make_profile(std::vector<AttributeSpec> attributes,
                                const std::vector<double>& risk_coefficients,
                                std::vector<double> scaling_constants) {
  if (risk_coefficients.size() != attributes.size() ||
      scaling_constants.size() != attributes.size())
    throw Error(Errc::alignment, "utilities and scaling constants must align with attributes");
  UserProfile p;
  for (std::size_t j = 0; j < attributes.size(); ++j)
    p.utilities.push_back(make_exponential_utility(attributes[j], risk_coefficients[j]));
  auto mc = solve_master_constant(scaling_constants);
  p.attributes = std::move(attributes);
  p.scaling_constants = std::move(scaling_constants);
  p.master_constant = mc.K;
  p.aggregation_mode = mc.mode;
  return p;
}

/// Checks every profile invariant; throws validation errors naming the field.
inline void validate(const UserProfile& p) {
  const auto n = p.attributes.size();
  if (p.utilities.size() != n || p.scaling_constants.size() != n)
    throw Error(Errc::alignment, "utilities and scaling constants must align with attributes",
                "profile");
  for (std::size_t j = 0; j < n; ++j) {
    validate(p.attributes[j], "profile.attributes[" + std::to_string(j) + "]");
    if (!(p.utilities[j].attribute() == p.attributes[j]))
      throw Error(Errc::alignment, "utility does not belong to attribute '" + p.attributes[j].id + "'",
                  "profile.utilities[" + std::to_string(j) + "]");
  }
  auto mc = solve_master_constant(p.scaling_constants);
  if (mc.mode != p.aggregation_mode)
    throw Error(Errc::validation, "aggregation mode inconsistent with scaling constants",
                "profile.aggregation_mode");
  if (mc.mode == AggregationMode::multiplicative) {
    const double K = p.master_constant;
    if (!(K > -1.0) || K == 0.0 ||
        std::abs(detail::master_residual(p.scaling_constants, K)) > 1e-10)
      throw Error(Errc::validation, "master constant does not satisfy 1 + K = prod(1 + K k_j)",
                  "profile.master_constant");
  }
}

namespace detail {
inline void check_values(const UserProfile& profile, std::span<const double> u) {
  if (u.size() != profile.size())
    throw Error(Errc::alignment,
                "expected " + std::to_string(profile.size()) + " utility values, got " +
                    std::to_string(u.size()),
                "u_values");
  for (std::size_t j = 0; j < u.size(); ++j)
    if (!(u[j] >= 0.0 && u[j] <= 1.0))
      throw Error(Errc::domain, "utility value outside [0, 1]",
                  "u_values[" + std::to_string(j) + "]");
}
}  // namespace detail

/// Overall utility U = (prod(K k_j u_j + 1) - 1) / K, or sum k_j u_j in the
/// additive limit.
inline double aggregate(const UserProfile& profile, std::span<const double> u) {
  detail::check_values(profile, u);
  const auto& k = profile.scaling_constants;
  if (profile.aggregation_mode == AggregationMode::additive_limit) {
    double s = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) s += k[j] * u[j];
    return s;
  }
  const double K = profile.master_constant;
  double s = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) s += std::log1p(K * k[j] * u[j]);
  return std::expm1(s) / K;
}

inline double aggregate(const UserProfile& profile, const std::vector<double>& u) {
  return aggregate(profile, std::span<const double>(u));
}

/// Expected overall utility from independent per-attribute expectations.
/// The multiplicative form is multilinear, so substituting E[u_j] is exact.
inline double aggregate_expected(const UserProfile& profile, std::span<const double> expected_u) {
  return aggregate(profile, expected_u);
}

inline double aggregate_expected(const UserProfile& profile, const std::vector<double>& expected_u) {
  return aggregate(profile, std::span<const double>(expected_u));
}

}  // namespace maud
