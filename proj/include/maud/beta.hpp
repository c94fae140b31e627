#pragma once

// Four-parameter beta distributions for uncertain attribute levels.

#include <cmath>
#include <optional>
#include <string>
#include <variant>

#include "maud/error.hpp"

namespace maud {

/// Beta density on (lower, upper) with shapes p (toward lower) and q.
/// Shapes below 1 (U-shaped densities) are not supported.
struct BetaSpec {
  double lower = 0.0;
  double upper = 1.0;
  double p = 1.0;
  double q = 1.0;

  double range() const { return upper - lower; }
  bool operator==(const BetaSpec&) const = default;
};

inline void validate(const BetaSpec& s, const std::string& field = "beta") {
  if (!std::isfinite(s.lower) || !std::isfinite(s.upper) || !(s.lower < s.upper))
    throw Error(Errc::invalid_beta, "beta support requires lower < upper", field);
  if (!std::isfinite(s.p) || !(s.p >= 1.0))
    throw Error(Errc::invalid_beta, "shape p must be >= 1", field + ".p");
  if (!std::isfinite(s.q) || !(s.q >= 1.0))
    throw Error(Errc::invalid_beta, "shape q must be >= 1", field + ".q");
}

inline BetaSpec make_beta(double lower, double upper, double p, double q) {
  BetaSpec s{lower, upper, p, q};
  validate(s);
  return s;
}

namespace detail {

inline bool is_integer(double v) { return v == std::floor(v); }

/// log(Gamma(p + q) / (Gamma(p) Gamma(q))). Small integer shapes use exact
/// factorials; everything else goes through lgamma.
inline double log_beta_normalizer(double p, double q) {
  if (is_integer(p) && is_integer(q) && p + q <= 171.0) {
    // (p+q-1)! / ((p-1)! (q-1)!) computed as a running product.
    double ratio = 1.0;
    const int ip = static_cast<int>(p), iq = static_cast<int>(q);
    const int small = std::min(ip, iq) - 1;
    const int big = std::max(ip, iq) - 1;
    for (int i = 1; i <= small; ++i) ratio *= static_cast<double>(big + i) / i;
    // multiply by (p+q-1) once more for the missing factor
    ratio *= static_cast<double>(ip + iq - 1);
    return std::log(ratio);
  }
  return std::lgamma(p + q) - std::lgamma(p) - std::lgamma(q);
}

}  // namespace detail

/// Density on the normalized support y in [0, 1].
inline double beta_density_unit(double p, double q, double y) {
  if (y < 0.0 || y > 1.0) return 0.0;
  const double lognorm = detail::log_beta_normalizer(p, q);
  double logv = lognorm;
  if (p != 1.0) {
    if (y == 0.0) return 0.0;
    logv += (p - 1.0) * std::log(y);
  }
  if (q != 1.0) {
    if (y == 1.0) return 0.0;
    logv += (q - 1.0) * std::log1p(-y);
  }
  return std::exp(logv);
}

inline double beta_density(const BetaSpec& s, double x) {
  if (x < s.lower || x > s.upper) return 0.0;
  const double r = s.range();
  return beta_density_unit(s.p, s.q, (x - s.lower) / r) / r;
}

inline double beta_mean(const BetaSpec& s) { return s.lower + s.range() * s.p / (s.p + s.q); }

inline double beta_variance(const BetaSpec& s) {
  const double n = s.p + s.q;
  return s.range() * s.range() * s.p * s.q / (n * n * (n + 1.0));
}

inline double beta_mode(const BetaSpec& s) {
  if (s.p + s.q == 2.0)
    throw Error(Errc::undefined_mode, "uniform distribution has no unique mode", "beta");
  return s.lower + s.range() * (s.p - 1.0) / (s.p + s.q - 2.0);
}

enum class Shape { p, q };
enum class Statistic { mode, mean };

/// Solves for the unknown shape so that the chosen statistic hits `target`.
/// Infeasible targets throw with the feasible target interval in details.
inline BetaSpec fit_beta(double lower, double upper, Shape known, double known_value,
                         Statistic statistic, double target) {
  if (!std::isfinite(lower) || !std::isfinite(upper) || !(lower < upper))
    throw Error(Errc::invalid_beta, "fit requires lower < upper", "lower");
  if (!std::isfinite(known_value) || !(known_value >= 1.0))
    throw Error(Errc::invalid_beta, "known shape must be >= 1", known == Shape::p ? "p" : "q");
  const char* target_field = statistic == Statistic::mode ? "mode" : "mean";
  if (!std::isfinite(target) || !(target > lower && target < upper))
    throw Error(Errc::domain, std::string(target_field) + " must lie strictly inside (lower, upper)",
                target_field, {{"lower", lower}, {"upper", upper}});

  const double r = upper - lower;
  const double t = (target - lower) / r;
  double unknown = 0.0;
  double feasible_lo = lower, feasible_hi = upper;
  if (statistic == Statistic::mean) {
    if (known == Shape::p) {
      unknown = known_value * (1.0 - t) / t;  // q
      feasible_hi = lower + r * known_value / (known_value + 1.0);
    } else {
      unknown = known_value * t / (1.0 - t);  // p
      feasible_lo = lower + r / (known_value + 1.0);
    }
  } else {
    if (!(known_value > 1.0))
      throw Error(Errc::infeasible_fit, "a mode target needs the known shape to exceed 1",
                  known == Shape::p ? "p" : "q");
    if (known == Shape::p)
      unknown = (known_value - 1.0) / t - known_value + 2.0;  // q
    else
      unknown = (1.0 + t * (known_value - 2.0)) / (1.0 - t);  // p
  }
  if (!(unknown >= 1.0) || !std::isfinite(unknown))
    throw Error(Errc::infeasible_fit,
                std::string(target_field) + " target requires a shape below 1; feasible " +
                    target_field + " interval is [" + std::to_string(feasible_lo) + ", " +
                    std::to_string(feasible_hi) + "]",
                target_field, {{"feasible_lower", feasible_lo}, {"feasible_upper", feasible_hi}});
  BetaSpec s{lower, upper, known == Shape::p ? known_value : unknown,
             known == Shape::q ? known_value : unknown};
  return s;
}

/// Beta on a fixed support matching a given mean and variance.
inline BetaSpec beta_from_moments(double lower, double upper, double mean, double variance) {
  const double r = upper - lower;
  const double t = (mean - lower) / r;
  const double v = variance / (r * r);
  if (!(t > 0.0 && t < 1.0) || !(v > 0.0) || !(v < t * (1.0 - t)))
    throw Error(Errc::invalid_beta, "moments are not attainable by a beta on this support");
  const double n = t * (1.0 - t) / v - 1.0;
  BetaSpec s{lower, upper, t * n, (1.0 - t) * n};
  if (s.p < 1.0 || s.q < 1.0)
    throw Error(Errc::invalid_beta, "moment-matched beta would be U-shaped");
  return s;
}

/// A per-attribute performance estimate: a sure level or a beta.
struct AttributeEstimate {
  std::string attribute;
  std::variant<double, BetaSpec> value;

  bool is_point() const { return std::holds_alternative<double>(value); }
  double point() const { return std::get<double>(value); }
  const BetaSpec& beta() const { return std::get<BetaSpec>(value); }
  double mean() const { return is_point() ? point() : beta_mean(beta()); }
  bool operator==(const AttributeEstimate&) const = default;
};

}  // namespace maud
