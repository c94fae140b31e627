#pragma once

// Expected single-attribute utility of a beta-distributed level.
//
// Two evaluators:
//   * expected_utility_quadrature: adaptive G7-K15 on the normalized support,
//     the authoritative path.
//   * expected_utility_series: closed-form finite series for integer shapes.
//
// Series derivation. With y = (x - lower)/range and the utility written as
// u = (1 - exp(-c z)) / (1 - exp(-c)), z = z0 + rho*y, the expectation is
//   E[u] = (1 - exp(-c z0) M(lambda)) / (1 - exp(-c)),   lambda = -c rho,
// where M is the moment generating function of Beta(p, q) on [0, 1]:
//   M(lambda) = B(p,q)^-1 sum_{n=1..q} (-1)^(n-1) C(q-1, n-1) I(n+p-2, lambda)
//   I(m, lambda) = int_0^1 y^m e^(lambda y) dy
//                = e^lambda sum_{i=0..m} (-1)^i m!/(m-i)! / lambda^(i+1)
//                  + (-1)^(m+1) m! / lambda^(m+1).
// The inner sum runs to m (the repeated integration by parts of y^m), for
// every integer p >= 1 and q >= 1, including q = 1.
//
// The alternating terms grow like m!/lambda^(m+1), so the series cancels
// catastrophically in double precision once |lambda| is small. It is summed
// in 120-digit binary floating point, and refused when the observed
// cancellation would eat into the last 20 of those digits.

#include <cmath>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "maud/beta.hpp"
#include "maud/error.hpp"
#include "maud/numeric.hpp"
#include "maud/utility.hpp"

namespace maud {

inline constexpr double quadrature_tolerance = 1e-10;
inline constexpr int series_max_shape = 10;

/// Throws estimate_range unless the beta support sits inside the attribute range.
inline void check_support(const SingleAttributeUtility& u, const BetaSpec& spec) {
  const auto& a = u.attribute();
  if (spec.lower < a.range_min() || spec.upper > a.range_max())
    throw Error(Errc::estimate_range,
                "estimate support exceeds the range of attribute '" + a.id + "'", "estimate",
                {{"range_min", a.range_min()},
                 {"range_max", a.range_max()},
                 {"lower", spec.lower},
                 {"upper", spec.upper}});
}

inline double expected_utility_quadrature(const SingleAttributeUtility& u, const BetaSpec& spec) {
  validate(spec);
  check_support(u, spec);
  const auto& a = u.attribute();
  const double z0 = a.normalized(spec.lower);
  const double rho = spec.range() / (a.range_best - a.range_worst);
  const double lognorm = detail::log_beta_normalizer(spec.p, spec.q);
  auto integrand = [&](double y) {
    double logw = lognorm;
    if (spec.p != 1.0) logw += (spec.p - 1.0) * std::log(y);
    if (spec.q != 1.0) logw += (spec.q - 1.0) * std::log1p(-y);
    return u.at_normalized(z0 + rho * y) * std::exp(logw);
  };
  auto res = numeric::integrate(integrand, 0.0, 1.0, quadrature_tolerance);
  return std::clamp(res.value, 0.0, 1.0);
}

/// Expected utility from a point or beta estimate. Linear utilities use the
/// mean directly; integer shapes try the series first.
inline double expected_utility_series(const SingleAttributeUtility& u, const BetaSpec& spec);

inline double expected_utility(const SingleAttributeUtility& u, const AttributeEstimate& est) {
  if (est.is_point()) return u(est.point());
  const auto& spec = est.beta();
  validate(spec);
  check_support(u, spec);
  if (u.is_linear()) return u.at_normalized(u.attribute().normalized(beta_mean(spec)));
  if (detail::is_integer(spec.p) && detail::is_integer(spec.q) && spec.p <= series_max_shape &&
      spec.q <= series_max_shape) {
    try {
      return expected_utility_series(u, spec);
    } catch (const Error& e) {
      if (e.code() != Errc::unsupported_shape) throw;
    }
  }
  return expected_utility_quadrature(u, spec);
}

namespace detail {
using wide = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<120>>;
inline constexpr int wide_spare_digits = 20;
}  // namespace detail

inline double expected_utility_series(const SingleAttributeUtility& u, const BetaSpec& spec) {
  using detail::wide;
  validate(spec);
  if (!detail::is_integer(spec.p) || !detail::is_integer(spec.q) ||
      spec.p > series_max_shape || spec.q > series_max_shape)
    throw Error(Errc::unsupported_shape, "series needs integer shapes between 1 and 10", "beta");
  if (u.is_linear())
    throw Error(Errc::unsupported_shape, "series is for exponential utilities; use the mean",
                "risk_coefficient");
  check_support(u, spec);

  const auto& a = u.attribute();
  const int p = static_cast<int>(spec.p);
  const int q = static_cast<int>(spec.q);
  const wide c = u.risk_coefficient();
  const wide span = wide(a.range_best) - wide(a.range_worst);
  const wide z0 = (wide(spec.lower) - wide(a.range_worst)) / span;
  const wide rho = (wide(spec.upper) - wide(spec.lower)) / span;
  const wide lambda = -c * rho;
  const wide e_lambda = exp(lambda);

  std::vector<wide> factorial(p + q, wide(1));
  for (int i = 1; i < p + q; ++i) factorial[i] = factorial[i - 1] * i;
  auto binom = [&](int n, int k) { return factorial[n] / (factorial[k] * factorial[n - k]); };

  wide largest = 0;
  auto track = [&](const wide& v) {
    if (abs(v) > largest) largest = abs(v);
    return v;
  };

  // I(m, lambda)
  auto power_moment = [&](int m) {
    wide sum = 0;
    wide lam_pow = lambda;  // lambda^(i+1)
    for (int i = 0; i <= m; ++i) {
      wide term = factorial[m] / factorial[m - i] / lam_pow;
      if (i % 2) term = -term;
      sum += track(e_lambda * term);
      lam_pow *= lambda;
    }
    // lam_pow is now lambda^(m+2); the tail term needs lambda^(m+1)
    wide tail = factorial[m] / (lam_pow / lambda);
    if ((m + 1) % 2) tail = -tail;
    sum += track(tail);
    return sum;
  };

  wide mgf = 0;
  for (int n = 1; n <= q; ++n) {
    wide term = binom(q - 1, n - 1) * power_moment(n + p - 2);
    if ((n - 1) % 2) term = -term;
    mgf += term;
  }
  const wide norm = factorial[p + q - 1] / (factorial[p - 1] * factorial[q - 1]);
  mgf *= norm;
  largest *= norm * binom(q - 1, (q - 1) / 2);

  // Digits lost to cancellation: magnitude of the largest term over the result.
  const wide lost = log10(largest / abs(mgf));
  if (!(mgf > 0) || lost > std::numeric_limits<wide>::digits10 - detail::wide_spare_digits)
    throw Error(Errc::unsupported_shape, "series is ill-conditioned for this risk coefficient",
                "risk_coefficient");

  const wide numer = 1 - exp(-c * z0) * mgf;
  const wide denom = 1 - exp(-c);
  return std::clamp(static_cast<double>(numer / denom), 0.0, 1.0);
}

}  // namespace maud
