#pragma once

// Scalar root bracketing and adaptive Gauss-Kronrod integration.

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <vector>

namespace maud::numeric {

/// Bisection on [lo, hi] where f(lo) and f(hi) differ in sign (a zero at
/// either end is accepted). Stops when the bracket is narrower than `width`.
template <class F>
double bisect(F&& f, double lo, double hi, double width, int max_iter = 400) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo < 0) == (fhi < 0)) throw std::domain_error("bisect: root not bracketed");
  for (int i = 0; i < max_iter && (hi - lo) > width; ++i) {
    double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return lo + 0.5 * (hi - lo);
}

/// One Newton step from x, kept only if it lands inside [lo, hi] and does
/// not increase |f|.
template <class F, class DF>
double newton_polish(F&& f, DF&& df, double x, double lo, double hi) {
  double fx = f(x);
  double d = df(x);
  if (d == 0.0 || !std::isfinite(d)) return x;
  double nx = x - fx / d;
  if (!(nx >= lo && nx <= hi)) return x;
  return std::abs(f(nx)) <= std::abs(fx) ? nx : x;
}

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int panels = 0;
};

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule on [-1, 1]. Neither
// rule samples the endpoints, so integrable endpoint singularities are fine.
inline constexpr std::array<double, 8> kronrod_nodes{
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kronrod_weights{
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> gauss_weights{
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel gk15(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kronrod = fc * kronrod_weights[7];
  double gauss = fc * gauss_weights[3];
  for (int i = 0; i < 7; ++i) {
    const double dx = h * kronrod_nodes[i];
    const double s = f(c - dx) + f(c + dx);
    kronrod += kronrod_weights[i] * s;
    if (i % 2 == 1) gauss += gauss_weights[i / 2] * s;
  }
  return {a, b, kronrod * h, std::abs((kronrod - gauss) * h)};
}

}  // namespace detail

/// Globally adaptive G7-K15 quadrature: the panel with the largest error
/// estimate is bisected until the summed estimate drops below `abs_tol`.
template <class F>
QuadratureResult integrate(F f, double a, double b, double abs_tol = 1e-10,
                           int max_panels = 20000) {
  std::priority_queue<detail::Panel> heap;
  heap.push(detail::gk15(f, a, b));
  double total = heap.top().value;
  double err = heap.top().error;
  int panels = 1;
  while (err > abs_tol && panels < max_panels) {
    auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) {
      // Panel cannot be split further in double precision.
      heap.push({worst.a, worst.b, worst.value, 0.0});
      err -= worst.error;
      continue;
    }
    auto left = detail::gk15(f, worst.a, mid);
    auto right = detail::gk15(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++panels;
  }
  // Re-sum to shed the drift of incremental updates.
  double sum = 0.0, esum = 0.0;
  std::vector<detail::Panel> all;
  all.reserve(heap.size());
  while (!heap.empty()) {
    all.push_back(heap.top());
    heap.pop();
  }
  std::sort(all.begin(), all.end(), [](auto& x, auto& y) { return x.a < y.a; });
  for (auto& p : all) {
    sum += p.value;
    esum += p.error;
  }
  return {sum, esum, panels};
}

}  // namespace maud::numeric
