#pragma once

// Small numeric helpers shared by the solvers: bracketed scalar maximization,
// monotone-predicate bisection, and ordinary least squares on pairs.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace powergame::numeric {

inline std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v;
  if (n <= 0) return v;
  v.reserve(static_cast<size_t>(n));
  if (n == 1) {
    v.push_back(lo);
    return v;
  }
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (int i = 0; i < n; ++i) v.push_back(i == n - 1 ? hi : lo + step * i);
  return v;
}

struct ScalarMax {
  double x = 0.0;
  double value = 0.0;
};

// Golden-section maximization of f on [lo, hi] to absolute x-tolerance tol.
// Also checks the endpoints, so boundary optima are returned exactly.
template <typename F>
ScalarMax golden_section_max(F&& f, double lo, double hi, double tol) {
  if (hi < lo) std::swap(lo, hi);
  constexpr double invphi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = f(x1);
    }
  }
  ScalarMax best{x1, f1};
  if (f2 > best.value) best = {x2, f2};
  const double flo = f(lo), fhi = f(hi);
  // Endpoint ties go to the endpoint (exact boundary coordinates matter).
  if (flo >= best.value) best = {lo, flo};
  if (fhi >= best.value) best = {hi, fhi};
  return best;
}

// Smallest point in [lo, hi] where a monotone predicate turns true, located
// to absolute tolerance tol.  Requires pred(lo) == false, pred(hi) == true.
template <typename P>
double bisect_first_true(P&& pred, double lo, double hi, double tol) {
  if (!(hi > lo)) throw std::invalid_argument("bisect_first_true: empty bracket");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (pred(mid))
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

// OLS fit of w = intercept + slope * x.
inline LineFit least_squares(const std::vector<std::pair<double, double>>& xw) {
  const size_t n = xw.size();
  if (n < 2) throw std::invalid_argument("least_squares: need at least two points");
  double sx = 0.0, sw = 0.0;
  for (const auto& [x, w] : xw) {
    sx += x;
    sw += w;
  }
  const double mx = sx / static_cast<double>(n);
  const double mw = sw / static_cast<double>(n);
  double sxx = 0.0, sxw = 0.0;
  for (const auto& [x, w] : xw) {
    sxx += (x - mx) * (x - mx);
    sxw += (x - mx) * (w - mw);
  }
  if (sxx <= 0.0) throw std::invalid_argument("least_squares: degenerate x values");
  LineFit fit;
  fit.slope = sxw / sxx;
  fit.intercept = mw - fit.slope * mx;
  return fit;
}

}  // namespace powergame::numeric
