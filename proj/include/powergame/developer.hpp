#pragma once

// Developer stage: exact best response x*(y) by candidate enumeration.
//
// Profit is piecewise in x around the coverage point k*x^(1+alpha) = y.  On
// each piece it is a power function whose maximum sits at a piece boundary or
// at an interior stationary point, so the global argmax always lies in a
// five-point candidate set:
//   market-led   (lambda >= 1+alpha): {0, 1, coupling point}
//   resource-led (lambda <  1+alpha): those plus the stationary capabilities
//       f(c) = (theta*lambda / ((1+alpha)*c*k))^(1/(1+alpha-lambda))
//       for c in {c_f, c_r}, each capped at 1 and kept only when it lands in
//       its own cost branch.
// Ties break toward larger x, which makes x*(y) right-continuous at the
// activation and frontier thresholds.

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "powergame/model.hpp"
#include "powergame/numeric.hpp"

namespace powergame {

enum class ScalingRegime { MarketLed, ResourceLed };

enum class ResponseZone { Inactive, Coupling, DecouplingFossil, DecouplingRenewable };

inline const char* to_string(ScalingRegime r) {
  return r == ScalingRegime::MarketLed ? "market-led" : "resource-led";
}

inline const char* to_string(ResponseZone z) {
  switch (z) {
    case ResponseZone::Inactive: return "inactive";
    case ResponseZone::Coupling: return "coupling";
    case ResponseZone::DecouplingFossil: return "decoupling-fossil";
    case ResponseZone::DecouplingRenewable: return "decoupling-renewable";
  }
  return "?";
}

inline ScalingRegime scaling_regime(const ModelParams& p) {
  return p.lambda >= 1.0 + p.alpha ? ScalingRegime::MarketLed : ScalingRegime::ResourceLed;
}

// Uncapped stationary capability of the fixed-cost branch with energy price c.
// Only defined in the resource-led regime; callers cap at 1.
inline double f_threshold(double c, const ModelParams& p) {
  if (!(c > 0.0)) throw std::domain_error("f_threshold: price must be positive");
  if (p.lambda >= 1.0 + p.alpha)
    throw std::domain_error("f_threshold: defined only for lambda < 1+alpha");
  const double base = p.theta * p.lambda / ((1.0 + p.alpha) * c * p.k);
  return std::pow(base, 1.0 / (1.0 + p.alpha - p.lambda));
}

// Capability whose demand exactly exhausts y.
inline double coupling_capability(double y, const ModelParams& p) {
  y = detail::check_y(y, p);
  return std::pow(y / p.k, 1.0 / (1.0 + p.alpha));
}

struct ResponseThresholds {
  ScalingRegime regime = ScalingRegime::MarketLed;
  double theta_bar = 0.0;  // (1+alpha)*c_f*k/lambda, the frontier-decoupling bar
  // Resource-led stationary capabilities (uncapped) and their zone bounds
  // y_lo = k*f(c_f)^(1+alpha), y_hi = k*f(c_r)^(1+alpha); either may exceed k.
  double f_cf = std::numeric_limits<double>::quiet_NaN();
  double f_cr = std::numeric_limits<double>::quiet_NaN();
  double y_lo = std::numeric_limits<double>::quiet_NaN();
  double y_hi = std::numeric_limits<double>::quiet_NaN();
  // Market-led switch capacities: activation (x* leaves 0) and frontier
  // (x* reaches 1).  +inf means "not reached on [0,k]".  Filled by
  // response_thresholds(); best_response() leaves them NaN.
  double y1 = std::numeric_limits<double>::quiet_NaN();
  double y2 = std::numeric_limits<double>::quiet_NaN();
  // Closed-form cross-checks, set when their preconditions hold.
  std::optional<double> y1_closed;
  std::optional<double> y2_closed;
};

struct Candidate {
  double x = 0.0;
  double profit = 0.0;
};

struct BestResponse {
  double x_star = 0.0;
  ResponseZone zone = ResponseZone::Inactive;
  std::vector<Candidate> candidates;
  ResponseThresholds thresholds;
};

namespace detail {

inline ResponseThresholds cheap_thresholds(const ModelParams& p) {
  ResponseThresholds rt;
  rt.regime = scaling_regime(p);
  rt.theta_bar = (1.0 + p.alpha) * p.c_f * p.k / p.lambda;
  if (rt.regime == ScalingRegime::ResourceLed) {
    rt.f_cf = f_threshold(p.c_f, p);
    rt.f_cr = f_threshold(p.c_r, p);
    rt.y_lo = p.k * std::pow(rt.f_cf, 1.0 + p.alpha);
    rt.y_hi = p.k * std::pow(rt.f_cr, 1.0 + p.alpha);
  }
  return rt;
}

}  // namespace detail

inline BestResponse best_response(double y, const ModelParams& p) {
  y = detail::check_y(y, p);
  BestResponse br;
  br.thresholds = detail::cheap_thresholds(p);

  const double x_c = coupling_capability(y, p);
  std::vector<Candidate>& cands = br.candidates;
  cands.reserve(5);
  auto add = [&](double x) { cands.push_back({x, developer_profit(x, y, p)}); };
  add(0.0);
  add(1.0);
  add(x_c);
  if (br.thresholds.regime == ScalingRegime::ResourceLed) {
    const double xf = std::min(br.thresholds.f_cf, 1.0);
    if (energy_demand(xf, p) > y) add(xf);
    const double xr = std::min(br.thresholds.f_cr, 1.0);
    if (energy_demand(xr, p) <= y) add(xr);
  }

  const Candidate* best = &cands.front();
  for (const Candidate& c : cands) {
    const double tol = kTieRelTol * std::max(1.0, std::fabs(best->profit));
    if (c.profit > best->profit + tol ||
        (c.profit >= best->profit - tol && c.x > best->x)) {
      best = &c;
    }
  }
  br.x_star = best->x;

  if (br.x_star <= kZeroTol) {
    br.zone = ResponseZone::Inactive;
  } else if (std::fabs(br.x_star - x_c) <= 1e-9 * std::max(1.0, x_c)) {
    br.zone = ResponseZone::Coupling;
  } else if (energy_demand(br.x_star, p) <= y * (1.0 + kBranchRelTol)) {
    br.zone = ResponseZone::DecouplingRenewable;
  } else {
    br.zone = ResponseZone::DecouplingFossil;
  }
  return br;
}

namespace detail {

// G(y) = theta*((y/k)^(lambda/(1+alpha)) - 1) - c_f*k*(y/k - 1); its root
// below k is the closed-form frontier capacity when theta > theta_bar.
inline double frontier_gap(double t, const ModelParams& p) {
  return p.theta * (std::pow(t, p.lambda / (1.0 + p.alpha)) - 1.0) -
         p.c_f * p.k * (t - 1.0);
}

inline void fill_closed_forms(ResponseThresholds& rt, const ModelParams& p) {
  const double gap = p.lambda - 1.0 - p.alpha;
  if (gap <= 1e-9 || p.theta <= rt.theta_bar) return;  // knife edge or case y2 = k
  // Activation capacity where the coupling profit first matches zero:
  // y1_0 = k^(lambda/gap) * (c_r/theta)^((1+alpha)/gap), computed in logs.
  const double log_y1 =
      (p.lambda * std::log(p.k) + (1.0 + p.alpha) * std::log(p.c_r / p.theta)) / gap;
  if (log_y1 > std::log(p.k) + 30.0) return;  // numerically out of range
  const double y1c = std::exp(log_y1);
  const double F = p.c_f * p.k - p.theta - (p.c_f - p.c_r) * y1c;
  if (F > 0.0 && y1c <= p.k) {
    // Non-degenerate case: activation at y1_0, frontier at the root of G.
    rt.y1_closed = y1c;
    if (p.theta < p.c_f * p.k) {
      double lo = 0.0, hi = p.k * (1.0 - 1e-9);
      if (frontier_gap(lo / p.k, p) > 0.0 && frontier_gap(hi / p.k, p) < 0.0) {
        while (hi - lo > 1e-12 * p.k) {
          const double mid = 0.5 * (lo + hi);
          (frontier_gap(mid / p.k, p) > 0.0 ? lo : hi) = mid;
        }
        rt.y2_closed = 0.5 * (lo + hi);
      }
    }
  } else {
    // Degenerate case: x* jumps 0 -> 1 at (c_f*k - theta)/(c_f - c_r).
    const double y12 = std::max(0.0, (p.c_f * p.k - p.theta) / (p.c_f - p.c_r));
    rt.y1_closed = y12;
    rt.y2_closed = y12;
  }
}

}  // namespace detail

// Full threshold report.  Market-led y1/y2 are recovered by a scan of the
// monotone map y -> x*(y) refined by bisection to 1e-10*k; the closed forms
// are attached when their preconditions hold so tests can cross-check.
inline ResponseThresholds response_thresholds(const ModelParams& p) {
  ResponseThresholds rt = detail::cheap_thresholds(p);
  if (rt.regime == ScalingRegime::ResourceLed) return rt;

  const double inf = std::numeric_limits<double>::infinity();
  const double tol_y = 1e-10 * p.k;
  auto active = [&](double y) { return best_response(y, p).x_star > kZeroTol; };
  auto at_frontier = [&](double y) {
    return best_response(y, p).x_star >= 1.0 - kZeroTol;
  };

  const int n = 2049;
  const auto grid = numeric::linspace(0.0, p.k, n);
  rt.y1 = inf;
  rt.y2 = inf;
  if (active(0.0)) {
    rt.y1 = 0.0;
  } else {
    for (int i = 1; i < n; ++i) {
      if (active(grid[i])) {
        rt.y1 = numeric::bisect_first_true(active, grid[i - 1], grid[i], tol_y);
        break;
      }
    }
  }
  if (at_frontier(0.0)) {
    rt.y2 = 0.0;
  } else {
    for (int i = 1; i < n; ++i) {
      if (at_frontier(grid[i])) {
        rt.y2 = numeric::bisect_first_true(at_frontier, grid[i - 1], grid[i], tol_y);
        break;
      }
    }
  }
  detail::fill_closed_forms(rt, p);
  return rt;
}

}  // namespace powergame
