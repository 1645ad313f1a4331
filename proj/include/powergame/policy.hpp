#pragma once

// Policy stage: the policymaker maximizes
//   W(y) = eta*Pi(x*(y), y) - xi*D(x*(y), y) - phi(x*(y))*V(y)
// anticipating the developer's best response.  W is piecewise smooth between
// the response thresholds, so each piece is maximized separately (scan +
// golden section); ties break toward larger y.  Regime classification and
// the net-zero cost-reduction requirement are monotone bisections over d0
// and over the cost scale, respectively.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "powergame/developer.hpp"
#include "powergame/model.hpp"
#include "powergame/numeric.hpp"

namespace powergame {

inline double policy_welfare(double y, const ModelParams& p) {
  return welfare_at(best_response(y, p).x_star, y, p);
}

struct Equilibrium {
  double y_star = 0.0;
  double x_star = 0.0;
  double beta = 0.0;
  double demand = 0.0;     // TWh
  double emissions = 0.0;  // Gt
  double damages = 0.0;    // Gt, adaptation-adjusted
  double welfare = 0.0;    // billion USD
  ResponseZone zone = ResponseZone::Inactive;
  ScalingRegime regime = ScalingRegime::MarketLed;
  bool carbon_free = true;
};

namespace detail {

// Right ends of non-final pieces are open (x*(y) jumps there), so they are
// probed at boundary - kOpenEndShrink*k; the boundary itself is evaluated as
// the left end of the next piece.
inline constexpr double kOpenEndShrink = 1e-9;

inline std::vector<double> piece_breaks(const ModelParams& p, const ResponseThresholds& rt) {
  std::vector<double> breaks{0.0, p.k};
  auto push = [&](double v) {
    if (std::isfinite(v) && v > 1e-12 * p.k && v < p.k * (1.0 - 1e-12)) breaks.push_back(v);
  };
  if (rt.regime == ScalingRegime::MarketLed) {
    push(rt.y1);
    push(rt.y2);
  } else {
    push(rt.y_lo);
    push(rt.y_hi);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end(),
                           [&](double a, double b) { return b - a <= 1e-12 * p.k; }),
               breaks.end());
  return breaks;
}

}  // namespace detail

inline Equilibrium optimal_capacity(const ModelParams& p) {
  validate(p);
  const ResponseThresholds rt = response_thresholds(p);
  const auto breaks = detail::piece_breaks(p, rt);
  auto W = [&](double y) { return policy_welfare(y, p); };

  double best_y = 0.0;
  double best_w = -std::numeric_limits<double>::infinity();
  auto consider = [&](double y) {
    const double w = W(y);
    const double tol = kTieRelTol * std::max(1.0, std::fabs(best_w));
    if (w > best_w + tol || (w >= best_w - tol && y > best_y)) {
      best_w = w;
      best_y = y;
    }
  };

  const int scan_n = 2000;
  for (size_t s = 0; s + 1 < breaks.size(); ++s) {
    const double a = breaks[s];
    const bool final_piece = (s + 2 == breaks.size());
    const double b = final_piece ? breaks[s + 1]
                                 : std::max(a, breaks[s + 1] - detail::kOpenEndShrink * p.k);
    consider(a);
    consider(b);
    if (b - a <= 1e-12 * p.k) continue;
    const auto grid = numeric::linspace(a, b, scan_n);
    int ibest = 0;
    double wbest = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < scan_n; ++i) {
      const double w = W(grid[i]);
      if (w >= wbest) {  // >= : prefer larger y among scan ties
        wbest = w;
        ibest = i;
      }
    }
    const double lo = grid[std::max(0, ibest - 1)];
    const double hi = grid[std::min(scan_n - 1, ibest + 1)];
    const auto gm = numeric::golden_section_max(W, lo, hi, 1e-10 * p.k);
    consider(gm.x);
  }

  const BestResponse br = best_response(best_y, p);
  const Evaluation ev = evaluate(br.x_star, best_y, p);
  Equilibrium eq;
  eq.y_star = best_y;
  eq.x_star = br.x_star;
  eq.beta = ev.beta;
  eq.demand = ev.demand;
  eq.emissions = ev.emissions;
  eq.damages = ev.damages;
  eq.welfare = ev.welfare;
  eq.zone = br.zone;
  eq.regime = rt.regime;
  eq.carbon_free = ev.emissions <= kZeroTol;
  return eq;
}

enum class RegimeClass { AlwaysCarbonFree, TrapAbove, AlwaysCarbonIntensive, PathwayAbove };

inline const char* to_string(RegimeClass c) {
  switch (c) {
    case RegimeClass::AlwaysCarbonFree: return "always-carbon-free";
    case RegimeClass::TrapAbove: return "trap-above";
    case RegimeClass::AlwaysCarbonIntensive: return "always-carbon-intensive";
    case RegimeClass::PathwayAbove: return "pathway-above";
  }
  return "?";
}

// Corner conditions.  The frontier marginal installation cost uses the
// AI-discounted phi(1)*V'(k), which reduces to V'(k) without a phi term.
struct Prop1Margins {
  double threshold_usd_per_kwh = 0.0;  // (1+alpha)*c_f/lambda, decoupling bar on theta/k
  double theta_over_k = 0.0;
  bool a_holds = false;   // theta <= max{(1+alpha)*c_f*k/lambda, c_r*k}
  double a_slack = 0.0;   // max{...} - theta
  double vprime_k = 0.0;  // phi(1)*V'(k)
  double rhs_b = 0.0;     // eta*(c_f - c_r) + (1-b)*e_f*xi
  bool b_holds = false;   // vprime_k <= rhs_b
  double b_slack = 0.0;   // rhs_b - vprime_k
};

inline Prop1Margins prop1_margins(const ModelParams& p) {
  Prop1Margins m;
  m.threshold_usd_per_kwh = (1.0 + p.alpha) * p.c_f / p.lambda;
  m.theta_over_k = p.theta / p.k;
  const double cap = std::max(m.threshold_usd_per_kwh * p.k, p.c_r * p.k);
  m.a_slack = cap - p.theta;
  m.a_holds = p.theta <= cap;
  m.vprime_k = p.cost.phi_at_frontier() * p.cost.marginal(p.k);
  m.rhs_b = p.eta * (p.c_f - p.c_r) + (1.0 - p.b) * p.e_f * p.xi;
  m.b_slack = m.rhs_b - m.vprime_k;
  m.b_holds = m.vprime_k <= m.rhs_b;
  return m;
}

struct RegimeReport {
  ScalingRegime regime = ScalingRegime::MarketLed;
  Prop1Margins margins;
  bool prop2_i = false;
  RegimeClass classification = RegimeClass::AlwaysCarbonFree;
  // Emission threshold in d0 (Gt): trap onset (market-led) or pathway onset
  // (resource-led).  0 when the predicate already holds at d0 = 0; +inf when
  // it never flips below d0_ceiling (or when no threshold applies).
  double d_bar = std::numeric_limits<double>::infinity();
  double d0_ceiling = 1e4;
};

// Classification sweeps d0, ignoring p.d0.
inline RegimeReport classify_regime(const ModelParams& p, double d0_ceiling = 1e4,
                                    double d0_tol = 0.01) {
  validate(p);
  RegimeReport r;
  r.regime = scaling_regime(p);
  r.margins = prop1_margins(p);
  const bool frontier_pays = p.theta > r.margins.threshold_usd_per_kwh * p.k;
  r.prop2_i = frontier_pays && !r.margins.b_holds;
  r.d0_ceiling = d0_ceiling;

  auto carbon_intensive_at = [&](double d0) {
    ModelParams q = p;
    q.d0 = d0;
    return optimal_capacity(q).emissions > kZeroTol;
  };

  if (r.regime == ScalingRegime::MarketLed) {
    if (r.margins.a_holds || r.margins.b_holds) {
      r.classification = RegimeClass::AlwaysCarbonFree;
      return r;
    }
    r.classification = RegimeClass::TrapAbove;
    if (carbon_intensive_at(0.0)) {
      r.d_bar = 0.0;
    } else if (carbon_intensive_at(d0_ceiling)) {
      r.d_bar = numeric::bisect_first_true(carbon_intensive_at, 0.0, d0_ceiling, d0_tol);
    }
    return r;
  }

  if (r.prop2_i) {
    r.classification = RegimeClass::AlwaysCarbonIntensive;
    return r;
  }
  r.classification = RegimeClass::PathwayAbove;
  auto carbon_free_at = [&](double d0) { return !carbon_intensive_at(d0); };
  if (carbon_free_at(0.0)) {
    r.d_bar = 0.0;
  } else if (carbon_free_at(d0_ceiling)) {
    r.d_bar = numeric::bisect_first_true(carbon_free_at, 0.0, d0_ceiling, d0_tol);
  }
  return r;
}

// Smallest fraction rho such that scaling g -> (1-rho)*g yields the
// carbon-free corner x* = 1, y* = k.  nullopt when even rho = 1 - 1e-9 fails.
inline std::optional<double> required_cost_reduction(const ModelParams& p,
                                                     double rho_tol = 1e-4) {
  validate(p);
  auto corner_at = [&](double rho) {
    ModelParams q = p;
    q.cost.g *= (1.0 - rho);
    const Equilibrium eq = optimal_capacity(q);
    return eq.x_star >= 1.0 - 1e-9 && eq.y_star >= p.k * (1.0 - 1e-9);
  };
  if (corner_at(0.0)) return 0.0;
  const double rho_max = 1.0 - 1e-9;
  if (!corner_at(rho_max)) return std::nullopt;
  return numeric::bisect_first_true(corner_at, 0.0, rho_max, rho_tol);
}

// Multiplicative counterfactual scaling of {k, theta, g, c_f, d0}.
struct ParamScale {
  double k = 1.0, theta = 1.0, g = 1.0, c_f = 1.0, d0 = 1.0;
};

inline ModelParams apply_scale(ModelParams p, const ParamScale& s) {
  p.k *= s.k;
  p.theta *= s.theta;
  p.cost.g *= s.g;
  p.c_f *= s.c_f;
  p.d0 *= s.d0;
  return p;
}

struct CounterfactualRow {
  std::string label;
  ModelParams params;
  Equilibrium eq;
  std::optional<double> cost_reduction;
};

inline std::vector<CounterfactualRow> counterfactual_sweep(
    const ModelParams& p, const std::vector<std::pair<std::string, ParamScale>>& scenarios) {
  std::vector<CounterfactualRow> rows;
  rows.reserve(scenarios.size() + 1);
  auto solve_row = [&](const std::string& label, const ModelParams& q) {
    CounterfactualRow row;
    row.label = label;
    row.params = q;
    row.eq = optimal_capacity(q);
    row.cost_reduction = required_cost_reduction(q);
    rows.push_back(std::move(row));
  };
  solve_row("nominal", p);
  for (const auto& [label, scale] : scenarios) solve_row(label, apply_scale(p, scale));
  return rows;
}

}  // namespace powergame
