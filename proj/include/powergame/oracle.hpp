#pragma once

// Brute-force grid oracles, independent of the candidate-enumeration logic:
// they only trust developer_profit / welfare_at and exhaustive search.  Exact
// candidate abscissae (coupling point, stationary capabilities, response
// thresholds) are injected into the grids so agreement with the closed form
// is exact rather than one-grid-step fuzzy.
//
// oracle_policy_optimum evaluates the same nested argmax as the naive double
// loop but precomputes the revenue/cost arrays and running argmaxes of the
// two cost branches (demand <= y vs demand > y split the sorted demand array
// at a binary-searched index, and the branch profits differ from the
// precomputed arrays only by a constant in x).  Selection, including
// larger-x/larger-y tie-breaks, is identical; a unit test pins the inner
// step to the plain scan.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "powergame/developer.hpp"
#include "powergame/model.hpp"
#include "powergame/policy.hpp"

namespace powergame {

struct GridSpec {
  int n_x = 20001;
  int n_y = 4001;
};

namespace detail {

inline void inject_candidates(std::vector<double>& xs, double y, const ModelParams& p) {
  xs.push_back(coupling_capability(y, p));
  if (scaling_regime(p) == ScalingRegime::ResourceLed) {
    xs.push_back(std::min(f_threshold(p.c_f, p), 1.0));
    xs.push_back(std::min(f_threshold(p.c_r, p), 1.0));
  }
}

}  // namespace detail

// Argmax of developer_profit over a uniform x grid plus injected candidates;
// ties toward larger x.
inline double oracle_best_response(double y, const ModelParams& p,
                                   const GridSpec& grid = {}) {
  y = detail::check_y(y, p);
  const int n = std::max(2, grid.n_x);
  double best_x = 0.0;
  double best_pi = developer_profit(0.0, y, p);
  auto consider = [&](double x, double pi) {
    if (pi > best_pi || (pi == best_pi && x > best_x)) {
      best_pi = pi;
      best_x = x;
    }
  };
  const double step = 1.0 / static_cast<double>(n - 1);
  for (int i = 1; i < n; ++i) {
    const double x = (i == n - 1) ? 1.0 : i * step;
    consider(x, developer_profit(x, y, p));
  }
  std::vector<double> extra;
  detail::inject_candidates(extra, y, p);
  for (double x : extra) consider(x, developer_profit(x, y, p));
  return best_x;
}

struct PolicyOptimum {
  double y_star = 0.0;
  double x_star = 0.0;
  double welfare = 0.0;
};

namespace detail {

// Precomputed per-x-grid state for the fast inner argmax.
struct InnerGrid {
  std::vector<double> x, dem, pr_r, pr_f;  // profits at y-independent parts
  std::vector<int> pref_r;                 // argmax of pr_r over [0..i], ties high
  std::vector<int> suf_f;                  // argmax of pr_f over [i..n-1], ties high
};

inline InnerGrid build_inner_grid(const ModelParams& p, int n_x) {
  InnerGrid g;
  const int n = std::max(2, n_x);
  g.x.resize(n);
  g.dem.resize(n);
  g.pr_r.resize(n);
  g.pr_f.resize(n);
  const double step = 1.0 / static_cast<double>(n - 1);
  for (int i = 0; i < n; ++i) {
    const double x = (i == n - 1) ? 1.0 : i * step;
    const double rev = p.theta * std::pow(x, p.lambda);
    const double dem = p.k * std::pow(x, 1.0 + p.alpha);
    g.x[i] = x;
    g.dem[i] = dem;
    g.pr_r[i] = rev - p.c_r * dem;
    g.pr_f[i] = rev - p.c_f * dem;  // + (c_f - c_r)*y added per y
  }
  g.pref_r.resize(n);
  g.suf_f.resize(n);
  int arg = 0;
  for (int i = 0; i < n; ++i) {
    if (g.pr_r[i] >= g.pr_r[arg]) arg = i;  // ties -> larger x
    g.pref_r[i] = arg;
  }
  arg = n - 1;
  for (int i = n - 1; i >= 0; --i) {
    if (g.pr_f[i] > g.pr_f[arg]) arg = i;  // scanning down: ties keep larger x
    g.suf_f[i] = arg;
  }
  return g;
}

// Same selection as oracle_best_response, via the precomputed arrays.
inline double fast_inner_argmax(const InnerGrid& g, double y, const ModelParams& p) {
  const int n = static_cast<int>(g.x.size());
  // First index with dem > y; [0, split) is the renewable-cost branch.
  const int split = static_cast<int>(
      std::upper_bound(g.dem.begin(), g.dem.end(), y) - g.dem.begin());
  double best_pi = -std::numeric_limits<double>::infinity();
  double best_x = 0.0;
  auto consider = [&](double x, double pi) {
    if (pi > best_pi || (pi == best_pi && x > best_x)) {
      best_pi = pi;
      best_x = x;
    }
  };
  if (split > 0) {
    const int i = g.pref_r[split - 1];
    consider(g.x[i], g.pr_r[i]);
  }
  if (split < n) {
    const int i = g.suf_f[split];
    consider(g.x[i], g.pr_f[i] + (p.c_f - p.c_r) * y);
  }
  std::vector<double> extra;
  inject_candidates(extra, y, p);
  for (double x : extra) consider(x, developer_profit(x, y, p));
  return best_x;
}

}  // namespace detail

// Nested grid maximization of welfare over y (uniform grid plus injected
// response thresholds), with the oracle inner argmax per y; ties toward
// larger y.
inline PolicyOptimum oracle_policy_optimum(const ModelParams& p, const GridSpec& grid = {}) {
  const detail::InnerGrid inner = detail::build_inner_grid(p, grid.n_x);
  const int n = std::max(2, grid.n_y);
  std::vector<double> ys = numeric::linspace(0.0, p.k, n);
  const ResponseThresholds rt = response_thresholds(p);
  for (double v : {rt.y1, rt.y2, rt.y_lo, rt.y_hi})
    if (std::isfinite(v) && v >= 0.0 && v <= p.k) ys.push_back(v);
  std::sort(ys.begin(), ys.end());

  PolicyOptimum best;
  best.welfare = -std::numeric_limits<double>::infinity();
  for (double y : ys) {
    const double x = detail::fast_inner_argmax(inner, y, p);
    const double w = welfare_at(x, y, p);
    if (w > best.welfare || (w == best.welfare && y > best.y_star)) {
      best.welfare = w;
      best.x_star = x;
      best.y_star = y;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Randomized audit: closed-form solvers vs the oracles.

struct AuditConfig {
  int instances_per_regime = 200;
  unsigned seed = 12345;
  GridSpec grid{20001, 4001};
  int y_samples = 10;  // random y draws per instance, plus y = 0 and y = k
  // Agreement tolerances.
  double profit_rel_tol = 1e-8;
  double welfare_rel_tol = 1e-6;
};

struct AuditResult {
  int instances = 0;
  int br_checks = 0;
  int br_failures = 0;
  int policy_checks = 0;
  int policy_failures = 0;
  int policy_welfare_arm = 0;  // policy agreements via the welfare-gap arm
  double max_x_err = 0.0;
  double max_profit_rel_err = 0.0;
  double max_y_err = 0.0;          // in y grid steps
  double max_welfare_rel_err = 0.0;
  bool pass = true;
};

// Log-uniform draw over Table-1-derived ranges widened by a factor of 3.
inline ModelParams random_instance(std::mt19937& rng, ScalingRegime regime) {
  auto logu = [&](double lo, double hi) {
    std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
    return std::exp(u(rng));
  };
  ModelParams p;
  p.alpha = logu(1.467 / 3.0, 1.467 * 3.0);
  const double edge = 1.0 + p.alpha;
  p.lambda = regime == ScalingRegime::MarketLed ? edge * logu(1.0 + 1e-6, 2.0)
                                                : edge * logu(0.4, 0.999);
  p.theta = logu(15.23 / 3.0, 109.08 * 3.0);
  p.k = logu(115.42 / 3.0, 177.51 * 3.0);
  p.c_r = logu(0.048 / 3.0, 0.065 * 3.0);
  p.c_f = logu(0.088 / 3.0, 0.193 * 3.0);
  if (p.c_f <= p.c_r * 1.05) p.c_f = p.c_r * 1.25;
  p.e_f = logu(0.187e-3 / 3.0, 0.614e-3 * 3.0);
  p.d0 = logu(0.5, 500.0);
  p.b = logu(0.05, 0.45);
  p.eta = logu(178.0 / 3.0, 178.0 * 3.0);
  p.xi = logu(225.0 / 3.0, 225.0 * 3.0);
  p.cost.g = logu(9.83 / 3.0, 15.83 * 3.0);
  p.cost.mu = logu(1.05, 1.8);
  validate(p);
  return p;
}

using BestResponseFn = std::function<double(double, const ModelParams&)>;
using PolicyFn = std::function<std::pair<double, double>(const ModelParams&)>;  // (y*, W*)

// br/policy default to the production solvers; tests inject corrupted ones
// as a negative control.
inline AuditResult run_oracle_audit(const AuditConfig& cfg, BestResponseFn br = {},
                                    PolicyFn policy = {}) {
  if (!br) br = [](double y, const ModelParams& p) { return best_response(y, p).x_star; };
  if (!policy) policy = [](const ModelParams& p) {
    const Equilibrium eq = optimal_capacity(p);
    return std::make_pair(eq.y_star, eq.welfare);
  };

  AuditResult res;
  std::mt19937 rng(cfg.seed);
  const double x_step = 1.0 / static_cast<double>(std::max(2, cfg.grid.n_x) - 1);

  for (ScalingRegime regime : {ScalingRegime::MarketLed, ScalingRegime::ResourceLed}) {
    for (int i = 0; i < cfg.instances_per_regime; ++i) {
      const ModelParams p = random_instance(rng, regime);
      ++res.instances;

      std::vector<double> ys{0.0, p.k};
      std::uniform_real_distribution<double> uy(0.0, p.k);
      for (int j = 0; j < cfg.y_samples; ++j) ys.push_back(uy(rng));
      for (double y : ys) {
        ++res.br_checks;
        const double x_cl = br(y, p);
        const double x_or = oracle_best_response(y, p, cfg.grid);
        const double dx = std::fabs(x_cl - x_or);
        const double pi_cl = developer_profit(x_cl, y, p);
        const double pi_or = developer_profit(x_or, y, p);
        const double dpi =
            std::fabs(pi_cl - pi_or) / std::max(1.0, std::fabs(pi_or));
        res.max_x_err = std::max(res.max_x_err, dx);
        res.max_profit_rel_err = std::max(res.max_profit_rel_err, dpi);
        if (dx > x_step + 1e-12 || dpi > cfg.profit_rel_tol) ++res.br_failures;
      }

      ++res.policy_checks;
      const auto [y_cl, w_cl] = policy(p);
      const PolicyOptimum po = oracle_policy_optimum(p, cfg.grid);
      const double y_step = p.k / static_cast<double>(std::max(2, cfg.grid.n_y) - 1);
      const double dy = std::fabs(y_cl - po.y_star) / y_step;
      const double dw =
          std::fabs(w_cl - po.welfare) / std::max(1.0, std::fabs(po.welfare));
      res.max_y_err = std::max(res.max_y_err, dy);
      res.max_welfare_rel_err = std::max(res.max_welfare_rel_err, dw);
      const bool y_ok = dy <= 1.0 + 1e-9;
      const bool w_ok = w_cl >= po.welfare - cfg.welfare_rel_tol * std::max(1.0, std::fabs(po.welfare));
      if (!y_ok && w_ok) ++res.policy_welfare_arm;
      if (!(y_ok || w_ok)) ++res.policy_failures;
    }
  }
  res.pass = res.br_failures == 0 && res.policy_failures == 0;
  return res;
}

}  // namespace powergame
