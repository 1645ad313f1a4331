#pragma once

// Two model extensions.
//
// 1. AI-driven installation-cost reduction: the policymaker's cost term
//    becomes phi(x)*V(y) with phi(x) = 1 - s*x.  The base solvers already
//    carry phi through CostSpec, so the helpers here only set the slope and
//    re-run the pipeline.  At s = 0 every output is bitwise identical to the
//    base model.
//
// 2. Price-setting duopoly: two developers sell vertically differentiated
//    products (qualities x1^lambda >= x2^lambda) to a unit mass of consumers
//    whose taste theta' is uniform on [0, theta_tilde], theta_tilde = 4*theta
//    so that the one-firm case reproduces the base revenue theta*x^lambda.
//    Prices have a closed form; the capability stage is solved numerically on
//    a uniform grid (pure Nash = fixed point of the best-response maps).
//    Welfare with two firms: eta*(Pi1+Pi2) - xi*(1 - b*max(x1,x2))*(d0+E1+E2)
//    - V(y1+y2); adaptation uses the best available model and capacity cost
//    is convex in the policymaker's total build-out.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#include "powergame/developer.hpp"
#include "powergame/model.hpp"
#include "powergame/policy.hpp"

namespace powergame {

// ---------------------------------------------------------------------------
// Cost-reduction extension.

// Copy of p with the cost-reduction slope installed; rejects s outside [0,1).
inline ModelParams with_phi_slope(ModelParams p, double s) {
  p.cost.phi_slope = s;
  validate(p);
  return p;
}

inline Equilibrium phi_equilibrium(const ModelParams& p, double s) {
  return optimal_capacity(with_phi_slope(p, s));
}

// ---------------------------------------------------------------------------
// Duopoly: price stage (closed form).

struct DuopolyPrices {
  double p1 = 0.0;
  double p2 = 0.0;
};

// Equilibrium prices for qualities X_i = x_i^lambda, x1 >= x2:
//   p1 = 2*X1*(X1-X2)*theta_tilde / (4*X1 - X2)
//   p2 =   X2*(X1-X2)*theta_tilde / (4*X1 - X2)
// Both zero when x1 = x2 (undifferentiated Bertrand).
inline DuopolyPrices duopoly_prices(double x1, double x2, double theta_tilde,
                                    double lambda) {
  if (!(x1 > 0.0)) throw std::domain_error("duopoly_prices: x1 must be positive");
  if (!(x2 >= 0.0 && x2 <= x1 && x1 <= 1.0))
    throw std::domain_error("duopoly_prices: need 0 <= x2 <= x1 <= 1");
  if (!(theta_tilde > 0.0))
    throw std::domain_error("duopoly_prices: theta_tilde must be positive");
  const double X1 = std::pow(x1, lambda);
  const double X2 = std::pow(x2, lambda);
  const double delta = X1 - X2;
  if (delta <= 0.0) return {0.0, 0.0};
  const double den = 4.0 * X1 - X2;
  return {2.0 * X1 * delta * theta_tilde / den, X2 * delta * theta_tilde / den};
}

// Capabilities, capacities and prices of both firms under one profile.
struct DuopolyState {
  double x1 = 0.0, x2 = 0.0;  // x1 >= x2
  double y1 = 0.0, y2 = 0.0;  // TWh, not capped at k (excess is idle)
  double p1 = 0.0, p2 = 0.0;  // billion USD per unit consumer demand
  double theta_tilde = 0.0;   // billion USD
};

namespace detail {

// Blended procurement cost of energy demand dem given capacity y (same
// branch structure as developer_profit, without the [0,k] capacity cap).
inline double procurement_cost(double dem, double y, const ModelParams& p) {
  if (dem <= y) return p.c_r * dem;
  return p.c_f * dem - (p.c_f - p.c_r) * y;
}

// Consumer shares served by each firm at arbitrary prices, X1 > X2 >= 0.
// Firm 1 sells to theta' >= max(t, p1/X1) with t = (p1-p2)/(X1-X2); firm 2
// to [p2/X2, min(theta_tilde, t)), both clamped to [0, theta_tilde].
inline std::pair<double, double> demand_shares(double X1, double X2, double p1,
                                               double p2, double theta_tilde) {
  if (X2 <= 0.0) {
    const double d1 = std::max(0.0, theta_tilde - p1 / X1) / theta_tilde;
    return {d1, 0.0};
  }
  const double t = (p1 - p2) / (X1 - X2);
  const double d1 = std::max(0.0, theta_tilde - std::max(t, p1 / X1)) / theta_tilde;
  const double d2 = std::max(0.0, std::min(theta_tilde, t) - p2 / X2) / theta_tilde;
  return {d1, d2};
}

}  // namespace detail

// Profits at an arbitrary state (not necessarily equilibrium prices).  With
// x1 = x2 the products are identical and prices are ignored: both firms earn
// zero revenue, so profits are minus the procurement cost.
inline std::pair<double, double> duopoly_profits(const DuopolyState& s,
                                                 const ModelParams& p) {
  if (!(s.x2 >= 0.0 && s.x2 <= s.x1 && s.x1 <= 1.0))
    throw std::domain_error("duopoly_profits: need 0 <= x2 <= x1 <= 1");
  if (!(s.theta_tilde > 0.0) || !(s.p1 >= 0.0) || !(s.p2 >= 0.0) ||
      !(s.y1 >= 0.0) || !(s.y2 >= 0.0))
    throw std::domain_error("duopoly_profits: invalid state");
  const double dem1 = p.k * std::pow(s.x1, 1.0 + p.alpha);
  const double dem2 = p.k * std::pow(s.x2, 1.0 + p.alpha);
  const double c1 = detail::procurement_cost(dem1, s.y1, p);
  const double c2 = detail::procurement_cost(dem2, s.y2, p);
  const double X1 = std::pow(s.x1, p.lambda);
  const double X2 = std::pow(s.x2, p.lambda);
  if (!(X1 > X2)) return {-c1, -c2};
  const auto [d1, d2] = detail::demand_shares(X1, X2, s.p1, s.p2, s.theta_tilde);
  return {s.p1 * d1 - c1, s.p2 * d2 - c2};
}

namespace detail {

// Revenues under equilibrium prices, as functions of the quality pair
// (hi = leader's x^lambda, lo = follower's).  rev_high is the leader's.
inline double rev_high(double hi, double lo, double theta_tilde) {
  const double delta = hi - lo;
  if (!(hi > 0.0) || delta <= 0.0) return 0.0;
  const double den = 4.0 * hi - lo;
  return 4.0 * theta_tilde * hi * hi * delta / (den * den);
}

inline double rev_low(double hi, double lo, double theta_tilde) {
  const double delta = hi - lo;
  if (!(hi > 0.0) || delta <= 0.0) return 0.0;
  const double den = 4.0 * hi - lo;
  return theta_tilde * hi * lo * delta / (den * den);
}

}  // namespace detail

enum class DuopolyRegion { MonopolyCollapse, PartialCarbonFree, DualTrap };

inline const char* to_string(DuopolyRegion r) {
  switch (r) {
    case DuopolyRegion::MonopolyCollapse: return "monopoly-collapse";
    case DuopolyRegion::PartialCarbonFree: return "partial-carbon-free";
    case DuopolyRegion::DualTrap: return "dual-trap";
  }
  return "?";
}

struct DuopolyOutcome {
  double x1 = 0.0, x2 = 0.0;  // sorted: x1 >= x2
  double y1 = 0.0, y2 = 0.0;  // capacities travel with the firms when sorted
  double p1 = 0.0, p2 = 0.0;
  double profit1 = 0.0, profit2 = 0.0;
  double demand1 = 0.0, demand2 = 0.0;  // TWh
  double e1 = 0.0, e2 = 0.0;            // Gt
  DuopolyRegion region = DuopolyRegion::MonopolyCollapse;
  double coverage_share = 1.0;  // mean of min(y_i/demand_i, 1) over active firms
  bool converged = true;        // false when no pure Nash profile exists
};

// Capability-stage equilibrium given the capacity split.  Both firms pick x
// on a uniform n_grid-point grid; payoffs evaluate the price-stage closed
// form at each profile.  A profile is kept iff it is a simultaneous best
// response (the fixed points that best-response sweeps can converge to);
// among them the joint-profit maximum wins, ties to larger x1+x2, then x1.
// No fixed point, or an entrant with negative profit, collapses to the
// single-firm case, which is solved exactly by the developer module (the
// theta_tilde/4 monopoly revenue equals the base model's theta*x^lambda).
inline DuopolyOutcome duopoly_equilibrium(double y1, double y2, const ModelParams& p,
                                          int n_grid = 401) {
  validate(p);
  if (!(y1 >= 0.0) || !(y2 >= 0.0))
    throw std::invalid_argument("duopoly_equilibrium: capacities must be >= 0");
  const int n = std::max(2, n_grid);
  const double theta_tilde = 4.0 * p.theta;

  const std::vector<double> xs = numeric::linspace(0.0, 1.0, n);
  std::vector<double> X(n), dem(n), cost1(n), cost2(n);
  for (int i = 0; i < n; ++i) {
    X[i] = std::pow(xs[i], p.lambda);
    dem[i] = p.k * std::pow(xs[i], 1.0 + p.alpha);
    cost1[i] = detail::procurement_cost(dem[i], y1, p);
    cost2[i] = detail::procurement_cost(dem[i], y2, p);
  }
  // pi1[a*n+b]: firm 1 at grid a, firm 2 at grid b.  Quality rank == index
  // rank on a shared increasing grid.
  std::vector<double> pi1(static_cast<size_t>(n) * n), pi2(pi1.size());
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      double r1 = 0.0, r2 = 0.0;
      if (a > b) {
        r1 = detail::rev_high(X[a], X[b], theta_tilde);
        r2 = detail::rev_low(X[a], X[b], theta_tilde);
      } else if (a < b) {
        r1 = detail::rev_low(X[b], X[a], theta_tilde);
        r2 = detail::rev_high(X[b], X[a], theta_tilde);
      }
      pi1[static_cast<size_t>(a) * n + b] = r1 - cost1[a];
      pi2[static_cast<size_t>(a) * n + b] = r2 - cost2[b];
    }
  }
  std::vector<double> colmax1(n, -std::numeric_limits<double>::infinity());
  std::vector<double> rowmax2(n, -std::numeric_limits<double>::infinity());
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      colmax1[b] = std::max(colmax1[b], pi1[static_cast<size_t>(a) * n + b]);
      rowmax2[a] = std::max(rowmax2[a], pi2[static_cast<size_t>(a) * n + b]);
    }

  int best_a = -1, best_b = -1;
  double best_joint = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const size_t ab = static_cast<size_t>(a) * n + b;
      const double tol1 = 1e-9 * std::max(1.0, std::fabs(colmax1[b]));
      const double tol2 = 1e-9 * std::max(1.0, std::fabs(rowmax2[a]));
      if (pi1[ab] < colmax1[b] - tol1 || pi2[ab] < rowmax2[a] - tol2) continue;
      const double joint = pi1[ab] + pi2[ab];
      const double jtol = 1e-9 * std::max(1.0, std::fabs(best_joint));
      const bool better =
          best_a < 0 || joint > best_joint + jtol ||
          (joint >= best_joint - jtol &&
           (xs[a] + xs[b] > xs[best_a] + xs[best_b] ||
            (xs[a] + xs[b] == xs[best_a] + xs[best_b] && xs[a] > xs[best_a])));
      if (better) {
        best_a = a;
        best_b = b;
        best_joint = joint;
      }
    }
  }

  DuopolyOutcome out;
  out.y1 = y1;
  out.y2 = y2;
  bool collapse = best_a < 0;
  out.converged = best_a >= 0;
  if (!collapse) {
    out.x1 = xs[best_a];
    out.x2 = xs[best_b];
    out.profit1 = pi1[static_cast<size_t>(best_a) * n + best_b];
    out.profit2 = pi2[static_cast<size_t>(best_a) * n + best_b];
    if (out.x2 > out.x1 ||
        (out.x2 == out.x1 && out.y2 > out.y1)) {  // report sorted, x1 >= x2
      std::swap(out.x1, out.x2);
      std::swap(out.y1, out.y2);
      std::swap(out.profit1, out.profit2);
    }
    // An entrant that loses money stays out: collapse to the monopoly case.
    if ((out.x1 > kZeroTol && out.profit1 < 0.0) ||
        (out.x2 > kZeroTol && out.profit2 < 0.0))
      collapse = true;
    else if (out.x2 <= kZeroTol)
      collapse = true;  // grid says single firm; re-solve it exactly below
  }
  if (collapse) {
    // Monopolist slot: the firm whose stand-alone profit is larger.
    const double xa = best_response(std::min(y1, p.k), p).x_star;
    const double xb = best_response(std::min(y2, p.k), p).x_star;
    const double pa = p.theta * std::pow(xa, p.lambda) -
                      detail::procurement_cost(p.k * std::pow(xa, 1.0 + p.alpha), y1, p);
    const double pb = p.theta * std::pow(xb, p.lambda) -
                      detail::procurement_cost(p.k * std::pow(xb, 1.0 + p.alpha), y2, p);
    const bool first = pa >= pb;
    out.x1 = first ? xa : xb;
    out.y1 = first ? y1 : y2;
    out.profit1 = first ? pa : pb;
    out.x2 = 0.0;
    out.y2 = first ? y2 : y1;
    out.profit2 = 0.0;
  }

  out.demand1 = p.k * std::pow(out.x1, 1.0 + p.alpha);
  out.demand2 = p.k * std::pow(out.x2, 1.0 + p.alpha);
  out.e1 = p.e_f * std::max(out.demand1 - out.y1, 0.0);
  out.e2 = p.e_f * std::max(out.demand2 - out.y2, 0.0);
  if (out.x1 > kZeroTol) {
    const DuopolyPrices pr = duopoly_prices(out.x1, out.x2, theta_tilde, p.lambda);
    out.p1 = pr.p1;
    out.p2 = pr.p2;
  }

  const bool active1 = out.x1 > kZeroTol;
  const bool active2 = out.x2 > kZeroTol;
  if (!active1 || !active2) {
    out.region = DuopolyRegion::MonopolyCollapse;
  } else if (out.e1 <= kZeroTol || out.e2 <= kZeroTol) {
    out.region = DuopolyRegion::PartialCarbonFree;
  } else {
    out.region = DuopolyRegion::DualTrap;
  }
  double cov = 0.0;
  int n_active = 0;
  if (active1) { cov += std::min(out.y1 / out.demand1, 1.0); ++n_active; }
  if (active2) { cov += std::min(out.y2 / out.demand2, 1.0); ++n_active; }
  out.coverage_share = n_active ? cov / n_active : 1.0;
  return out;
}

inline double duopoly_welfare(const DuopolyOutcome& o, const ModelParams& p) {
  const double x_best = std::max(o.x1, o.x2);
  return p.eta * (o.profit1 + o.profit2) -
         p.xi * (1.0 - p.b * x_best) * (p.d0 + o.e1 + o.e2) -
         p.cost.value(o.y1 + o.y2);
}

struct DuopolyPolicyResult {
  double y1 = 0.0, y2 = 0.0;  // chosen allocation (slot 1 = larger build-out)
  double welfare = 0.0;
  DuopolyOutcome outcome;
};

// Welfare-maximizing capacity split.  Candidates: the no-build and
// single-firm-optimal splits, symmetric and asymmetric divisions of a
// log/linear total-capacity grid, exact coverage of an entrant's observed
// fossil demand, and two multiplicative zoom rounds around the incumbent
// best.  Welfare ties break toward the larger entrant capacity (covering an
// entrant costs nothing at the margin but zeroes its emissions), then toward
// the larger total.
inline DuopolyPolicyResult duopoly_policy(const ModelParams& p, int n_grid = 401) {
  validate(p);
  const double y_mono = optimal_capacity(p).y_star;

  std::vector<std::pair<double, double>> cands;
  auto add = [&](double a, double b) {
    a = std::clamp(a, 0.0, p.k);
    b = std::clamp(b, 0.0, p.k);
    cands.emplace_back(a, b);
  };
  add(0.0, 0.0);
  add(y_mono, 0.0);

  std::vector<double> totals;
  const double lo = std::max(1e-6 * p.k, 1e-7);
  for (int i = 0; i < 24; ++i)
    totals.push_back(lo * std::pow(p.k / lo, i / 23.0));
  for (int i = 0; i < 8; ++i) totals.push_back(p.k * (0.05 + 0.95 * i / 7.0));
  if (y_mono > 0.0) {
    totals.push_back(2.0 * y_mono);
    totals.push_back(4.0 * y_mono);
  }
  for (double t : totals)
    for (double s : {1.0, 0.85, 0.7, 0.5}) add(s * t, (1.0 - s) * t);

  // Exact-coverage candidates: observe the entrant's demand when it runs on
  // fossil power, then offer exactly that much capacity.
  for (double y_lead : {y_mono, 0.0}) {
    const DuopolyOutcome probe = duopoly_equilibrium(y_lead, 0.0, p, n_grid);
    if (probe.x2 > kZeroTol && probe.demand2 > 0.0) {
      const double d2 = probe.demand2;
      add(y_lead, d2);
      add(std::max(0.0, y_lead - d2), d2);
      add(0.0, d2);
    }
    if (y_mono <= 0.0) break;
  }

  DuopolyPolicyResult best;
  bool have = false;
  auto consider = [&](double a, double b) {
    const DuopolyOutcome out = duopoly_equilibrium(a, b, p, n_grid);
    const double w = duopoly_welfare(out, p);
    const double tol = 1e-11 * std::max(1.0, std::fabs(best.welfare));
    const bool better =
        !have || w > best.welfare + tol ||
        (w >= best.welfare - tol &&
         (b > best.y2 || (b == best.y2 && a + b > best.y1 + best.y2)));
    if (better) {
      best.y1 = a;
      best.y2 = b;
      best.welfare = w;
      best.outcome = out;
      have = true;
    }
  };

  auto run_batch = [&](std::vector<std::pair<double, double>>& batch) {
    std::sort(batch.begin(), batch.end());
    batch.erase(std::unique(batch.begin(), batch.end(),
                            [&](const auto& u, const auto& v) {
                              const double tol = 1e-12 * std::max(1.0, p.k);
                              return std::fabs(u.first - v.first) <= tol &&
                                     std::fabs(u.second - v.second) <= tol;
                            }),
                batch.end());
    for (const auto& [a, b] : batch) consider(a, b);
  };
  run_batch(cands);

  for (int round = 0; round < 2; ++round) {
    std::vector<std::pair<double, double>> zoom;
    for (double f1 : {0.5, 0.8, 1.0, 1.25, 2.0})
      for (double f2 : {0.5, 0.8, 1.0, 1.25, 2.0}) {
        double a = std::clamp(best.y1 * f1, 0.0, p.k);
        double b = std::clamp(best.y2 * f2, 0.0, p.k);
        zoom.emplace_back(a, b);
      }
    run_batch(zoom);
  }
  return best;
}

struct DuopolyMapCell {
  double theta = 0.0;
  double lambda = 0.0;
  DuopolyPolicyResult policy;
};

// Region map over a (theta, lambda) grid at fixed d0; cells are independent
// and solved by a small worker pool, stored in deterministic (theta-major)
// order regardless of completion order.
inline std::vector<DuopolyMapCell> duopoly_region_map(
    const ModelParams& base, const std::vector<double>& thetas,
    const std::vector<double>& lambdas, double d0, int n_grid = 401, int jobs = 0) {
  std::vector<DuopolyMapCell> cells;
  cells.resize(thetas.size() * lambdas.size());
  for (size_t i = 0; i < thetas.size(); ++i)
    for (size_t j = 0; j < lambdas.size(); ++j) {
      cells[i * lambdas.size() + j].theta = thetas[i];
      cells[i * lambdas.size() + j].lambda = lambdas[j];
    }
  if (jobs <= 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    jobs = hw ? static_cast<int>(hw) : 4;
  }
  jobs = std::min<int>(jobs, static_cast<int>(cells.size()));
  jobs = std::max(jobs, 1);

  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (size_t idx = next.fetch_add(1); idx < cells.size(); idx = next.fetch_add(1)) {
      ModelParams q = base;
      q.theta = cells[idx].theta;
      q.lambda = cells[idx].lambda;
      q.d0 = d0;
      validate(q);
      cells[idx].policy = duopoly_policy(q, n_grid);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(jobs));
  for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  return cells;
}

}  // namespace powergame
