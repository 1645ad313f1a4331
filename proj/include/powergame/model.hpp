#pragma once

// Core two-stage model: an AI developer picks capability x in [0,1], a
// policymaker picks renewable capacity y in [0,k].  Energy demand scales as
// k*x^(1+alpha); renewables are dispatched first, the fossil residual is
// priced at c_f and emits e_f per TWh.  All money in billion USD, energy in
// TWh, emissions in Gt CO2e (1 billion USD/TWh == 1 USD/kWh).

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

namespace powergame {

inline constexpr double kBranchRelTol = 1e-9;   // piecewise branch selection
inline constexpr double kTieRelTol = 1e-11;     // argmax tie detection
inline constexpr double kZeroTol = 1e-12;       // "is zero" for x, emissions

// Convex renewable installation cost V(y) = g * y^mu, optionally discounted
// by an AI-driven multiplier phi(x) = 1 - phi_slope * x applied to V.
struct CostSpec {
  double g = 0.0;    // billion USD per TWh^mu
  double mu = 1.34;  // curvature, must exceed 1
  std::optional<double> phi_slope;  // cost-reduction potential s in [0,1)

  double value(double y) const { return g * std::pow(y, mu); }
  double marginal(double y) const { return g * mu * std::pow(y, mu - 1.0); }
  double phi(double x) const {
    return phi_slope ? 1.0 - *phi_slope * x : 1.0;
  }
  double phi_at_frontier() const { return phi(1.0); }
};

struct ModelParams {
  double theta = 0.0;   // willingness-to-pay level (billion USD)
  double lambda = 1.0;  // capability exponent of revenue
  double k = 0.0;       // frontier energy demand (TWh)
  double alpha = 0.0;   // demand superlinearity: demand = k * x^(1+alpha)
  double c_r = 0.0;     // renewable PPA price (billion USD/TWh)
  double c_f = 0.0;     // fossil grid price (billion USD/TWh)
  double e_f = 0.0;     // fossil emission intensity (Gt CO2e per TWh)
  double d0 = 0.0;      // baseline emission stock (Gt CO2e)
  double b = 0.0;       // AI adaptation effectiveness, in (0,1)
  double eta = 2.0;     // surplus weight on developer profit, > 1
  double xi = 0.0;      // damage weight (billion USD per Gt CO2e)
  CostSpec cost;
};

// Throws std::invalid_argument naming the offending field.
inline void validate(const ModelParams& p) {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("ModelParams: " + msg); };
  if (!(p.theta > 0.0)) fail("theta must be positive");
  if (!(p.lambda > 0.0)) fail("lambda must be positive");
  if (!(p.k > 0.0)) fail("k must be positive");
  if (!(p.alpha >= 0.0)) fail("alpha must be non-negative");
  if (!(p.c_r > 0.0)) fail("c_r must be positive");
  if (!(p.c_f > p.c_r)) fail("c_f must exceed c_r");
  if (!(p.e_f >= 0.0)) fail("e_f must be non-negative");
  if (!(p.d0 >= 0.0)) fail("d0 must be non-negative");
  if (!(p.b > 0.0 && p.b < 1.0)) fail("b must lie in (0,1)");
  if (!(p.eta > 1.0)) fail("eta must exceed 1");
  if (!(p.xi >= 0.0)) fail("xi must be non-negative");
  if (!(p.cost.g >= 0.0)) fail("cost.g must be non-negative");
  if (!(p.cost.mu > 1.0)) fail("cost.mu must exceed 1");
  if (p.cost.phi_slope && !(*p.cost.phi_slope >= 0.0 && *p.cost.phi_slope < 1.0))
    fail("cost.phi_slope must lie in [0,1)");
}

namespace detail {
inline double check_x(double x) {
  if (x < -kBranchRelTol || x > 1.0 + kBranchRelTol)
    throw std::domain_error("capability x outside [0,1]");
  return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x);
}
inline double check_y(double y, const ModelParams& p) {
  const double tol = kBranchRelTol * p.k;
  if (y < -tol || y > p.k + tol)
    throw std::domain_error("capacity y outside [0,k]");
  return y < 0.0 ? 0.0 : (y > p.k ? p.k : y);
}
}  // namespace detail

// Eq. demand: k * x^(1+alpha).
inline double energy_demand(double x, const ModelParams& p) {
  x = detail::check_x(x);
  return p.k * std::pow(x, 1.0 + p.alpha);
}

// Share of demand served by renewables, min{y/demand, 1}; 1 when demand = 0.
// Demand within kBranchRelTol (relative) of y counts as fully covered, the
// same convention emissions() uses, so beta and emissions never disagree
// about whether any fossil residual exists.
inline double renewable_share(double x, double y, const ModelParams& p) {
  x = detail::check_x(x);
  y = detail::check_y(y, p);
  const double dem = energy_demand(x, p);
  if (dem <= 0.0) return 1.0;
  if (dem - y <= kBranchRelTol * y) return 1.0;
  return y / dem;
}

// Developer profit theta*x^lambda - blended energy cost.  When demand <= y
// the whole load runs at c_r; otherwise the residual runs at c_f, which is
// algebraically theta*x^lambda - c_f*demand + (c_f - c_r)*y.
inline double developer_profit(double x, double y, const ModelParams& p) {
  x = detail::check_x(x);
  y = detail::check_y(y, p);
  const double revenue = p.theta * std::pow(x, p.lambda);
  const double dem = p.k * std::pow(x, 1.0 + p.alpha);
  if (dem <= y) return revenue - p.c_r * dem;
  return revenue - p.c_f * dem + (p.c_f - p.c_r) * y;
}

// Fossil emissions e_f * (1-beta) * demand, exactly zero under full coverage.
// A residual below kBranchRelTol * y is indistinguishable from coverage at
// the solvers' resolution (candidate capabilities near the coupling point
// reproduce y only up to rounding), so it counts as covered rather than as a
// sliver of fossil generation.
inline double emissions(double x, double y, const ModelParams& p) {
  x = detail::check_x(x);
  y = detail::check_y(y, p);
  const double residual = p.k * std::pow(x, 1.0 + p.alpha) - y;
  return residual > kBranchRelTol * y ? p.e_f * residual : 0.0;
}

// Adaptation-adjusted damage stock (1 - b*x) * (d0 + E), in Gt.
inline double damages(double x, double y, const ModelParams& p) {
  x = detail::check_x(x);
  return (1.0 - p.b * x) * (p.d0 + emissions(x, y, p));
}

// Policymaker objective eta*Pi - xi*D - phi(x)*V(y).
inline double welfare_at(double x, double y, const ModelParams& p) {
  return p.eta * developer_profit(x, y, p) - p.xi * damages(x, y, p) -
         p.cost.phi(detail::check_x(x)) * p.cost.value(detail::check_y(y, p));
}

struct Evaluation {
  double x = 0.0, y = 0.0;
  double demand = 0.0, beta = 0.0;
  double profit = 0.0, emissions = 0.0, damages = 0.0, welfare = 0.0;
};

inline Evaluation evaluate(double x, double y, const ModelParams& p) {
  Evaluation e;
  e.x = detail::check_x(x);
  e.y = detail::check_y(y, p);
  e.demand = energy_demand(e.x, p);
  e.beta = renewable_share(e.x, e.y, p);
  e.profit = developer_profit(e.x, e.y, p);
  e.emissions = emissions(e.x, e.y, p);
  e.damages = damages(e.x, e.y, p);
  e.welfare = welfare_at(e.x, e.y, p);
  return e;
}

}  // namespace powergame
