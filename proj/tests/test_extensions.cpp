#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "powergame/calibration.hpp"
#include "powergame/extensions.hpp"
#include "test_common.hpp"

using namespace powergame;
using Catch::Approx;

TEST_CASE("duopoly price closed forms") {
  SECTION("undifferentiated firms price at cost") {
    const DuopolyPrices pr = duopoly_prices(0.5, 0.5, 4.0, 2.0);
    REQUIRE(pr.p1 == 0.0);
    REQUIRE(pr.p2 == 0.0);
  }
  SECTION("an unchallenged frontier firm charges half the taste ceiling") {
    const DuopolyPrices pr = duopoly_prices(1.0, 0.0, 10.0, 3.0);
    REQUIRE(pr.p1 == Approx(5.0));
    REQUIRE(pr.p2 == 0.0);
  }
  SECTION("worked interior example") {
    const DuopolyPrices pr = duopoly_prices(1.0, 0.5, 4.0, 2.0);
    REQUIRE(pr.p1 == Approx(1.6));
    REQUIRE(pr.p2 == Approx(0.2));
  }
  SECTION("domain checks") {
    REQUIRE_THROWS_AS(duopoly_prices(0.0, 0.0, 4.0, 2.0), std::domain_error);
    REQUIRE_THROWS_AS(duopoly_prices(0.5, 0.7, 4.0, 2.0), std::domain_error);
    REQUIRE_THROWS_AS(duopoly_prices(0.5, 0.2, 0.0, 2.0), std::domain_error);
  }
}

TEST_CASE("monopoly reduction: solo duopoly revenue equals theta * x^lambda") {
  const double theta = 19.42, lambda = 2.15;
  const double theta_tilde = 4.0 * theta;
  for (double x1 : {0.25, 0.6, 1.0}) {
    const double X1 = std::pow(x1, lambda);
    const DuopolyPrices pr = duopoly_prices(x1, 0.0, theta_tilde, lambda);
    const auto [d1, d2] = detail::demand_shares(X1, 0.0, pr.p1, 0.0, theta_tilde);
    REQUIRE(d2 == 0.0);
    REQUIRE(pr.p1 * d1 == Approx(theta * X1).epsilon(1e-12));
  }
}

TEST_CASE("closed-form prices beat a dense price grid") {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> ux(0.05, 1.0);
  std::uniform_real_distribution<double> ufrac(0.05, 0.95);
  std::uniform_real_distribution<double> ul(1.5, 4.0);
  const double theta_tilde = 60.0;
  const int n = 1001;
  for (int trial = 0; trial < 10; ++trial) {
    const double x1 = ux(rng);
    const double x2 = ufrac(rng) * x1;
    const double lambda = ul(rng);
    const double X1 = std::pow(x1, lambda);
    const double X2 = std::pow(x2, lambda);
    const DuopolyPrices pr = duopoly_prices(x1, x2, theta_tilde, lambda);

    // Firm 1 revenue over a p1 grid, holding p2 at the closed form.
    double best_p1 = 0.0, best_r1 = -1.0;
    const double hi1 = theta_tilde * X1;
    for (int i = 0; i < n; ++i) {
      const double p1 = hi1 * i / (n - 1);
      const double r1 = p1 * detail::demand_shares(X1, X2, p1, pr.p2, theta_tilde).first;
      if (r1 > best_r1) { best_r1 = r1; best_p1 = p1; }
    }
    INFO("trial " << trial << " x1 " << x1 << " x2 " << x2 << " lambda " << lambda);
    REQUIRE(std::fabs(pr.p1 - best_p1) <= hi1 / (n - 1) + 1e-12);

    // Firm 2 revenue over a p2 grid, holding p1 at the closed form.
    double best_p2 = 0.0, best_r2 = -1.0;
    const double hi2 = theta_tilde * X2;
    for (int i = 0; i < n; ++i) {
      const double p2 = hi2 * i / (n - 1);
      const double r2 = p2 * detail::demand_shares(X1, X2, pr.p1, p2, theta_tilde).second;
      if (r2 > best_r2) { best_r2 = r2; best_p2 = p2; }
    }
    REQUIRE(std::fabs(pr.p2 - best_p2) <= hi2 / (n - 1) + 1e-12);
  }
}

TEST_CASE("duopoly profit conventions") {
  const ModelParams p = build_instance(InstanceName::C);
  const double theta_tilde = 4.0 * p.theta;

  SECTION("identical capabilities burn the energy bill") {
    DuopolyState s{0.5, 0.5, 3.0, 1.0, 9.9, 9.9, theta_tilde};
    const auto [pi1, pi2] = duopoly_profits(s, p);
    const double dem = energy_demand(0.5, p);
    REQUIRE(pi1 == Approx(-detail::procurement_cost(dem, 3.0, p)));
    REQUIRE(pi2 == Approx(-detail::procurement_cost(dem, 1.0, p)));
  }
  SECTION("an absent rival earns exactly zero") {
    const DuopolyPrices pr = duopoly_prices(0.8, 0.0, theta_tilde, p.lambda);
    DuopolyState s{0.8, 0.0, 2.0, 5.0, pr.p1, pr.p2, theta_tilde};
    const auto [pi1, pi2] = duopoly_profits(s, p);
    REQUIRE(pi2 == 0.0);
    const double dem = energy_demand(0.8, p);
    const double rev = p.theta * std::pow(0.8, p.lambda);
    REQUIRE(pi1 == Approx(rev - detail::procurement_cost(dem, 2.0, p)));
  }
  SECTION("equilibrium-price revenues match the share formulas") {
    const double x1 = 0.9, x2 = 0.4;
    const DuopolyPrices pr = duopoly_prices(x1, x2, theta_tilde, p.lambda);
    DuopolyState s{x1, x2, 0.0, 0.0, pr.p1, pr.p2, theta_tilde};
    const auto [pi1, pi2] = duopoly_profits(s, p);
    const double X1 = std::pow(x1, p.lambda), X2 = std::pow(x2, p.lambda);
    REQUIRE(pi1 + detail::procurement_cost(energy_demand(x1, p), 0.0, p) ==
            Approx(detail::rev_high(X1, X2, theta_tilde)).epsilon(1e-12));
    REQUIRE(pi2 + detail::procurement_cost(energy_demand(x2, p), 0.0, p) ==
            Approx(detail::rev_low(X1, X2, theta_tilde)).epsilon(1e-12));
  }
}

TEST_CASE("capability equilibrium: high stakes bring both firms in") {
  ModelParams p = build_instance(InstanceName::A);
  p.theta = 150.0;
  p.d0 = 50.0;
  const DuopolyOutcome o = duopoly_equilibrium(0.0, 0.0, p, 201);
  REQUIRE(o.converged);
  REQUIRE(o.region == DuopolyRegion::DualTrap);
  REQUIRE(o.x1 >= o.x2);
  REQUIRE(o.x2 > 0.0);
  REQUIRE(o.x1 < 1.0 + 1e-12);
  REQUIRE(o.e1 > 0.0);
  REQUIRE(o.e2 > 0.0);
  REQUIRE(o.p1 > o.p2);
  REQUIRE(o.profit1 > 0.0);
  REQUIRE(o.profit2 > 0.0);
  REQUIRE(o.coverage_share >= 0.0);
  REQUIRE(o.coverage_share <= 1.0);
  // No materially profitable continuum deviation for firm 2 (the grid argmax
  // may trail an off-grid peak by curvature-of-step-squared, hence the slack).
  const double X1 = std::pow(o.x1, p.lambda);
  for (double alt : {o.x2 * 0.5, o.x2 * 0.9, std::min(1.0, o.x2 * 1.1)}) {
    const double rev = detail::rev_low(X1, std::pow(alt, p.lambda), 4.0 * p.theta);
    const double pi = rev - detail::procurement_cost(energy_demand(alt, p), 0.0, p);
    REQUIRE(pi <= o.profit2 + 0.01);
  }
}

TEST_CASE("capability equilibrium: thin market collapses to monopoly") {
  ModelParams p = build_instance(InstanceName::A);
  p.theta = 5.0;
  p.d0 = 50.0;
  const DuopolyOutcome o = duopoly_equilibrium(0.0, 0.0, p, 201);
  REQUIRE(o.region == DuopolyRegion::MonopolyCollapse);
  REQUIRE(o.x2 == 0.0);
  // At this revenue level even the monopolist stays out with no capacity.
  REQUIRE(o.x1 == 0.0);

  p.theta = 90.0;
  const DuopolyOutcome m = duopoly_equilibrium(0.0, 0.0, p, 201);
  REQUIRE(m.region == DuopolyRegion::MonopolyCollapse);
  REQUIRE(m.x2 == 0.0);
  REQUIRE(m.x1 == 1.0);  // exact corner from the single-firm refinement
  REQUIRE(m.e1 > 0.0);
  REQUIRE(m.profit1 == Approx(p.theta - detail::procurement_cost(p.k, 0.0, p)));
}

TEST_CASE("duopoly welfare composes both firms against the shared stock") {
  ModelParams p = build_instance(InstanceName::A);
  p.theta = 150.0;
  p.d0 = 50.0;
  const DuopolyOutcome o = duopoly_equilibrium(2.0, 1.0, p, 101);
  const double w = duopoly_welfare(o, p);
  const double expect =
      p.eta * (o.profit1 + o.profit2) -
      p.xi * (1.0 - p.b * std::max(o.x1, o.x2)) * (p.d0 + o.e1 + o.e2) -
      p.cost.value(o.y1 + o.y2);
  REQUIRE(w == Approx(expect));
}

TEST_CASE("duopoly policy improves on no capacity and reports its own outcome") {
  ModelParams p = build_instance(InstanceName::A);
  p.theta = 15.0;
  p.d0 = 50.0;
  const DuopolyPolicyResult res = duopoly_policy(p, 101);
  REQUIRE(res.y1 >= 0.0);
  REQUIRE(res.y2 >= 0.0);
  REQUIRE(res.y1 <= p.k);
  REQUIRE(res.y2 <= p.k);
  REQUIRE(res.welfare == Approx(duopoly_welfare(res.outcome, p)));
  const DuopolyOutcome none = duopoly_equilibrium(0.0, 0.0, p, 101);
  REQUIRE(res.welfare >= duopoly_welfare(none, p) - 1e-9);
}

TEST_CASE("zero cost-reduction slope reproduces the base model bit for bit") {
  ModelParams p = build_instance(InstanceName::B);
  p.d0 = 20.0;
  const Equilibrium base = optimal_capacity(p);
  const Equilibrium same = phi_equilibrium(p, 0.0);
  REQUIRE(same.x_star == base.x_star);
  REQUIRE(same.y_star == base.y_star);
  REQUIRE(same.welfare == base.welfare);
  REQUIRE(same.emissions == base.emissions);
  REQUIRE(same.zone == base.zone);
}

TEST_CASE("cost reduction linked to capability pulls the trap onset forward") {
  const ModelParams p = build_instance(InstanceName::B);
  const double d_base = classify_regime(p).d_bar;
  const double d_mid = classify_regime(with_phi_slope(p, 0.3)).d_bar;
  const double d_high = classify_regime(with_phi_slope(p, 5.0 / 9.83)).d_bar;
  REQUIRE(d_base == Approx(41.925).margin(0.5));
  REQUIRE(d_high == Approx(11.775).margin(0.5));
  REQUIRE(d_mid < d_base);
  REQUIRE(d_high < d_mid);
}

TEST_CASE("remaining cost reduction under a slope matches the analytic value") {
  const ModelParams p = with_phi_slope(build_instance(InstanceName::B), 5.0 / 9.83);
  const auto rho = required_cost_reduction(p);
  REQUIRE(rho.has_value());
  const Prop1Margins m = prop1_margins(p);  // vprime_k already carries phi(1)
  const double analytic = 1.0 - m.rhs_b / m.vprime_k;
  REQUIRE(*rho == Approx(0.43262).margin(1e-3));
  REQUIRE(*rho == Approx(analytic).margin(1e-3));
}

TEST_CASE("invalid slopes and capacities are rejected") {
  const ModelParams p = build_instance(InstanceName::B);
  REQUIRE_THROWS_AS(with_phi_slope(p, 1.0), std::invalid_argument);
  REQUIRE_THROWS_AS(with_phi_slope(p, -0.2), std::invalid_argument);
  REQUIRE_THROWS_AS(duopoly_equilibrium(-1.0, 0.0, p, 101), std::invalid_argument);
}
