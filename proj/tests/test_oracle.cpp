#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "powergame/calibration.hpp"
#include "powergame/oracle.hpp"
#include "test_common.hpp"

using namespace powergame;
using Catch::Approx;

TEST_CASE("fast inner argmax equals the plain grid scan") {
  for (const ModelParams& p : {testpg::market_led(), testpg::resource_led()}) {
    const int n_x = 2001;
    const detail::InnerGrid inner = detail::build_inner_grid(p, n_x);
    const GridSpec grid{n_x, 2};
    for (double frac : {0.0, 0.01, 0.1, 0.33, 0.5, 0.78, 0.99, 1.0}) {
      const double y = frac * p.k;
      const double fast_x = detail::fast_inner_argmax(inner, y, p);
      const double plain_x = oracle_best_response(y, p, grid);
      INFO("y = " << y);
      REQUIRE(fast_x == plain_x);  // identical candidate set and tie rule
    }
  }
}

TEST_CASE("random instances land in the requested regime and validate") {
  std::mt19937 rng(7);
  for (int i = 0; i < 50; ++i) {
    const ModelParams m = random_instance(rng, ScalingRegime::MarketLed);
    REQUIRE_NOTHROW(validate(m));
    REQUIRE(scaling_regime(m) == ScalingRegime::MarketLed);
    const ModelParams r = random_instance(rng, ScalingRegime::ResourceLed);
    REQUIRE_NOTHROW(validate(r));
    REQUIRE(scaling_regime(r) == ScalingRegime::ResourceLed);
  }
}

TEST_CASE("small randomized audit passes with the production solvers") {
  AuditConfig cfg;
  cfg.instances_per_regime = 8;
  cfg.seed = 99;
  cfg.grid = GridSpec{3001, 801};
  cfg.y_samples = 4;
  const AuditResult res = run_oracle_audit(cfg);
  REQUIRE(res.instances == 16);
  REQUIRE(res.br_failures == 0);
  REQUIRE(res.policy_failures == 0);
  REQUIRE(res.pass);
}

TEST_CASE("negative control: a corrupted best response fails the audit") {
  AuditConfig cfg;
  cfg.instances_per_regime = 4;
  cfg.seed = 99;
  cfg.grid = GridSpec{3001, 801};
  cfg.y_samples = 4;
  // Bias the reported response away from the optimum by a visible margin.
  BestResponseFn corrupted = [](double y, const ModelParams& p) {
    const double x = best_response(y, p).x_star;
    return std::min(1.0, std::max(0.0, x * 0.9 + 0.03));
  };
  const AuditResult res = run_oracle_audit(cfg, corrupted);
  REQUIRE(res.br_failures > 0);
  REQUIRE_FALSE(res.pass);
}

TEST_CASE("negative control: a corrupted policy optimum fails the audit") {
  AuditConfig cfg;
  cfg.instances_per_regime = 4;
  cfg.seed = 99;
  cfg.grid = GridSpec{3001, 801};
  cfg.y_samples = 2;
  PolicyFn corrupted = [](const ModelParams& p) {
    const Equilibrium eq = optimal_capacity(p);
    const double y = std::min(p.k, eq.y_star * 0.5 + 0.2 * p.k);
    return std::make_pair(y, policy_welfare(y, p));
  };
  const AuditResult res = run_oracle_audit(cfg, {}, corrupted);
  REQUIRE(res.policy_failures > 0);
  REQUIRE_FALSE(res.pass);
}
