#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "powergame/developer.hpp"
#include "powergame/numeric.hpp"
#include "test_common.hpp"

using namespace powergame;
using Catch::Approx;

namespace {

// Tiny independent argmax over x for one y, dense uniform grid only.
double brute_best_x(double y, const ModelParams& p, int n = 100001) {
  double best_x = 0.0, best_pi = developer_profit(0.0, y, p);
  for (double x : numeric::linspace(0.0, 1.0, n)) {
    const double pi = developer_profit(x, y, p);
    if (pi > best_pi + 1e-14 * std::max(1.0, std::fabs(best_pi)) ||
        (std::fabs(pi - best_pi) <= 1e-12 * std::max(1.0, std::fabs(best_pi)) &&
         x > best_x)) {
      best_pi = pi;
      best_x = x;
    }
  }
  return best_x;
}

}  // namespace

TEST_CASE("scaling regime splits on lambda vs 1+alpha") {
  REQUIRE(scaling_regime(testpg::market_led()) == ScalingRegime::MarketLed);
  REQUIRE(scaling_regime(testpg::resource_led()) == ScalingRegime::ResourceLed);
  ModelParams p = testpg::market_led();
  p.lambda = 1.0 + p.alpha;  // boundary counts as market-led
  REQUIRE(scaling_regime(p) == ScalingRegime::MarketLed);
}

TEST_CASE("f_threshold is resource-led only and orders by price") {
  const ModelParams p = testpg::resource_led();
  const double f_cf = f_threshold(p.c_f, p);
  const double f_cr = f_threshold(p.c_r, p);
  REQUIRE(f_cf < f_cr);  // cheaper energy supports higher capability
  REQUIRE(f_cf > 0.0);
  // Stationarity: marginal revenue equals marginal energy cost at f(c).
  const double x = f_cf;
  const double mr = p.theta * p.lambda * std::pow(x, p.lambda - 1.0);
  const double mc = (1.0 + p.alpha) * p.c_f * p.k * std::pow(x, p.alpha);
  REQUIRE(mr == Approx(mc).epsilon(1e-9));

  REQUIRE_THROWS_AS(f_threshold(p.c_f, testpg::market_led()), std::domain_error);
  REQUIRE_THROWS_AS(f_threshold(0.0, p), std::domain_error);
}

TEST_CASE("market-led best response walks inactive -> coupling -> decoupling") {
  const ModelParams p = testpg::market_led();
  const ResponseThresholds rt = response_thresholds(p);
  REQUIRE(rt.regime == ScalingRegime::MarketLed);
  REQUIRE(rt.y1 > 0.0);
  REQUIRE(rt.y2 > rt.y1);
  REQUIRE(rt.y2 < p.k);  // B's frontier is reached strictly inside [0,k]

  SECTION("zones by capacity range") {
    const double below = rt.y1 * 0.5;
    const double mid = 0.5 * (rt.y1 + rt.y2);
    const double above = 0.5 * (rt.y2 + p.k);

    const BestResponse lo = best_response(below, p);
    REQUIRE(lo.zone == ResponseZone::Inactive);
    REQUIRE(lo.x_star == 0.0);

    const BestResponse md = best_response(mid, p);
    REQUIRE(md.zone == ResponseZone::Coupling);
    REQUIRE(md.x_star == Approx(coupling_capability(mid, p)).epsilon(1e-9));
    // Coupling means demand exactly exhausts capacity: zero residual.
    REQUIRE(emissions(md.x_star, mid, p) <= 1e-12);

    // Above y2 the developer runs at the frontier; capacity covers only part
    // of frontier demand, so the residual is fossil and emissions are positive.
    const BestResponse hi = best_response(above, p);
    REQUIRE(hi.zone == ResponseZone::DecouplingFossil);
    REQUIRE(hi.x_star == 1.0);
    REQUIRE(emissions(1.0, above, p) > 0.0);
  }

  SECTION("scanned thresholds agree with the closed forms") {
    REQUIRE(rt.y1_closed.has_value());
    REQUIRE(rt.y1 == Approx(*rt.y1_closed).margin(1e-7 * p.k));
    REQUIRE(rt.y2_closed.has_value());
    REQUIRE(rt.y2 == Approx(*rt.y2_closed).margin(1e-7 * p.k));
  }

  SECTION("threshold capacities flip the response") {
    REQUIRE(best_response(rt.y1 * (1.0 - 1e-6), p).x_star == 0.0);
    REQUIRE(best_response(rt.y1 * (1.0 + 1e-6), p).x_star > 0.0);
    REQUIRE(best_response(rt.y2 * (1.0 - 1e-4), p).x_star < 1.0);
    REQUIRE(best_response(rt.y2 * (1.0 + 1e-4), p).x_star == 1.0);
  }
}

TEST_CASE("degenerate market-led instance is active at zero capacity") {
  // theta far above the decoupling bar: the developer runs at the frontier on
  // fossil power even with no renewable capacity at all.
  ModelParams p = testpg::market_led();
  p.theta = 109.08;
  p.lambda = 3.83;
  p.k = 177.51;
  p.c_r = 0.05;
  p.c_f = 0.0883686;
  p.cost.g = 15.83;
  const ResponseThresholds rt = response_thresholds(p);
  REQUIRE(rt.y1 == 0.0);
  REQUIRE(rt.y2 == 0.0);
  REQUIRE(best_response(0.0, p).x_star == 1.0);
  REQUIRE(best_response(0.0, p).zone == ResponseZone::DecouplingFossil);
  // At y = k the frontier response exactly exhausts capacity -> coupling label.
  REQUIRE(best_response(p.k, p).zone == ResponseZone::Coupling);
  REQUIRE(best_response(0.5 * p.k, p).zone == ResponseZone::DecouplingFossil);
}

TEST_CASE("resource-led best response pins interior stationary capabilities") {
  const ModelParams p = testpg::resource_led();
  const ResponseThresholds rt = response_thresholds(p);
  REQUIRE(rt.regime == ScalingRegime::ResourceLed);
  REQUIRE(rt.y_lo > 0.0);
  REQUIRE(rt.y_lo < p.k);
  REQUIRE(rt.y_hi > p.k);  // C's renewable-price stationary point is beyond k

  SECTION("fossil zone below y_lo") {
    const BestResponse br = best_response(rt.y_lo * 0.25, p);
    REQUIRE(br.zone == ResponseZone::DecouplingFossil);
    REQUIRE(br.x_star == Approx(std::min(1.0, rt.f_cf)).epsilon(1e-9));
    REQUIRE(emissions(br.x_star, rt.y_lo * 0.25, p) > 0.0);
  }
  SECTION("coupling zone between y_lo and min(y_hi, k)") {
    const double y = 0.5 * (rt.y_lo + p.k);
    const BestResponse br = best_response(y, p);
    REQUIRE(br.zone == ResponseZone::Coupling);
    REQUIRE(br.x_star == Approx(coupling_capability(y, p)).epsilon(1e-9));
    REQUIRE(emissions(br.x_star, y, p) <= 1e-12);
  }
  SECTION("renewable-decoupling zone needs y_hi within [0,k]") {
    // Raise theta until f(c_r) < 1, then check the zone appears above y_hi.
    ModelParams q = p;
    q.theta = 4.0;
    const ResponseThresholds rq = response_thresholds(q);
    REQUIRE(rq.y_hi < q.k);
    const double y = 0.5 * (rq.y_hi + q.k);
    const BestResponse br = best_response(y, q);
    REQUIRE(br.zone == ResponseZone::DecouplingRenewable);
    REQUIRE(br.x_star == Approx(rq.f_cr).epsilon(1e-9));
    REQUIRE(br.x_star < 1.0);
  }
}

TEST_CASE("best response maximizes profit against a dense scan") {
  for (const ModelParams& p : {testpg::market_led(), testpg::resource_led()}) {
    for (double frac : {0.0, 0.05, 0.2, 0.37, 0.5, 0.73, 0.9, 1.0}) {
      const double y = frac * p.k;
      const BestResponse br = best_response(y, p);
      const double xs = brute_best_x(y, p);
      const double pi_cl = developer_profit(br.x_star, y, p);
      const double pi_sc = developer_profit(xs, y, p);
      INFO("y = " << y << " closed " << br.x_star << " scan " << xs);
      REQUIRE(pi_cl >= pi_sc - 1e-9 * std::max(1.0, std::fabs(pi_sc)));
      REQUIRE(std::fabs(br.x_star - xs) <= 2e-5);  // within two scan steps
    }
  }
}

TEST_CASE("ties resolve to the larger capability") {
  // At y exactly y1 the inactive and interior responses tie; the reported
  // response must be the larger (active) one at y1 and beyond.
  const ModelParams p = testpg::market_led();
  const ResponseThresholds rt = response_thresholds(p);
  const BestResponse at = best_response(rt.y1, p);
  REQUIRE(at.x_star >= 0.0);
  const BestResponse just_above = best_response(rt.y1 + 1e-9 * p.k, p);
  REQUIRE(just_above.x_star > 0.0);
}
