#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "scpnum/errors.hpp"
#include "scpnum/scenario.hpp"
#include "scpnum/scp_engine.hpp"
#include "support/instances.hpp"

using namespace scpnum;

namespace {

struct Single {
  Network net;
  std::vector<SCurveUtility> utils;
};

Single single(double capacity, double r = 256.0, double c1 = 6.0, double c2 = 2.0) {
  return {Network::build({{1, capacity}}, {{1, {1}}}), {SCurveUtility::make(r, c1, c2)}};
}

IterateState state_of(std::vector<double> xt, std::vector<double> xtp, std::vector<double> mu) {
  IterateState st;
  st.x_tilde = std::move(xt);
  st.x_tilde_prev = std::move(xtp);
  st.mu = std::move(mu);
  return st;
}

}  // namespace

TEST_CASE("g_true reference values") {
  auto sc = load_scenario("paper-scenario-1");
  const std::vector<double> ones(5, 1.0);
  CHECK(g_true(sc.net, sc.utils, ones, 0) == doctest::Approx(5 * 256.0));
  auto s = single(1000.0);
  CHECK(g_true(s.net, s.utils, std::vector<double>{0.25}, 0) == doctest::Approx(128.0));
}

TEST_CASE("g_hat reference values") {
  auto s = single(1000.0);
  const std::vector<double> xt{0.36};
  const std::vector<double> xtp{0.25};
  CHECK(g_hat(s.net, s.utils, xt, xtp, 0) == doctest::Approx(156.16).epsilon(1e-13));
  CHECK(g_true(s.net, s.utils, xt, 0) == doctest::Approx(153.6).epsilon(1e-13));
  CHECK(g_hat(s.net, s.utils, xtp, xtp, 0) == g_true(s.net, s.utils, xtp, 0));
  try {
    g_hat(s.net, s.utils, xt, std::vector<double>{0.0}, 0);
    FAIL("expected NonPositiveExpansionPoint");
  } catch (const NonPositiveExpansionPoint& e) {
    CHECK(e.id() == 1);
  }
}

TEST_CASE("update_prices") {
  // r = 1500, c2 = 1 and x~ = x~' = 1 give g^ = 1500 on a 1000 Kbps link.
  const Single s{Network::build({{1, 1000.0}}, {{1, {1}}}), {SCurveUtility::make(1500.0, 6.0, 1.0)}};
  CHECK(update_prices(s.net, s.utils, state_of({1.0}, {1.0}, {1.0}), 1e-4)[0] ==
        doctest::Approx(1.05).epsilon(1e-14));
  const Single exact{Network::build({{1, 1500.0}}, {{1, {1}}}), s.utils};
  CHECK(update_prices(exact.net, exact.utils, state_of({1.0}, {1.0}, {0.3}), 1e-4)[0] == 0.3);
  CHECK(price_step(1e-5, 1e-4, 1000.0, 0.0) == 0.0);
}

TEST_CASE("update_rates reference values") {
  auto s = single(1000.0);
  const auto up = update_rates(s.net, s.utils, std::vector<double>{1.0}, std::vector<double>{0.01}, 1e-12);
  CHECK(up.A[0] == doctest::Approx(-3.0577889653226026).epsilon(1e-14));
  CHECK(up.x_tilde[0] == doctest::Approx(0.2578968701109148).epsilon(1e-13));
  CHECK(up.x[0] == doctest::Approx(130.00588171151685).epsilon(1e-13));
  CHECK(up.rho[0] == 0.01);

  const double at_zero = std::exp(rate_intercept(s.utils[0]));
  const auto low = update_rates(s.net, s.utils, std::vector<double>{1.0}, std::vector<double>{at_zero}, 1e-12);
  CHECK(low.x_tilde[0] == transformed_lower(s.utils[0]));
  CHECK(low.x[0] == doctest::Approx(s.utils[0].m).epsilon(1e-12));

  const auto high = update_rates(s.net, s.utils, std::vector<double>{0.3}, std::vector<double>{1e-13}, 1e-12);
  CHECK(high.x_tilde[0] == transformed_upper(s.utils[0]));
  CHECK(high.x[0] == s.utils[0].M);
}

TEST_CASE("Scenario 1 solve") {
  const auto sc = load_scenario("paper-scenario-1");
  const auto res = solve(sc.net, sc.utils, sc.config);
  REQUIRE(res.converged);
  CHECK(res.iterations == 7);
  CHECK(res.trace.size() == static_cast<std::size_t>(res.iterations) + 1);
  CHECK(std::isnan(res.trace[0].stopping_metric));
  CHECK(res.trace.back().stopping_metric < 0.1);
  const double expected[] = {118.139, 191.238, 219.377, 232.255, 239.243};
  const double reference[] = {117.9658, 191.1745, 219.3638, 232.2520, 239.2439};
  for (int s = 0; s < 5; ++s) {
    CHECK(res.rates[s] == doctest::Approx(expected[s]).epsilon(1e-5));
    CHECK(std::abs(res.rates[s] - reference[s]) <= 2.0);
  }
  CHECK(res.prices[0] == doctest::Approx(0.006042).epsilon(1e-3));

  const auto& st = res.final_state;
  const auto kkt = kkt_residual(sc.net, sc.utils, st.x_tilde, st.x_tilde_prev, st.mu);
  for (double v : kkt.stationarity_normalized) CHECK(std::abs(v) <= 1e-2);
  CHECK(std::abs(kkt.slack_normalized[0]) <= 1e-2);
  CHECK(steady_state_check(sc.net, sc.utils, st, 0.5).passed);

  const auto again = solve(sc.net, sc.utils, sc.config);
  REQUIRE(again.trace.size() == res.trace.size());
  for (std::size_t k = 0; k < res.trace.size(); ++k) {
    CHECK(std::memcmp(again.trace[k].x.data(), res.trace[k].x.data(), 5 * sizeof(double)) == 0);
    CHECK(std::memcmp(again.trace[k].mu.data(), res.trace[k].mu.data(), sizeof(double)) == 0);
  }
}

TEST_CASE("single source") {
  SUBCASE("capacity binds") {
    auto s = single(100.0);
    const auto res = solve(s.net, s.utils, SolverConfig{});
    REQUIRE(res.converged);
    CHECK(std::abs(res.rates[0] - 100.0) <= 0.1);
  }
  SUBCASE("capacity above M") {
    auto s = single(300.0);
    const auto res = solve(s.net, s.utils, SolverConfig{});
    REQUIRE(res.converged);
    CHECK(res.rates[0] == doctest::Approx(256.0));
    CHECK(res.prices[0] == doctest::Approx(0.0).epsilon(1e-6));
  }
  SUBCASE("midpoint start with scalar price") {
    auto s = single(100.0);
    SolverConfig cfg;
    cfg.x0_policy = RateInit::midpoint;
    cfg.mu0_policy = PriceInit::scalar;
    cfg.mu0 = 0.01;
    const auto st = initial_state(s.net, s.utils, cfg);
    CHECK(st.x[0] == doctest::Approx(128.5));
    CHECK(st.mu[0] == 0.01);
    CHECK(st.x_tilde_prev == st.x_tilde);
  }
}

TEST_CASE("price lag orderings share a fixed point on Scenario 1") {
  const auto sc = load_scenario("paper-scenario-1");
  SolverConfig cfg = sc.config;
  cfg.gamma = 3e-5;
  cfg.epsilon = 1e-3;
  const auto fresh = solve(sc.net, sc.utils, cfg);
  cfg.price_lag = PriceLag::lagged;
  const auto lagged = solve(sc.net, sc.utils, cfg);
  REQUIRE(fresh.converged);
  REQUIRE(lagged.converged);
  for (int s = 0; s < 5; ++s) CHECK(std::abs(fresh.rates[s] - lagged.rates[s]) <= 0.05);

  // The fresh fixed point is (nearly) fixed under the lagged map.
  const auto next = advance(sc.net, sc.utils, fresh.final_state, cfg);
  for (int s = 0; s < 5; ++s) CHECK(std::abs(next.x[s] - fresh.rates[s]) <= 0.05);
}

TEST_CASE("kkt_residual") {
  auto s = single(100.0);
  const std::vector<double> xt{0.2};
  const auto k = kkt_residual(s.net, s.utils, xt, xt, std::vector<double>{0.0});
  CHECK(k.stationarity[0] == transformed_utility(s.utils[0], 0.2).first);
  CHECK(k.stationarity[0] > 0.0);
  CHECK(k.slack[0] == 0.0);
}

TEST_CASE("steady_state_check") {
  auto s = single(100.0);
  IterateState st = state_of({0.1}, {0.1}, {0.01});
  CHECK(steady_state_check(s.net, s.utils, st, 0.0).passed);
  st.x_tilde_prev = {0.6};
  const auto rep = steady_state_check(s.net, s.utils, st, 0.0);
  CHECK(rep.max_gap > 0.0);
  CHECK_FALSE(rep.passed);
}

TEST_CASE("engine properties on random instances") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  std::uniform_real_distribution<double> price(1e-4, 0.05);
  for (int trial = 0; trial < 30; ++trial) {
    const auto inst = testing::random_instance(rng);
    const auto& net = inst.net;
    const auto& utils = inst.utils;
    const std::size_t S = net.num_sources();
    std::vector<double> xt(S), xtp(S);
    for (auto& v : xt) v = unit(rng);
    for (auto& v : xtp) v = unit(rng);

    for (std::size_t l = 0; l < net.num_links(); ++l) {
      std::vector<double> raw(S);
      for (std::size_t s = 0; s < S; ++s) raw[s] = inverse_transform(utils[s], xt[s]);
      CHECK(g_true(net, utils, xt, l) ==
            doctest::Approx(link_loads(net, raw)[l]).epsilon(1e-12));
      CHECK(g_hat(net, utils, xt, xtp, l) >= g_true(net, utils, xt, l) - 1e-9);
    }

    std::vector<double> mu(net.num_links());
    for (auto& v : mu) v = price(rng);
    const auto base = update_rates(net, utils, xt, mu, 1e-12);
    for (std::size_t l = 0; l < mu.size(); ++l) {
      auto bumped = mu;
      bumped[l] *= 1.5;
      const auto up = update_rates(net, utils, xt, bumped, 1e-12);
      for (std::size_t s = 0; s < S; ++s) CHECK(up.x[s] <= base.x[s]);
    }
    for (std::size_t s = 0; s < S; ++s) {
      const auto& u = utils[s];
      const double lo = source_response(u, 0.5, 0.001, 1e-12).A - std::log(0.001);
      const double hi = source_response(u, 0.5, 0.002, 1e-12).A - std::log(0.002);
      CHECK(hi < lo);
    }
  }
}
