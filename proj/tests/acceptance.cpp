// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "scpnum/dist_sim.hpp"
#include "scpnum/oracle.hpp"
#include "scpnum/runner.hpp"
#include "scpnum/scenario.hpp"
#include "scpnum/scp_engine.hpp"
#include "support/instances.hpp"

using namespace scpnum;

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;

void verdict(int id, bool ok, const std::string& detail) {
  std::printf("criterion %2d: %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

void note(const std::string& line) { std::printf("    %s\n", line.c_str()); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct KktSummary {
  double stationarity = 0.0;  // max over interior sources
  double slack = 0.0;         // max |mu (g - c)| / c
};

KktSummary kkt_summary(const Scenario& sc, const AllocationResult& res) {
  const auto& st = res.final_state;
  const auto k = kkt_residual(sc.net, sc.utils, st.x_tilde, st.x_tilde_prev, st.mu);
  KktSummary out;
  for (std::size_t s = 0; s < sc.utils.size(); ++s) {
    if (res.rates[s] > sc.utils[s].m && res.rates[s] < sc.utils[s].M) {
      out.stationarity = std::max(out.stationarity, std::abs(k.stationarity_normalized[s]));
    }
  }
  for (double v : k.slack_normalized) out.slack = std::max(out.slack, std::abs(v));
  return out;
}

bool kkt_ok(const KktSummary& k) { return k.stationarity <= 1e-2 && k.slack <= 1e-2; }

std::string kkt_text(const KktSummary& k) {
  return "stationarity " + fmt("%.3g", k.stationarity) + " (<= 1e-2), slack/c " +
         fmt("%.3g", k.slack) + " (<= 1e-2)";
}

bool steady_ok(const Scenario& sc, const AllocationResult& res, std::string& detail) {
  const auto& st = res.final_state;
  double gap = 0.0;
  double excess = -1e300;
  for (std::size_t l = 0; l < sc.net.num_links(); ++l) {
    const double g = g_true(sc.net, sc.utils, st.x_tilde, l);
    const double gh = g_hat(sc.net, sc.utils, st.x_tilde, st.x_tilde_prev, l);
    gap = std::max(gap, std::abs(gh - g));
    excess = std::max(excess, g - sc.net.capacity(l));
  }
  detail = "max |g_hat - g| " + fmt("%.3g", gap) + " Kbps (<= 0.5), max g - c " +
           fmt("%.3g", excess) + " Kbps (<= 0.5)";
  return gap <= 0.5 && excess <= 0.5;
}

struct TangentStats {
  long pairs = 0;
  double worst_under = 0.0;  // max (g_true - g_hat)
  double worst_equal = 0.0;  // max |g_hat - g_true| at x~ = x~'
};

void tangent_pairs(const Network& net, std::span<const SCurveUtility> utils, std::mt19937_64& rng,
                   int count, TangentStats& stats) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t S = net.num_sources();
  std::vector<double> xt(S), xtp(S);
  auto draw = [&](std::vector<double>& v) {
    for (std::size_t s = 0; s < S; ++s) {
      const double lo = transformed_lower(utils[s]);
      const double hi = transformed_upper(utils[s]);
      v[s] = lo + (hi - lo) * unit(rng);
    }
  };
  for (int k = 0; k < count; ++k) {
    draw(xt);
    draw(xtp);
    for (std::size_t l = 0; l < net.num_links(); ++l) {
      const double g = g_true(net, utils, xt, l);
      stats.worst_under = std::max(stats.worst_under, g - g_hat(net, utils, xt, xtp, l));
      const double eq = std::abs(g_hat(net, utils, xt, xt, l) - g);
      stats.worst_equal = std::max(stats.worst_equal, eq);
    }
    ++stats.pairs;
  }
}

bool tangent_ok(const TangentStats& t) { return t.worst_under <= 1e-9 && t.worst_equal <= 1e-12; }

std::string tangent_text(const TangentStats& t) {
  return std::to_string(t.pairs) + " pairs, max (g - g_hat) " + fmt("%.3g", t.worst_under) +
         " (<= 1e-9), max |g_hat - g| at x~=x~' " + fmt("%.3g", t.worst_equal) + " (<= 1e-12)";
}

struct AgreementLine {
  bool ok = false;
  std::string text;
};

AgreementLine oracle_agreement(const Network& net, std::span<const SCurveUtility> utils,
                               std::span<const double> rates, double candidate_tol) {
  LocalOptSpec local;
  local.radius = 2.0;
  local.samples = 1000;
  local.candidate_tol = candidate_tol;
  local.seed = perturbation_seed();
  GridSpec grid;
  grid.refinement_passes = 2;
  const auto a = check_oracle_agreement(net, utils, rates, grid, local, 1e-3);
  AgreementLine out;
  out.ok = a.passed() && a.oracle_seconds <= 60.0;
  out.text = "engine U " + fmt("%.6f", a.engine_utility) + ", oracle U " +
             fmt("%.6f", a.oracle_utility) + ", gap " +
             fmt("%+.2e", a.engine_utility - a.oracle_utility) + ", local-opt " +
             (a.local_opt.passed ? "pass" : "fail") + ", held: " + a.which() + ", oracle " +
             fmt("%.2f", a.oracle_seconds) + " s";
  return out;
}

bool traces_equivalent(const Scenario& sc, std::string& detail) {
  const auto engine = solve(sc.net, sc.utils, sc.config);
  dist::Simulation sim(sc.net, sc.utils, sc.config);
  bool counts_ok = true;
  std::vector<TraceRecord> agent_trace;
  IterateState prev = sim.snapshot();
  agent_trace.push_back(make_trace_record(sc.net, sc.utils, prev, nullptr));
  while (sim.round() < sc.config.max_iter) {
    const auto out = sim.run_round();
    counts_ok = counts_ok && out.messages.size() == 2 * sc.net.nnz();
    IterateState cur = sim.snapshot();
    agent_trace.push_back(make_trace_record(sc.net, sc.utils, cur, &prev));
    prev = std::move(cur);
    if (out.stopping_metric < sc.config.epsilon) break;
  }
  const auto cmp = compare_traces(engine.trace, agent_trace);
  detail = sc.name + ": " + std::to_string(cmp.rows) + " rows, max rel diff x " +
           fmt("%.3g", cmp.max_rel_x) + ", mu " + fmt("%.3g", cmp.max_rel_mu) +
           " (<= 1e-12), messages/round " + (counts_ok ? "= " : "!= ") +
           std::to_string(2 * sc.net.nnz());
  return cmp.same_length && cmp.max_rel_x <= 1e-12 && cmp.max_rel_mu <= 1e-12 && counts_ok;
}

}  // namespace

int main() {
  const auto s1 = load_scenario("paper-scenario-1");
  const auto chain = load_scenario("chain-3");

  // 1. Scenario 1 reproduction.
  const auto t0 = Clock::now();
  const auto r1 = solve(s1.net, s1.utils, s1.config);
  const double run_s = seconds_since(t0);
  {
    const double reference[] = {117.9658, 191.1745, 219.3638, 232.2520, 239.2439};
    double dev = 0.0;
    for (int s = 0; s < 5; ++s) dev = std::max(dev, std::abs(r1.rates[s] - reference[s]));
    const double load = link_loads(s1.net, r1.rates)[0];
    std::string rates;
    for (double x : r1.rates) rates += fmt(" %.4f", x);
    note("rates:" + rates);
    verdict(1, r1.converged && dev <= 2.0 && load >= 999.0 && load <= 1000.5 && run_s < 1.0,
            "max |x - reference| " + fmt("%.4f", dev) + " Kbps (<= 2.0), load " +
                fmt("%.4f", load) + " Kbps in [999.0, 1000.5], " + fmt("%.4f", run_s) +
                " s (< 1)");
  }

  // 2. Convergence speed.
  verdict(2, r1.converged && r1.iterations <= 500,
          std::to_string(r1.iterations) + " iterations (<= 500; reference run reports 12)");

  // 3. KKT certificate.
  const auto k1 = kkt_summary(s1, r1);
  verdict(3, kkt_ok(k1), kkt_text(k1));

  // 4. Steady-state equivalence.
  {
    std::string detail;
    const bool ok = steady_ok(s1, r1, detail);
    verdict(4, ok, detail);
  }

  // 5. Tangent inner approximation.
  {
    std::mt19937_64 rng(5);
    TangentStats stats;
    int instances = 0;
    for (; instances < 12; ++instances) {
      const auto inst = testing::random_instance(rng);
      tangent_pairs(inst.net, inst.utils, rng, 100, stats);
    }
    verdict(5, tangent_ok(stats) && instances >= 10 && stats.pairs >= 1000,
            std::to_string(instances) + " instances, " + tangent_text(stats));
  }

  // 6. Derivative correctness.
  {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> frac(0.01, 0.99);
    double worst_u = 0.0;
    double worst_g = 0.0;
    int points_u = 0;
    int points_g = 0;
    while (points_u < 200) {
      const auto inst = testing::random_instance(rng);
      for (const auto& u : inst.utils) {
        for (int k = 0; k < 20; ++k, ++points_u) {
          const double x = u.m + (u.M - u.m) * frac(rng);
          DifferentiableFunction f{
              [u](std::span<const double> p) { return transformed_utility(u, p[0]).value; },
              [u](std::span<const double> p) {
                return std::vector<double>{transformed_utility(u, p[0]).first};
              },
              {0.0},
              {}};
          worst_u = std::max(worst_u, fd_gradient_check(f, std::vector<double>{transform(u, x)}, 1e-6));
        }
      }
      const auto& net = inst.net;
      const auto& utils = inst.utils;
      for (int k = 0; k < 20; ++k) {
        std::vector<double> p(utils.size());
        for (std::size_t s = 0; s < p.size(); ++s) {
          p[s] = transform(utils[s], utils[s].m + (utils[s].M - utils[s].m) * frac(rng));
        }
        for (std::size_t l = 0; l < net.num_links(); ++l, ++points_g) {
          DifferentiableFunction f{
              [&, l](std::span<const double> q) { return g_true(net, utils, q, l); },
              [&, l](std::span<const double> q) { return g_true_gradient(net, utils, q, l); },
              std::vector<double>(p.size(), 0.0),
              {}};
          worst_g = std::max(worst_g, fd_gradient_check(f, p, 1e-6));
        }
      }
    }
    verdict(6, worst_u <= 1e-6 && worst_g <= 1e-6 && points_u >= 100 && points_g >= 100,
            "utility derivative: " + std::to_string(points_u) + " points, max rel err " +
                fmt("%.3g", worst_u) + "; constraint gradient: " + std::to_string(points_g) +
                " points, max rel err " + fmt("%.3g", worst_g) + " (<= 1e-6)");
  }

  // 7. Oracle agreement on Scenario 1 and 20 random instances.
  {
    bool all = true;
    const auto s1a = oracle_agreement(s1.net, s1.utils, r1.rates, s1.config.feas_tol);
    note("paper-scenario-1: " + s1a.text);
    all = all && s1a.ok;

    std::mt19937_64 rng(7);
    int accepted = 0;
    int rejected_dup = 0;
    int rejected_share = 0;
    int rejected_gain = 0;
    int held = 0;
    while (accepted < 20) {
      const auto inst = testing::random_instance(rng, 3, 3, 2);
      if (testing::has_duplicate_links(inst.net)) {
        ++rejected_dup;
        continue;
      }
      if (testing::fair_share_below_inflection(inst)) {
        ++rejected_share;
        continue;
      }
      const auto opt = grid_search(inst.net, inst.utils);
      SolverConfig cfg;
      cfg.gamma = 1e-4;
      cfg.epsilon = 1e-3;
      if (testing::loop_gain(inst, opt.rates, cfg.gamma) > 1.0) {
        ++rejected_gain;
        continue;
      }
      ++accepted;
      const auto res = solve(inst.net, inst.utils, cfg);
      const auto a = oracle_agreement(inst.net, inst.utils, res.rates, cfg.feas_tol);
      const bool ok = res.converged && a.ok;
      held += ok;
      all = all && ok;
      note("random " + std::to_string(accepted) + " (S=" + std::to_string(inst.net.num_sources()) +
           ", L=" + std::to_string(inst.net.num_links()) + ", " + std::to_string(res.iterations) +
           " it" + (res.converged ? "" : ", not converged") + "): " + a.text);
    }
    note("random instances drawn and set aside: " + std::to_string(rejected_dup) +
         " duplicate link sets, " + std::to_string(rejected_share) +
         " fair share below 1.1x inflection, " + std::to_string(rejected_gain) +
         " loop gain above 1");
    verdict(7, all, "scenario 1 " + std::string(s1a.ok ? "agrees" : "disagrees") + ", " +
                        std::to_string(held) + "/20 random instances agree");
  }

  // 8. Distributed equivalence.
  {
    std::string d1;
    std::string d2;
    const bool ok1 = traces_equivalent(s1, d1);
    const bool ok2 = traces_equivalent(chain, d2);
    verdict(8, ok1 && ok2, d1 + "; " + d2);
  }

  // 9. Transform round trip.
  {
    double worst = 0.0;
    int sets = 0;
    for (double c2 : {1.0, 2.0, 4.0, 6.0, 8.0, 10.0}) {
      for (double c1 : {1.0, 6.0}) {
        const auto u = SCurveUtility::make(256.0, c1, c2);
        for (int k = 0; k < 1000; ++k) {
          const double x = u.m + (u.M - u.m) * k / 999.0;
          worst = std::max(worst, std::abs(inverse_transform(u, transform(u, x)) - x) / x);
        }
        ++sets;
      }
    }
    verdict(9, worst <= 1e-12, std::to_string(sets) + " parameter sets x 1000 points, max rel err " +
                                   fmt("%.3g", worst) + " (<= 1e-12)");
  }

  // 10. chain-3 stands in for the multi-bottleneck scenario.
  {
    const auto rc = solve(chain.net, chain.utils, chain.config);
    const auto kc = kkt_summary(chain, rc);
    std::string steady;
    const bool ss = steady_ok(chain, rc, steady);
    std::mt19937_64 rng(10);
    TangentStats tan;
    tangent_pairs(chain.net, chain.utils, rng, 1000, tan);
    const auto agree = oracle_agreement(chain.net, chain.utils, rc.rates, chain.config.feas_tol);
    note("chain-3 converged in " + std::to_string(rc.iterations) + " iterations");
    note("kkt: " + kkt_text(kc));
    note("steady state: " + steady);
    note("tangent: " + tangent_text(tan));
    note("oracle: " + agree.text);
    std::ifstream readme(SCPNUM_SOURCE_DIR "/README.md");
    std::ostringstream buf;
    buf << readme.rdbuf();
    const bool documented = buf.str().find("210, 425, 610, 425, 210") != std::string::npos;
    note(std::string("README records the unreproduced capacity vector: ") + (documented ? "yes" : "no"));
    verdict(10, rc.converged && kkt_ok(kc) && ss && tangent_ok(tan) && agree.ok && documented,
            "chain-3 converges and meets the KKT, steady-state, tangent and oracle checks");
  }

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
