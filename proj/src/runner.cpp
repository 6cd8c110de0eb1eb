#include "scpnum/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <string>

#include "scpnum/dist_sim.hpp"
#include "scpnum/errors.hpp"
#include "scpnum/format.hpp"

namespace scpnum {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void write_list(std::ostream& out, const char* label, std::span<const double> v) {
  out << label << ":";
  for (double x : v) out << ' ' << format_double(x);
  out << '\n';
}

double rel_diff(double a, double b) {
  if (a == b) return 0.0;
  return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

bool feasible_result(const Scenario& sc, const AllocationResult& r) {
  return is_feasible(sc.net, r.rates, rate_bounds(sc.utils), sc.config.feas_tol).feasible;
}

}  // namespace

void write_trace_csv(std::ostream& out, std::span<const TraceRecord> trace) {
  if (trace.empty()) return;
  const std::size_t n = trace.front().x.size();
  const std::size_t m = trace.front().mu.size();
  out << 't';
  for (std::size_t s = 1; s <= n; ++s) out << ",x_" << s;
  for (std::size_t l = 1; l <= m; ++l) out << ",mu_" << l;
  out << ",stopping_metric";
  for (std::size_t l = 1; l <= m; ++l) out << ",g_" << l;
  for (std::size_t l = 1; l <= m; ++l) out << ",ghat_" << l;
  out << '\n';
  for (const auto& rec : trace) {
    out << rec.t;
    for (double v : rec.x) out << ',' << format_double(v);
    for (double v : rec.mu) out << ',' << format_double(v);
    out << ',' << format_double(rec.stopping_metric);
    for (double v : rec.g) out << ',' << format_double(v);
    for (double v : rec.g_hat) out << ',' << format_double(v);
    out << '\n';
  }
}

void write_result_report(std::ostream& out, const Scenario& sc, const AllocationResult& result) {
  const auto bounds = rate_bounds(sc.utils);
  const auto report = is_feasible(sc.net, result.rates, bounds, sc.config.feas_tol);
  out << "scenario: " << sc.name << '\n';
  out << "converged: " << (result.converged ? "true" : "false") << '\n';
  out << "iterations: " << result.iterations << '\n';
  write_list(out, "rates_kbps", result.rates);
  write_list(out, "prices", result.prices);
  write_list(out, "link_loads_kbps", link_loads(sc.net, result.rates));
  out << "aggregate_utility: " << format_double(aggregate_utility(sc.utils, result.rates)) << '\n';
  out << "feasible: " << (report.feasible ? "true" : "false") << " (tol "
      << format_double(sc.config.feas_tol) << " Kbps)\n";
  for (const auto& v : report.violations) {
    out << "  violation: "
        << (v.condition == Violation::Condition::RateBounds ? "rate bounds, source " : "capacity, link ")
        << v.id << " excess " << format_double(v.excess) << '\n';
  }
  const auto& st = result.final_state;
  const auto kkt = kkt_residual(sc.net, sc.utils, st.x_tilde, st.x_tilde_prev, st.mu);
  write_list(out, "kkt_stationarity_normalized", kkt.stationarity_normalized);
  write_list(out, "kkt_slack_normalized", kkt.slack_normalized);
  const auto ss = steady_state_check(sc.net, sc.utils, st, sc.config.feas_tol);
  out << "steady_state: " << (ss.passed ? "pass" : "fail") << " max_gap "
      << format_double(ss.max_gap) << " max_excess " << format_double(ss.max_excess) << '\n';
}

TraceComparison compare_traces(std::span<const TraceRecord> a, std::span<const TraceRecord> b) {
  TraceComparison cmp;
  cmp.same_length = a.size() == b.size();
  cmp.rows = std::min(a.size(), b.size());
  for (std::size_t k = 0; k < cmp.rows; ++k) {
    for (std::size_t s = 0; s < a[k].x.size(); ++s) {
      cmp.max_rel_x = std::max(cmp.max_rel_x, rel_diff(a[k].x[s], b[k].x[s]));
    }
    for (std::size_t l = 0; l < a[k].mu.size(); ++l) {
      cmp.max_rel_mu = std::max(cmp.max_rel_mu, rel_diff(a[k].mu[l], b[k].mu[l]));
    }
  }
  return cmp;
}

std::string OracleAgreement::which() const {
  if (utility_match && local_opt.passed) return "utility-match+local-opt";
  if (utility_match) return "utility-match";
  if (local_opt.passed) return "local-opt";
  return "none";
}

OracleAgreement check_oracle_agreement(const Network& net, std::span<const SCurveUtility> utils,
                                       std::span<const double> rates, const GridSpec& grid,
                                       const LocalOptSpec& local, double utility_tol) {
  OracleAgreement out;
  const auto start = std::chrono::steady_clock::now();
  out.oracle = grid_search(net, utils, grid);
  out.oracle_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.engine_utility = aggregate_utility(utils, rates);
  out.oracle_utility = out.oracle.utility;
  out.utility_match = std::abs(out.engine_utility - out.oracle_utility) <= utility_tol;
  out.local_opt = local_opt_test(net, utils, rates, local);
  return out;
}

std::uint64_t perturbation_seed() {
  const char* env = std::getenv("SCPNUM_SEED");
  if (env == nullptr || *env == '\0') return LocalOptSpec{}.seed;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (*end != '\0' || *env == '-') {
    throw InvalidParameter(std::string("SCPNUM_SEED must be a decimal integer, got '") + env + "'");
  }
  return v;
}

int run_scenario(const Scenario& sc, RunMode mode, const std::filesystem::path& dir,
                 std::ostream& log) {
  std::filesystem::create_directories(dir);
  bool ok = true;

  AllocationResult engine;
  if (mode != RunMode::agents) {
    engine = solve(sc.net, sc.utils, sc.config);
    auto trace = open_out(dir / "trace.csv");
    write_trace_csv(trace, engine.trace);
    auto result = open_out(dir / "result.txt");
    result << "mode: engine\n";
    write_result_report(result, sc, engine);
    ok = ok && engine.converged && feasible_result(sc, engine);
    log << "engine: converged=" << (engine.converged ? "true" : "false")
        << " iterations=" << engine.iterations << '\n';
  }

  if (mode != RunMode::engine) {
    dist::Simulation sim(sc.net, sc.utils, sc.config);
    const auto agents = sim.run_to_convergence();
    const auto& alloc = agents.allocation;
    {
      auto msgs = open_out(dir / "messages.csv");
      dist::write_message_log_csv(msgs, agents.log);
    }
    auto trace = open_out(dir / (mode == RunMode::both ? "trace_agents.csv" : "trace.csv"));
    write_trace_csv(trace, alloc.trace);
    auto result = open_out(dir / (mode == RunMode::both ? "result_agents.txt" : "result.txt"));
    result << "mode: agents\n";
    write_result_report(result, sc, alloc);
    ok = ok && alloc.converged && feasible_result(sc, alloc);
    log << "agents: converged=" << (alloc.converged ? "true" : "false")
        << " rounds=" << alloc.iterations << " messages=" << agents.log.size() << '\n';

    if (mode == RunMode::both) {
      const auto cmp = compare_traces(engine.trace, alloc.trace);
      const bool equal = cmp.same_length && cmp.max_rel_x <= 1e-12 && cmp.max_rel_mu <= 1e-12;
      auto eq = open_out(dir / "equivalence.txt");
      eq << "engine_rows: " << engine.trace.size() << '\n'
         << "agent_rows: " << alloc.trace.size() << '\n'
         << "max_rel_diff_x: " << format_double(cmp.max_rel_x) << '\n'
         << "max_rel_diff_mu: " << format_double(cmp.max_rel_mu) << '\n'
         << "messages_per_round: " << 2 * sc.net.nnz() << '\n'
         << "equivalent: " << (equal ? "true" : "false") << '\n';
      log << "equivalence: max_rel_x=" << format_double(cmp.max_rel_x)
          << " max_rel_mu=" << format_double(cmp.max_rel_mu) << '\n';
      ok = ok && equal;
    }
  }
  return ok ? 0 : 1;
}

int validate_scenario(const Scenario& sc, const std::filesystem::path& dir, std::ostream& log) {
  GridSpec grid;
  if (sc.net.num_sources() > static_cast<std::size_t>(grid.max_sources)) {
    throw BudgetExceeded("validate supports at most " + std::to_string(grid.max_sources) +
                         " sources (grid cost grows exponentially with S); scenario has " +
                         std::to_string(sc.net.num_sources()));
  }
  std::filesystem::create_directories(dir);
  const auto engine = solve(sc.net, sc.utils, sc.config);
  LocalOptSpec local;
  local.seed = perturbation_seed();
  local.candidate_tol = sc.config.feas_tol;
  const auto agree = check_oracle_agreement(sc.net, sc.utils, engine.rates, grid, local);

  auto out = open_out(dir / "validation.txt");
  out << "scenario: " << sc.name << '\n'
      << "engine_converged: " << (engine.converged ? "true" : "false") << '\n'
      << "engine_iterations: " << engine.iterations << '\n';
  write_list(out, "engine_rates_kbps", engine.rates);
  out << "engine_utility: " << format_double(agree.engine_utility) << '\n';
  write_list(out, "oracle_rates_kbps", agree.oracle.rates);
  out << "oracle_utility: " << format_double(agree.oracle_utility) << '\n';
  write_list(out, "oracle_pass_utilities", agree.oracle.pass_utilities);
  out << "oracle_resolution_kbps: " << format_double(agree.oracle.resolution) << '\n'
      << "oracle_feasible: " << (agree.oracle.certificate.feasible ? "true" : "false") << '\n'
      << "oracle_seconds: " << format_double(agree.oracle_seconds) << '\n'
      << "utility_gap: " << format_double(agree.engine_utility - agree.oracle_utility) << '\n'
      << "utility_match: " << (agree.utility_match ? "true" : "false") << " (tol 1e-3)\n"
      << "local_opt: " << (agree.local_opt.passed ? "pass" : "fail") << " (radius "
      << format_double(local.radius) << " Kbps, " << local.samples << " samples, seed "
      << local.seed << ", " << agree.local_opt.feasible_samples << " feasible, best gain "
      << format_double(agree.local_opt.best_improvement) << ")\n"
      << "agreement: " << agree.which() << '\n';
  log << "validate: engine_utility=" << format_double(agree.engine_utility)
      << " oracle_utility=" << format_double(agree.oracle_utility)
      << " agreement=" << agree.which() << '\n';
  return engine.converged && agree.passed() ? 0 : 1;
}

}  // namespace scpnum
