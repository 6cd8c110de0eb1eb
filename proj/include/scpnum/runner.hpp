#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "scpnum/oracle.hpp"
#include "scpnum/scenario.hpp"
#include "scpnum/scp_engine.hpp"

namespace scpnum {

enum class RunMode { engine, agents, both };

/// trace.csv: t, x_1..x_S, mu_1..mu_L, stopping_metric, g_1..g_L, ghat_1..ghat_L.
void write_trace_csv(std::ostream& out, std::span<const TraceRecord> trace);

/// Human-readable summary: rates, prices, feasibility, KKT residuals, steady state.
void write_result_report(std::ostream& out, const Scenario& sc, const AllocationResult& result);

struct TraceComparison {
  bool same_length = false;
  double max_rel_x = 0.0;
  double max_rel_mu = 0.0;
  std::size_t rows = 0;
};

/// Largest per-iteration relative difference in x and mu between two traces.
TraceComparison compare_traces(std::span<const TraceRecord> a, std::span<const TraceRecord> b);

struct OracleAgreement {
  double engine_utility = 0.0;
  double oracle_utility = 0.0;
  bool utility_match = false;  // |engine - oracle| <= tol
  LocalOptResult local_opt;
  OracleResult oracle;
  double oracle_seconds = 0.0;
  bool passed() const { return utility_match || local_opt.passed; }
  std::string which() const;
};

OracleAgreement check_oracle_agreement(const Network& net, std::span<const SCurveUtility> utils,
                                       std::span<const double> rates, const GridSpec& grid,
                                       const LocalOptSpec& local, double utility_tol = 1e-3);

/// Perturbation seed, overridden by SCPNUM_SEED (decimal) when set.
std::uint64_t perturbation_seed();

/// Runs a scenario and writes its reports to `dir`. Returns the process exit status.
int run_scenario(const Scenario& sc, RunMode mode, const std::filesystem::path& dir,
                 std::ostream& log);

/// Engine run plus oracle cross-check written to dir/validation.txt.
int validate_scenario(const Scenario& sc, const std::filesystem::path& dir, std::ostream& log);

}  // namespace scpnum
