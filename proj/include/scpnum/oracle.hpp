#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "scpnum/network.hpp"
#include "scpnum/utility.hpp"

namespace scpnum {

struct GridSpec {
  int points_per_dim = 64;
  int refinement_passes = 2;  // each pass shrinks the box 4x per dimension around the incumbent
  double feas_tol = 1e-6;     // Kbps
  std::uint64_t budget = std::uint64_t{1} << 31;  // grid points per pass
  int max_sources = 5;
};

struct OracleResult {
  std::vector<double> rates;
  double utility = 0.0;
  FeasibilityReport certificate;
  double resolution = 0.0;             // largest grid spacing of the final pass, Kbps
  std::vector<double> pass_utilities;  // best utility after the initial grid and each refinement
};

/// Exhaustive search of max sum U_s(x_s) s.t. Rx <= c, m <= x <= M.
///
/// The first S-1 rates are enumerated on the grid; the last rate is set to the
/// largest value the remaining capacity allows, which is exact because every
/// utility is strictly increasing. Ties go to the lexicographically smallest point.
///
/// \throws NoFeasiblePoint if the minimum rates already exceed some capacity.
/// \throws BudgetExceeded if S exceeds spec.max_sources or a pass exceeds spec.budget.
OracleResult grid_search(const Network& net, std::span<const SCurveUtility> utils,
                         const GridSpec& spec = {});

struct LocalOptSpec {
  double radius = 2.0;   // Kbps
  int samples = 1000;
  std::uint64_t seed = 0x5eed2016ULL;
  double candidate_tol = 0.5;     // admission tolerance for the candidate, Kbps
  double sample_tol = 1e-6;       // feasibility tolerance for perturbed points, Kbps
  double improvement_tol = 1e-9;  // utility
};

struct LocalOptResult {
  bool passed = true;
  int feasible_samples = 0;
  double best_improvement = 0.0;
  std::optional<std::vector<double>> improving_point;
};

/// Samples points uniformly in the ball of the given radius around the candidate
/// and reports whether any feasible one improves the aggregate utility.
///
/// \throws InfeasibleCandidate if the candidate violates bounds or capacity by
///         more than spec.candidate_tol.
LocalOptResult local_opt_test(const Network& net, std::span<const SCurveUtility> utils,
                              std::span<const double> candidate, const LocalOptSpec& spec = {});

struct DifferentiableFunction {
  std::function<double(std::span<const double>)> value;
  std::function<std::vector<double>(std::span<const double>)> gradient;
  std::vector<double> lower;  // open domain box; empty means unbounded
  std::vector<double> upper;
};

/// max_i |analytic_i - fd_i| / (|analytic_i| + 1e-15) using central differences.
/// The step is relative: h_i = step * |x_i|, or step when x_i = 0.
/// \throws DomainBoundary if a stencil point leaves the open domain box.
double fd_gradient_check(const DifferentiableFunction& f, std::span<const double> point,
                         double step);

}  // namespace scpnum
