#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "scpnum/network.hpp"
#include "scpnum/utility.hpp"

namespace scpnum {

/// Which link prices the rate update reads within one iteration.
///   fresh  : mu^(t+1), produced by the price update of the same iteration.
///   lagged : mu^(t), the prices from before the price update.
enum class PriceLag { fresh, lagged };

enum class RateInit { fair_share, midpoint, explicit_vector };
enum class PriceInit { stationary, scalar, per_link };

struct SolverConfig {
  double gamma = 1e-4;
  double epsilon = 0.1;  // Kbps
  int max_iter = 10000;

  RateInit x0_policy = RateInit::fair_share;
  std::vector<double> x0;  // Kbps, one per source, read when x0_policy == explicit_vector

  PriceInit mu0_policy = PriceInit::stationary;
  double mu0 = 1.0;                  // read when mu0_policy == scalar
  std::vector<double> mu0_per_link;  // read when mu0_policy == per_link

  double rho_floor = 1e-12;
  double feas_tol = 0.5;  // Kbps
  PriceLag price_lag = PriceLag::fresh;

  /// Throws InvalidParameter.
  void validate(std::size_t num_sources, std::size_t num_links) const;
};

/// Iterate of the SCP-DC price/rate loop at iteration t.
struct IterateState {
  int t = 0;
  std::vector<double> x_tilde;       // x~^(t)
  std::vector<double> x_tilde_prev;  // x~^(t-1), the expansion point of the next price update
  std::vector<double> mu;            // mu^(t), per link
  std::vector<double> rho;           // per-source path price used to produce x~^(t)
  std::vector<double> A;             // per-source intercept used to produce x~^(t)
  std::vector<double> x;             // Kbps, clamp(r x~^(1/c2)) into [m, M]
};

struct TraceRecord {
  int t;
  std::vector<double> x;
  std::vector<double> x_tilde;
  std::vector<double> mu;
  std::vector<double> rho;
  double stopping_metric;   // max_s |x_s^(t) - x_s^(t-1)|; NaN at t = 0
  std::vector<double> g;    // g_l(x~^(t))
  std::vector<double> g_hat;  // g^_l(x~^(t), x~^(t-1))
};

struct AllocationResult {
  std::vector<double> rates;
  std::vector<double> prices;
  int iterations = 0;
  bool converged = false;
  std::vector<TraceRecord> trace;  // trace[0] is the initial state
  IterateState final_state;
};

// Per-source and per-link building blocks. The distributed simulation calls
// these same functions so both execution paths share their arithmetic.

/// r (x~'^(1/c2) + (1/c2) x~'^(1/c2 - 1) (x~ - x~')), one source's share of g^_l.
double linearized_term(const SCurveUtility& u, double x_tilde, double x_tilde_prev);
/// log(c1 c2 / (r (1 - exp(-c1)))).
double rate_intercept(const SCurveUtility& u);

struct SourceResponse {
  double A;
  double x_tilde;
  double x;
};

/// Closed-form rate update of one source given its path price.
SourceResponse source_response(const SCurveUtility& u, double x_tilde, double rho,
                               double rho_floor);

/// [mu - gamma (c - g^)]^+.
double price_step(double mu, double gamma, double capacity, double linearized_load);

/// Path price of source `s`: prices summed over its route in ascending link order.
double path_price(const Network& net, std::span<const double> mu, std::size_t s);

// Link constraint functions over transformed rates; `l` is a link index.

double g_true(const Network& net, std::span<const SCurveUtility> utils,
              std::span<const double> x_tilde, std::size_t l);
/// d g_l / d x~_s for every source (zero off the link).
std::vector<double> g_true_gradient(const Network& net, std::span<const SCurveUtility> utils,
                                    std::span<const double> x_tilde, std::size_t l);
/// Throws NonPositiveExpansionPoint naming the source whose x~'_s <= 0.
double g_hat(const Network& net, std::span<const SCurveUtility> utils,
             std::span<const double> x_tilde, std::span<const double> x_tilde_prev,
             std::size_t l);

/// Gradient-projection price update using x~^(t) linearized around x~^(t-1).
std::vector<double> update_prices(const Network& net, std::span<const SCurveUtility> utils,
                                  const IterateState& state, double gamma);

struct RateUpdate {
  std::vector<double> rho;
  std::vector<double> A;
  std::vector<double> x_tilde;
  std::vector<double> x;
};

/// Rate update from the current transformed rates and the given link prices.
RateUpdate update_rates(const Network& net, std::span<const SCurveUtility> utils,
                        std::span<const double> x_tilde, std::span<const double> mu,
                        double rho_floor);
RateUpdate update_rates(const Network& net, std::span<const SCurveUtility> utils,
                        const IterateState& state, double rho_floor);

/// Initial rates in Kbps per the configured rule.
std::vector<double> initial_rates(const Network& net, std::span<const SCurveUtility> utils,
                                  const SolverConfig& config);
/// Initial link prices per the configured rule, given initial rates.
std::vector<double> initial_prices(const Network& net, std::span<const SCurveUtility> utils,
                                   std::span<const double> x0, const SolverConfig& config);

/// State at t = 0 with x~^(-1) = x~^(0).
IterateState initial_state(const Network& net, std::span<const SCurveUtility> utils,
                           const SolverConfig& config);
/// One iteration: price update, then rate update.
IterateState advance(const Network& net, std::span<const SCurveUtility> utils,
                     const IterateState& state, const SolverConfig& config);

/// Trace record for a state; `previous` supplies the stopping metric (null at t = 0).
TraceRecord make_trace_record(const Network& net, std::span<const SCurveUtility> utils,
                              const IterateState& state, const IterateState* previous);

/// Runs the loop until max_s |x^(t+1) - x^(t)| < epsilon or max_iter iterations.
/// A run that hits max_iter is returned with converged == false.
AllocationResult solve(const Network& net, std::span<const SCurveUtility> utils,
                       const SolverConfig& config);

struct KktResidual {
  std::vector<double> stationarity;             // dL/dx~_s
  std::vector<double> stationarity_normalized;  // divided by dU~_s/dx~_s
  std::vector<double> slack;                    // mu_l (g_l(x~) - c_l)
  std::vector<double> slack_normalized;         // divided by c_l
};

KktResidual kkt_residual(const Network& net, std::span<const SCurveUtility> utils,
                         std::span<const double> x_tilde, std::span<const double> x_tilde_prev,
                         std::span<const double> mu);

struct SteadyStateReport {
  bool passed = false;
  std::vector<double> tangent_gap;  // |g^_l - g_l|
  std::vector<double> excess;       // g_l - c_l
  double max_gap = 0.0;
  double max_excess = 0.0;
};

/// Checks that linearized and true constraints coincide within `tol` and that
/// the true constraints hold within `tol`.
SteadyStateReport steady_state_check(const Network& net, std::span<const SCurveUtility> utils,
                                     const IterateState& state, double tol);

/// Sum of U_s(x_s).
double aggregate_utility(std::span<const SCurveUtility> utils, std::span<const double> rates);

std::vector<RateBounds> rate_bounds(std::span<const SCurveUtility> utils);

}  // namespace scpnum
