#include "scpnum/scp_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "scpnum/errors.hpp"

namespace scpnum {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidParameter(what);
}

void check_sizes(const Network& net, std::span<const SCurveUtility> utils,
                 std::span<const double> per_source) {
  if (utils.size() != net.num_sources() || per_source.size() != net.num_sources()) {
    throw std::invalid_argument("per-source vectors must have one entry per source");
  }
}

}  // namespace

void SolverConfig::validate(std::size_t num_sources, std::size_t num_links) const {
  require(gamma > 0.0, "gamma must be > 0");
  require(epsilon > 0.0, "epsilon must be > 0");
  require(max_iter > 0, "max_iter must be > 0");
  require(rho_floor > 0.0, "rho_floor must be > 0");
  require(feas_tol >= 0.0, "feas_tol must be >= 0");
  if (x0_policy == RateInit::explicit_vector) {
    require(x0.size() == num_sources, "x0 must have one entry per source");
  }
  if (mu0_policy == PriceInit::scalar) require(mu0 > 0.0, "mu0 must be > 0");
  if (mu0_policy == PriceInit::per_link) {
    require(mu0_per_link.size() == num_links, "mu0 must have one entry per link");
    for (double mu : mu0_per_link) require(mu > 0.0, "mu0 entries must be > 0");
  }
}

double linearized_term(const SCurveUtility& u, double x_tilde, double x_tilde_prev) {
  const double inv = 1.0 / u.c2;
  return u.r * (std::pow(x_tilde_prev, inv) +
                inv * std::pow(x_tilde_prev, inv - 1.0) * (x_tilde - x_tilde_prev));
}

double rate_intercept(const SCurveUtility& u) {
  return std::log(u.c1 * u.c2 / (u.r * -std::expm1(-u.c1)));
}

SourceResponse source_response(const SCurveUtility& u, double x_tilde, double rho,
                               double rho_floor) {
  const double lo = transformed_lower(u);
  const double hi = transformed_upper(u);
  const double A = rate_intercept(u) + (1.0 - 1.0 / u.c2) * std::log(x_tilde);
  double next = hi;
  if (rho > rho_floor) {
    next = std::clamp((A - std::log(rho)) / u.c1, lo, hi);
  }
  const double x = std::clamp(inverse_transform(u, next), u.m, u.M);
  return {A, next, x};
}

double price_step(double mu, double gamma, double capacity, double linearized_load) {
  return std::max(0.0, mu - gamma * (capacity - linearized_load));
}

double path_price(const Network& net, std::span<const double> mu, std::size_t s) {
  double rho = 0.0;
  for (std::size_t l : net.route(s)) rho += mu[l];
  return rho;
}

double g_true(const Network& net, std::span<const SCurveUtility> utils,
              std::span<const double> x_tilde, std::size_t l) {
  check_sizes(net, utils, x_tilde);
  double g = 0.0;
  for (std::size_t s : net.sources_on(l)) {
    g += utils[s].r * std::pow(x_tilde[s], 1.0 / utils[s].c2);
  }
  return g;
}

std::vector<double> g_true_gradient(const Network& net, std::span<const SCurveUtility> utils,
                                    std::span<const double> x_tilde, std::size_t l) {
  check_sizes(net, utils, x_tilde);
  std::vector<double> grad(net.num_sources(), 0.0);
  for (std::size_t s : net.sources_on(l)) {
    const double inv = 1.0 / utils[s].c2;
    grad[s] = utils[s].r * inv * std::pow(x_tilde[s], inv - 1.0);
  }
  return grad;
}

double g_hat(const Network& net, std::span<const SCurveUtility> utils,
             std::span<const double> x_tilde, std::span<const double> x_tilde_prev,
             std::size_t l) {
  check_sizes(net, utils, x_tilde);
  check_sizes(net, utils, x_tilde_prev);
  double g = 0.0;
  for (std::size_t s : net.sources_on(l)) {
    if (!(x_tilde_prev[s] > 0.0)) {
      throw NonPositiveExpansionPoint(
          "expansion point of source " + std::to_string(net.source_id(s)) + " is not positive",
          net.source_id(s));
    }
    g += linearized_term(utils[s], x_tilde[s], x_tilde_prev[s]);
  }
  return g;
}

std::vector<double> update_prices(const Network& net, std::span<const SCurveUtility> utils,
                                  const IterateState& state, double gamma) {
  std::vector<double> mu(net.num_links());
  for (std::size_t l = 0; l < net.num_links(); ++l) {
    const double load = g_hat(net, utils, state.x_tilde, state.x_tilde_prev, l);
    mu[l] = price_step(state.mu[l], gamma, net.capacity(l), load);
  }
  return mu;
}

RateUpdate update_rates(const Network& net, std::span<const SCurveUtility> utils,
                        std::span<const double> x_tilde, std::span<const double> mu,
                        double rho_floor) {
  check_sizes(net, utils, x_tilde);
  if (mu.size() != net.num_links()) throw std::invalid_argument("one price per link expected");
  const std::size_t n = net.num_sources();
  RateUpdate out{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n),
                 std::vector<double>(n)};
  for (std::size_t s = 0; s < n; ++s) {
    out.rho[s] = path_price(net, mu, s);
    const auto resp = source_response(utils[s], x_tilde[s], out.rho[s], rho_floor);
    out.A[s] = resp.A;
    out.x_tilde[s] = resp.x_tilde;
    out.x[s] = resp.x;
  }
  return out;
}

RateUpdate update_rates(const Network& net, std::span<const SCurveUtility> utils,
                        const IterateState& state, double rho_floor) {
  return update_rates(net, utils, state.x_tilde, state.mu, rho_floor);
}

std::vector<double> initial_rates(const Network& net, std::span<const SCurveUtility> utils,
                                  const SolverConfig& config) {
  const std::size_t n = net.num_sources();
  std::vector<double> x0(n);
  switch (config.x0_policy) {
    case RateInit::explicit_vector:
      for (std::size_t s = 0; s < n; ++s) {
        if (!(config.x0[s] >= utils[s].m && config.x0[s] <= utils[s].M)) {
          throw InvalidParameter("x0 of source " + std::to_string(net.source_id(s)) +
                                 " lies outside [m, M]");
        }
        x0[s] = config.x0[s];
      }
      break;
    case RateInit::midpoint:
      for (std::size_t s = 0; s < n; ++s) x0[s] = 0.5 * (utils[s].m + utils[s].M);
      break;
    case RateInit::fair_share:
      for (std::size_t s = 0; s < n; ++s) {
        double share = std::numeric_limits<double>::infinity();
        for (std::size_t l : net.route(s)) {
          share = std::min(share, net.capacity(l) / static_cast<double>(net.sources_on(l).size()));
        }
        x0[s] = std::clamp(share, utils[s].m, utils[s].M);
      }
      break;
  }
  return x0;
}

std::vector<double> initial_prices(const Network& net, std::span<const SCurveUtility> utils,
                                   std::span<const double> x0, const SolverConfig& config) {
  switch (config.mu0_policy) {
    case PriceInit::scalar:
      return std::vector<double>(net.num_links(), config.mu0);
    case PriceInit::per_link:
      return config.mu0_per_link;
    case PriceInit::stationary:
      break;
  }
  // Split each source's marginal utility evenly over its route, then average
  // the shares reaching a link. A single-link source at x0 is then exactly
  // stationary for the linearized problem.
  std::vector<double> mu(net.num_links(), 0.0);
  for (std::size_t l = 0; l < net.num_links(); ++l) {
    const auto on = net.sources_on(l);
    for (std::size_t s : on) {
      mu[l] += scurve_derivative(utils[s], x0[s]) / static_cast<double>(net.route(s).size());
    }
    if (!on.empty()) mu[l] /= static_cast<double>(on.size());
  }
  return mu;
}

IterateState initial_state(const Network& net, std::span<const SCurveUtility> utils,
                           const SolverConfig& config) {
  if (utils.size() != net.num_sources()) {
    throw std::invalid_argument("one utility per source expected");
  }
  config.validate(net.num_sources(), net.num_links());
  const std::size_t n = net.num_sources();
  const auto x0 = initial_rates(net, utils, config);

  IterateState state;
  state.t = 0;
  state.mu = initial_prices(net, utils, x0, config);
  state.x_tilde.resize(n);
  state.x.resize(n);
  state.rho.resize(n);
  state.A.resize(n);
  for (std::size_t s = 0; s < n; ++s) {
    const auto& u = utils[s];
    state.x_tilde[s] = std::clamp(transform(u, x0[s]), transformed_lower(u), transformed_upper(u));
    state.x[s] = x0[s];
    state.rho[s] = path_price(net, state.mu, s);
    state.A[s] = rate_intercept(u) + (1.0 - 1.0 / u.c2) * std::log(state.x_tilde[s]);
  }
  state.x_tilde_prev = state.x_tilde;
  return state;
}

IterateState advance(const Network& net, std::span<const SCurveUtility> utils,
                     const IterateState& state, const SolverConfig& config) {
  auto mu_next = update_prices(net, utils, state, config.gamma);
  const auto& mu_for_rates = config.price_lag == PriceLag::fresh ? mu_next : state.mu;
  auto rates = update_rates(net, utils, state.x_tilde, mu_for_rates, config.rho_floor);

  IterateState next;
  next.t = state.t + 1;
  next.x_tilde_prev = state.x_tilde;
  next.x_tilde = std::move(rates.x_tilde);
  next.mu = std::move(mu_next);
  next.rho = std::move(rates.rho);
  next.A = std::move(rates.A);
  next.x = std::move(rates.x);
  return next;
}

TraceRecord make_trace_record(const Network& net, std::span<const SCurveUtility> utils,
                              const IterateState& state, const IterateState* previous) {
  TraceRecord rec{state.t, state.x, state.x_tilde, state.mu, state.rho,
                  std::numeric_limits<double>::quiet_NaN(), {}, {}};
  if (previous != nullptr) {
    double metric = 0.0;
    for (std::size_t s = 0; s < state.x.size(); ++s) {
      metric = std::max(metric, std::abs(state.x[s] - previous->x[s]));
    }
    rec.stopping_metric = metric;
  }
  rec.g.resize(net.num_links());
  rec.g_hat.resize(net.num_links());
  for (std::size_t l = 0; l < net.num_links(); ++l) {
    rec.g[l] = g_true(net, utils, state.x_tilde, l);
    rec.g_hat[l] = g_hat(net, utils, state.x_tilde, state.x_tilde_prev, l);
  }
  return rec;
}

AllocationResult solve(const Network& net, std::span<const SCurveUtility> utils,
                       const SolverConfig& config) {
  AllocationResult result;
  IterateState state = initial_state(net, utils, config);
  result.trace.push_back(make_trace_record(net, utils, state, nullptr));

  while (state.t < config.max_iter) {
    IterateState next = advance(net, utils, state, config);
    result.trace.push_back(make_trace_record(net, utils, next, &state));
    state = std::move(next);
    if (result.trace.back().stopping_metric < config.epsilon) {
      result.converged = true;
      break;
    }
  }
  result.iterations = state.t;
  result.rates = state.x;
  result.prices = state.mu;
  result.final_state = std::move(state);
  return result;
}

KktResidual kkt_residual(const Network& net, std::span<const SCurveUtility> utils,
                         std::span<const double> x_tilde, std::span<const double> x_tilde_prev,
                         std::span<const double> mu) {
  check_sizes(net, utils, x_tilde);
  check_sizes(net, utils, x_tilde_prev);
  if (mu.size() != net.num_links()) throw std::invalid_argument("one price per link expected");
  const std::size_t n = net.num_sources();
  KktResidual out;
  out.stationarity.resize(n);
  out.stationarity_normalized.resize(n);
  for (std::size_t s = 0; s < n; ++s) {
    const auto& u = utils[s];
    if (!(x_tilde[s] > 0.0) || !(x_tilde_prev[s] > 0.0)) {
      throw InvalidParameter("KKT residual requires positive transformed rates");
    }
    const double marginal = transformed_utility(u, x_tilde[s]).first;
    const double inv = 1.0 / u.c2;
    const double priced = u.r * inv * std::pow(x_tilde_prev[s], inv - 1.0) * path_price(net, mu, s);
    out.stationarity[s] = marginal - priced;
    out.stationarity_normalized[s] = out.stationarity[s] / marginal;
  }
  out.slack.resize(net.num_links());
  out.slack_normalized.resize(net.num_links());
  for (std::size_t l = 0; l < net.num_links(); ++l) {
    out.slack[l] = mu[l] == 0.0 ? 0.0 : mu[l] * (g_true(net, utils, x_tilde, l) - net.capacity(l));
    out.slack_normalized[l] = out.slack[l] / net.capacity(l);
  }
  return out;
}

SteadyStateReport steady_state_check(const Network& net, std::span<const SCurveUtility> utils,
                                     const IterateState& state, double tol) {
  SteadyStateReport report;
  report.passed = true;
  for (std::size_t l = 0; l < net.num_links(); ++l) {
    const double g = g_true(net, utils, state.x_tilde, l);
    const double gh = g_hat(net, utils, state.x_tilde, state.x_tilde_prev, l);
    const double gap = std::abs(gh - g);
    const double excess = g - net.capacity(l);
    report.tangent_gap.push_back(gap);
    report.excess.push_back(excess);
    report.max_gap = std::max(report.max_gap, gap);
    report.max_excess = l == 0 ? excess : std::max(report.max_excess, excess);
    if (!(gap <= tol) || !(excess <= tol)) report.passed = false;
  }
  return report;
}

double aggregate_utility(std::span<const SCurveUtility> utils, std::span<const double> rates) {
  double total = 0.0;
  for (std::size_t s = 0; s < utils.size(); ++s) total += eval_scurve(utils[s], rates[s]);
  return total;
}

std::vector<RateBounds> rate_bounds(std::span<const SCurveUtility> utils) {
  std::vector<RateBounds> b;
  b.reserve(utils.size());
  for (const auto& u : utils) b.push_back(u.bounds());
  return b;
}

}  // namespace scpnum
