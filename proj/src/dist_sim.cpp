#include "scpnum/dist_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "scpnum/errors.hpp"
#include "scpnum/format.hpp"

namespace scpnum::dist {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::size_t position(std::span<const int> ids, int id) {
  auto it = std::lower_bound(ids.begin(), ids.end(), id);
  if (it == ids.end() || *it != id) return ids.size();
  return static_cast<std::size_t>(it - ids.begin());
}

}  // namespace

LinkAgent::LinkAgent(int id, double capacity, double mu0, std::vector<int> routed_sources)
    : id_(id), capacity_(capacity), mu_(mu0), routed_(std::move(routed_sources)) {
  std::sort(routed_.begin(), routed_.end());
  reports_.resize(routed_.size());
}

void LinkAgent::receive(const Message& msg, const SCurveUtility& sender_utility) {
  const std::size_t k = position(routed_, msg.sender);
  if (msg.kind != Message::Kind::RateReport || msg.receiver != id_ || k == routed_.size()) {
    throw std::logic_error("link " + std::to_string(id_) + " received a report from source " +
                           std::to_string(msg.sender) + " that is not routed through it");
  }
  reports_[k] = {true, msg.value, msg.value_prev, sender_utility};
}

double LinkAgent::linearized_load() const {
  double load = 0.0;
  for (std::size_t k = 0; k < routed_.size(); ++k) {
    const auto& rep = reports_[k];
    if (!rep.present) {
      throw MissingReport("link " + std::to_string(id_) + " has no report from source " +
                          std::to_string(routed_[k]));
    }
    load += linearized_term(rep.utility, rep.x_tilde, rep.x_tilde_prev);
  }
  return load;
}

double LinkAgent::update_price(double gamma) {
  mu_ = price_step(mu_, gamma, capacity_, linearized_load());
  return mu_;
}

std::vector<Message> LinkAgent::price_messages(int round) const {
  std::vector<Message> out;
  out.reserve(routed_.size());
  for (int source : routed_) {
    out.push_back({Message::Kind::PriceUpdate, round, id_, source, mu_, kNaN});
  }
  return out;
}

SourceAgent::SourceAgent(int id, SCurveUtility utility, double x_tilde0, double x_tilde_prev0,
                         double x0, double rho0,
                         double A0, std::vector<int> route)
    : id_(id),
      utility_(utility),
      route_(std::move(route)),
      x_tilde_(x_tilde0),
      x_tilde_prev_(x_tilde_prev0),
      x_(x0),
      rho_(rho0),
      A_(A0) {
  std::sort(route_.begin(), route_.end());
  prices_.assign(route_.size(), kNaN);
  prices_prev_.assign(route_.size(), kNaN);
}

void SourceAgent::receive(const Message& msg) {
  const std::size_t k = position(route_, msg.sender);
  if (msg.kind != Message::Kind::PriceUpdate || msg.receiver != id_ || k == route_.size()) {
    throw std::logic_error("source " + std::to_string(id_) + " received a price from link " +
                           std::to_string(msg.sender) + " outside its route");
  }
  if (msg.round != price_round_) {
    price_round_ = msg.round;
    received_ = 0;
  }
  ++received_;
  prices_prev_[k] = std::isnan(prices_[k]) ? msg.value : prices_[k];
  prices_[k] = msg.value;
}

void SourceAgent::update_rate(double rho_floor, bool use_previous) {
  const auto& prices = use_previous ? prices_prev_ : prices_;
  double rho = 0.0;
  for (double mu : prices) rho += mu;
  const auto resp = source_response(utility_, x_tilde_, rho, rho_floor);
  rho_ = rho;
  A_ = resp.A;
  x_tilde_prev_ = x_tilde_;
  x_tilde_ = resp.x_tilde;
  x_ = resp.x;
}

std::vector<Message> SourceAgent::report_messages(int round) const {
  std::vector<Message> out;
  out.reserve(route_.size());
  for (int link : route_) {
    out.push_back({Message::Kind::RateReport, round, id_, link, x_tilde_, x_tilde_prev_});
  }
  return out;
}

Simulation::Simulation(const Network& net, std::span<const SCurveUtility> utils,
                       SolverConfig config)
    : Simulation(net, utils, config, initial_state(net, utils, config)) {}

Simulation::Simulation(const Network& net, std::span<const SCurveUtility> utils,
                       SolverConfig config, const IterateState& init)
    : net_(net), utils_(utils.begin(), utils.end()), config_(std::move(config)), round_(init.t) {
  config_.validate(net_.num_sources(), net_.num_links());
  for (std::size_t l = 0; l < net_.num_links(); ++l) {
    std::vector<int> routed;
    for (std::size_t s : net_.sources_on(l)) routed.push_back(net_.source_id(s));
    links_.emplace_back(net_.link_id(l), net_.capacity(l), init.mu[l], std::move(routed));
  }
  for (std::size_t s = 0; s < net_.num_sources(); ++s) {
    std::vector<int> route;
    for (std::size_t l : net_.route(s)) route.push_back(net_.link_id(l));
    sources_.emplace_back(net_.source_id(s), utils_[s], init.x_tilde[s], init.x_tilde_prev[s], init.x[s], init.rho[s],
                          init.A[s],
                          std::move(route));
  }
  // Seed agents with the initial state; this is setup, not logged traffic.
  for (const auto& link : links_) {
    for (const auto& msg : link.price_messages(round_)) deliver(msg, false);
  }
  for (const auto& src : sources_) {
    for (const auto& msg : src.report_messages(round_)) deliver(msg, false);
  }
}

void Simulation::deliver(const Message& msg, bool logged) {
  if (logged) log_.push_back(msg);
  if (msg.kind == Message::Kind::PriceUpdate) {
    sources_.at(net_.source_index(msg.receiver)).receive(msg);
  } else {
    const std::size_t s = net_.source_index(msg.sender);
    links_.at(net_.link_index(msg.receiver)).receive(msg, utils_[s]);
  }
}

RoundOutcome Simulation::run_round() {
  const int round = ++round_;
  const std::size_t first = log_.size();

  // Phase A: every link prices its linearized load, then prices are delivered.
  for (auto& link : links_) link.update_price(config_.gamma);
  for (const auto& link : links_) {
    for (const auto& msg : link.price_messages(round)) deliver(msg);
  }

  // Phase B: every source responds to its path price, then reports are delivered.
  std::vector<double> before(sources_.size());
  for (std::size_t s = 0; s < sources_.size(); ++s) before[s] = sources_[s].rate();
  const bool lagged = config_.price_lag == PriceLag::lagged;
  for (auto& src : sources_) src.update_rate(config_.rho_floor, lagged);
  for (const auto& src : sources_) {
    for (const auto& msg : src.report_messages(round)) deliver(msg);
  }

  double metric = 0.0;
  for (std::size_t s = 0; s < sources_.size(); ++s) {
    metric = std::max(metric, std::abs(sources_[s].rate() - before[s]));
  }
  return {round, std::vector<Message>(log_.begin() + static_cast<std::ptrdiff_t>(first), log_.end()),
          metric};
}

IterateState Simulation::snapshot() const {
  IterateState state;
  state.t = round_;
  for (const auto& src : sources_) {
    state.x_tilde.push_back(src.x_tilde());
    state.x_tilde_prev.push_back(src.x_tilde_prev());
    state.rho.push_back(src.path_price());
    state.A.push_back(src.intercept());
    state.x.push_back(src.rate());
  }
  for (const auto& link : links_) state.mu.push_back(link.price());
  return state;
}

SimulationResult Simulation::run_to_convergence() {
  SimulationResult out;
  auto& alloc = out.allocation;
  IterateState prev = snapshot();
  alloc.trace.push_back(make_trace_record(net_, utils_, prev, nullptr));
  while (round_ < config_.max_iter) {
    const RoundOutcome outcome = run_round();
    IterateState cur = snapshot();
    alloc.trace.push_back(make_trace_record(net_, utils_, cur, &prev));
    prev = std::move(cur);
    if (outcome.stopping_metric < config_.epsilon) {
      alloc.converged = true;
      break;
    }
  }
  alloc.iterations = round_;
  alloc.rates = prev.x;
  alloc.prices = prev.mu;
  alloc.final_state = std::move(prev);
  out.log = log_;
  return out;
}

void write_message_log_csv(std::ostream& out, std::span<const Message> log) {
  out << "round,kind,sender,receiver,payload\n";
  for (const auto& msg : log) {
    out << msg.round << ','
        << (msg.kind == Message::Kind::PriceUpdate ? "PriceUpdate" : "RateReport") << ','
        << msg.sender << ',' << msg.receiver << ',' << format_double(msg.value) << '\n';
  }
}

}  // namespace scpnum::dist
