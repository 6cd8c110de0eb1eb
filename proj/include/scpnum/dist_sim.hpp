#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "scpnum/network.hpp"
#include "scpnum/scp_engine.hpp"
#include "scpnum/utility.hpp"

namespace scpnum::dist {

struct Message {
  enum class Kind { PriceUpdate, RateReport };
  Kind kind;
  int round;
  int sender;    // link id for PriceUpdate, source id for RateReport
  int receiver;  // source id for PriceUpdate, link id for RateReport
  double value;       // mu_l or x~_s
  double value_prev;  // x~_prev for RateReport; NaN for PriceUpdate
};

/// A link: holds its price and the latest rate report from each routed source.
class LinkAgent {
 public:
  LinkAgent(int id, double capacity, double mu0, std::vector<int> routed_sources);

  int id() const noexcept { return id_; }
  double price() const noexcept { return mu_; }
  std::span<const int> routed_sources() const noexcept { return routed_; }

  /// Stores a RateReport. Throws std::logic_error if the sender is not routed here.
  void receive(const Message& msg, const SCurveUtility& sender_utility);
  /// g^_l from the stored reports. Throws MissingReport.
  double linearized_load() const;
  /// Gradient-projection step; returns the new price.
  double update_price(double gamma);
  /// PriceUpdate messages for every routed source, ascending id.
  std::vector<Message> price_messages(int round) const;

 private:
  struct Report {
    bool present = false;
    double x_tilde = 0.0;
    double x_tilde_prev = 0.0;
    SCurveUtility utility{};
  };

  int id_;
  double capacity_;
  double mu_;
  std::vector<int> routed_;      // ascending source ids
  std::vector<Report> reports_;  // aligned with routed_
};

/// A source: holds its rate state and the prices last received from its route.
class SourceAgent {
 public:
  SourceAgent(int id, SCurveUtility utility, double x_tilde0, double x_tilde_prev0, double x0,
              double rho0, double A0, std::vector<int> route);

  int id() const noexcept { return id_; }
  double x_tilde() const noexcept { return x_tilde_; }
  double x_tilde_prev() const noexcept { return x_tilde_prev_; }
  double rate() const noexcept { return x_; }
  double path_price() const noexcept { return rho_; }
  double intercept() const noexcept { return A_; }
  const SCurveUtility& utility() const noexcept { return utility_; }
  std::span<const int> route() const noexcept { return route_; }

  /// Stores a PriceUpdate. Throws std::logic_error if the sender is off-route.
  void receive(const Message& msg);
  /// Number of prices received in the most recent round.
  std::size_t prices_received() const noexcept { return received_; }
  /// Sums received prices in ascending link order, applies the closed-form
  /// update. `use_previous` reads the prices from the round before.
  void update_rate(double rho_floor, bool use_previous);
  /// RateReport messages for every link on the route, ascending id.
  std::vector<Message> report_messages(int round) const;

 private:
  int id_;
  SCurveUtility utility_;
  std::vector<int> route_;  // ascending link ids
  std::vector<double> prices_;
  std::vector<double> prices_prev_;
  std::size_t received_ = 0;
  double x_tilde_;
  double x_tilde_prev_;
  double x_;
  double rho_ = 0.0;
  double A_ = 0.0;
  int price_round_ = -1;
};

struct RoundOutcome {
  int round;
  std::vector<Message> messages;
  double stopping_metric;  // max_s |x_s^(t) - x_s^(t-1)|, from the convergence monitor
};

struct SimulationResult {
  AllocationResult allocation;
  std::vector<Message> log;  // rounds 1..T; initial seeding is not logged
};

/// Synchronous agent-based execution of the price/rate loop. Phase A: links
/// update prices and send them to their sources. Phase B: sources update rates
/// and report to their links. A monitor outside the protocol evaluates the
/// global stopping rule.
class Simulation {
 public:
  /// Builds agents seeded with the configured initial state.
  Simulation(const Network& net, std::span<const SCurveUtility> utils, SolverConfig config);
  /// Builds agents seeded with an arbitrary engine state (round number taken from state.t).
  Simulation(const Network& net, std::span<const SCurveUtility> utils, SolverConfig config,
             const IterateState& state);

  RoundOutcome run_round();
  SimulationResult run_to_convergence();

  int round() const noexcept { return round_; }
  std::span<const LinkAgent> links() const noexcept { return links_; }
  std::span<const SourceAgent> sources() const noexcept { return sources_; }
  const std::vector<Message>& log() const noexcept { return log_; }
  /// Monitor snapshot in engine form.
  IterateState snapshot() const;

 private:
  void deliver(const Message& msg, bool logged = true);

  Network net_;
  std::vector<SCurveUtility> utils_;
  SolverConfig config_;
  std::vector<LinkAgent> links_;
  std::vector<SourceAgent> sources_;
  std::vector<Message> log_;
  int round_ = 0;
};

/// Writes `round,kind,sender,receiver,payload` rows.
void write_message_log_csv(std::ostream& out, std::span<const Message> log);

}  // namespace scpnum::dist
