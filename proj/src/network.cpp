#include "scpnum/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "scpnum/errors.hpp"

namespace scpnum {

Network Network::build(std::vector<LinkSpec> links, std::vector<SourceSpec> sources) {
  std::sort(links.begin(), links.end(),
            [](const LinkSpec& a, const LinkSpec& b) { return a.id < b.id; });
  std::sort(sources.begin(), sources.end(),
            [](const SourceSpec& a, const SourceSpec& b) { return a.id < b.id; });

  Network net;
  for (std::size_t l = 0; l < links.size(); ++l) {
    const auto& spec = links[l];
    if (l > 0 && links[l - 1].id == spec.id) {
      throw DuplicateId("duplicate link id " + std::to_string(spec.id), spec.id);
    }
    if (!(spec.capacity_kbps > 0.0)) {
      throw NonPositiveCapacity("link " + std::to_string(spec.id) + " has non-positive capacity",
                                spec.id);
    }
    net.link_ids_.push_back(spec.id);
    net.capacities_.push_back(spec.capacity_kbps);
  }
  net.link_sources_.resize(links.size());

  for (std::size_t s = 0; s < sources.size(); ++s) {
    const auto& spec = sources[s];
    if (s > 0 && sources[s - 1].id == spec.id) {
      throw DuplicateId("duplicate source id " + std::to_string(spec.id), spec.id);
    }
    if (spec.route.empty()) {
      throw EmptyRoute("source " + std::to_string(spec.id) + " has an empty route", spec.id);
    }
    std::vector<std::size_t> route;
    route.reserve(spec.route.size());
    for (int link : spec.route) {
      route.push_back(net.link_index(link));
    }
    std::sort(route.begin(), route.end());
    if (auto dup = std::adjacent_find(route.begin(), route.end()); dup != route.end()) {
      const int id = net.link_ids_[*dup];
      throw DuplicateId("source " + std::to_string(spec.id) + " lists link " +
                            std::to_string(id) + " twice",
                        id);
    }
    for (std::size_t l : route) {
      net.link_sources_[l].push_back(s);
    }
    net.source_ids_.push_back(spec.id);
    net.routes_.push_back(std::move(route));
  }
  return net;
}

std::size_t Network::link_index(int id) const {
  auto it = std::lower_bound(link_ids_.begin(), link_ids_.end(), id);
  if (it == link_ids_.end() || *it != id) {
    throw UnknownLink("unknown link id " + std::to_string(id), id);
  }
  return static_cast<std::size_t>(it - link_ids_.begin());
}

std::size_t Network::source_index(int id) const {
  auto it = std::lower_bound(source_ids_.begin(), source_ids_.end(), id);
  if (it == source_ids_.end() || *it != id) {
    throw std::out_of_range("unknown source id " + std::to_string(id));
  }
  return static_cast<std::size_t>(it - source_ids_.begin());
}

std::size_t Network::nnz() const noexcept {
  return std::accumulate(routes_.begin(), routes_.end(), std::size_t{0},
                         [](std::size_t acc, const auto& r) { return acc + r.size(); });
}

std::vector<std::vector<int>> Network::dense_routing() const {
  std::vector<std::vector<int>> dense(num_links(), std::vector<int>(num_sources(), 0));
  for (std::size_t s = 0; s < num_sources(); ++s) {
    for (std::size_t l : routes_[s]) dense[l][s] = 1;
  }
  return dense;
}

std::vector<LinkSpec> Network::link_specs() const {
  std::vector<LinkSpec> out;
  for (std::size_t l = 0; l < num_links(); ++l) out.push_back({link_ids_[l], capacities_[l]});
  return out;
}

std::vector<SourceSpec> Network::source_specs() const {
  std::vector<SourceSpec> out;
  for (std::size_t s = 0; s < num_sources(); ++s) {
    SourceSpec spec{source_ids_[s], {}};
    for (std::size_t l : routes_[s]) spec.route.push_back(link_ids_[l]);
    out.push_back(std::move(spec));
  }
  return out;
}

namespace {

void check_rates(const Network& net, std::span<const double> rates) {
  if (rates.size() != net.num_sources()) {
    throw std::invalid_argument("expected " + std::to_string(net.num_sources()) +
                                " rates, got " + std::to_string(rates.size()));
  }
}

double load_at(const Network& net, std::span<const double> rates, std::size_t l) {
  double load = 0.0;
  for (std::size_t s : net.sources_on(l)) load += rates[s];
  return load;
}

}  // namespace

double link_load(const Network& net, std::span<const double> rates, int link_id) {
  const std::size_t l = net.link_index(link_id);
  check_rates(net, rates);
  return load_at(net, rates, l);
}

std::vector<double> link_loads(const Network& net, std::span<const double> rates) {
  check_rates(net, rates);
  std::vector<double> loads(net.num_links());
  for (std::size_t l = 0; l < net.num_links(); ++l) loads[l] = load_at(net, rates, l);
  return loads;
}

FeasibilityReport is_feasible(const Network& net, std::span<const double> rates,
                              std::span<const RateBounds> bounds, double tol) {
  check_rates(net, rates);
  if (bounds.size() != net.num_sources()) {
    throw std::invalid_argument("bounds size does not match the number of sources");
  }
  if (tol < 0.0) throw std::invalid_argument("feasibility tolerance must be >= 0");

  FeasibilityReport report;
  for (std::size_t s = 0; s < net.num_sources(); ++s) {
    const double x = rates[s];
    double excess = 0.0;
    if (x < bounds[s].min) excess = bounds[s].min - x;
    if (x > bounds[s].max) excess = x - bounds[s].max;
    if (excess > 0.0 || std::isnan(x)) {
      report.violations.push_back(
          {Violation::Condition::RateBounds, s, net.source_id(s), excess});
    }
  }
  for (std::size_t l = 0; l < net.num_links(); ++l) {
    const double load = load_at(net, rates, l);
    if (!(load <= net.capacity(l) + tol)) {
      report.violations.push_back(
          {Violation::Condition::Capacity, l, net.link_id(l), load - net.capacity(l)});
    }
  }
  report.feasible = report.violations.empty();
  return report;
}

}  // namespace scpnum
