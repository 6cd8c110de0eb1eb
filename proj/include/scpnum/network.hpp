#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace scpnum {

struct LinkSpec {
  int id;
  double capacity_kbps;
};

struct SourceSpec {
  int id;
  std::vector<int> route;  // link ids
};

/// Allowed rate interval [min, max] of one source, in Kbps.
struct RateBounds {
  double min;
  double max;
};

/// Single-path network: links with capacities, sources with routes.
///
/// Links and sources are stored in ascending id order and addressed by their
/// position (index) in that order. The routing matrix R is kept implicitly as
/// two adjacency lists, both ascending, so every accumulation over a route or
/// over the sources of a link happens in the same order on every run.
class Network {
 public:
  /// Validates and builds. Throws DuplicateId, EmptyRoute, UnknownLink or
  /// NonPositiveCapacity naming the offending id.
  static Network build(std::vector<LinkSpec> links, std::vector<SourceSpec> sources);

  std::size_t num_links() const noexcept { return link_ids_.size(); }
  std::size_t num_sources() const noexcept { return source_ids_.size(); }

  int link_id(std::size_t l) const { return link_ids_.at(l); }
  int source_id(std::size_t s) const { return source_ids_.at(s); }
  double capacity(std::size_t l) const { return capacities_.at(l); }
  std::span<const double> capacities() const noexcept { return capacities_; }

  /// Link indices crossed by source `s`, ascending.
  std::span<const std::size_t> route(std::size_t s) const { return routes_.at(s); }
  /// Source indices routed through link `l`, ascending.
  std::span<const std::size_t> sources_on(std::size_t l) const { return link_sources_.at(l); }

  /// Index of the link with the given id; throws UnknownLink.
  std::size_t link_index(int id) const;
  std::size_t source_index(int id) const;
  /// Number of nonzero entries of R.
  std::size_t nnz() const noexcept;

  /// Dense L x S view of R. Intended for tests and diagnostics.
  std::vector<std::vector<int>> dense_routing() const;

  std::vector<LinkSpec> link_specs() const;
  std::vector<SourceSpec> source_specs() const;

 private:
  std::vector<int> link_ids_;
  std::vector<double> capacities_;
  std::vector<int> source_ids_;
  std::vector<std::vector<std::size_t>> routes_;
  std::vector<std::vector<std::size_t>> link_sources_;
};

/// Sum of R_ls * x_s over sources for the link with id `link_id`.
/// Throws UnknownLink; throws std::invalid_argument on a size mismatch.
double link_load(const Network& net, std::span<const double> rates, int link_id);

/// Loads of every link, in link-index order.
std::vector<double> link_loads(const Network& net, std::span<const double> rates);

struct Violation {
  enum class Condition { RateBounds, Capacity };  // C1, C2
  Condition condition;
  std::size_t index;  // source index for C1, link index for C2
  int id;
  double excess;      // Kbps outside the admissible value
};

struct FeasibilityReport {
  bool feasible = true;
  std::vector<Violation> violations;
};

/// Checks C1 (bounds, exact) and C2 (load <= c_l + tol) for every source and link.
FeasibilityReport is_feasible(const Network& net, std::span<const double> rates,
                              std::span<const RateBounds> bounds, double tol);

}  // namespace scpnum
