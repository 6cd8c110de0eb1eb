#include "scpnum/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "scpnum/errors.hpp"
#include "scpnum/scp_engine.hpp"

namespace scpnum {

namespace {

struct Box {
  std::vector<double> lo;
  std::vector<double> hi;
};

class GridPass {
 public:
  GridPass(const Network& net, std::span<const SCurveUtility> utils, const Box& box, int points)
      : net_(net), utils_(utils), n_(utils.size()), points_(points) {
    const std::size_t dims = n_ - 1;
    grid_.resize(dims);
    values_.resize(dims);
    for (std::size_t s = 0; s < dims; ++s) {
      const double lo = box.lo[s];
      const double hi = box.hi[s];
      for (int k = 0; k < points; ++k) {
        const double x = k == points - 1 ? hi : lo + (hi - lo) * k / (points - 1);
        grid_[s].push_back(x);
        values_[s].push_back(eval_scurve(utils[s], x));
      }
    }
    load_.assign(net.num_links(), 0.0);
    x_.assign(n_, 0.0);
  }

  void run() { descend(0, 0.0); }

  bool found() const { return found_; }
  double best_utility() const { return best_u_; }
  const std::vector<double>& best() const { return best_x_; }

 private:
  void descend(std::size_t s, double partial) {
    if (s + 1 == n_) {
      finish(partial);
      return;
    }
    for (int k = 0; k < points_; ++k) {
      const double x = grid_[s][k];
      bool ok = true;
      for (std::size_t l : net_.route(s)) {
        load_[l] += x;
        if (load_[l] > net_.capacity(l)) ok = false;
      }
      if (ok) {
        x_[s] = x;
        descend(s + 1, partial + values_[s][k]);
      }
      for (std::size_t l : net_.route(s)) load_[l] -= x;
      // rates only grow along this dimension
      if (!ok) break;
    }
  }

  void finish(double partial) {
    const std::size_t s = n_ - 1;
    const auto& u = utils_[s];
    double x = u.M;
    for (std::size_t l : net_.route(s)) x = std::min(x, net_.capacity(l) - load_[l]);
    if (x < u.m) return;
    const double total = partial + eval_scurve(u, x);
    if (!found_ || total > best_u_) {
      found_ = true;
      best_u_ = total;
      x_[s] = x;
      best_x_ = x_;
    }
  }

  const Network& net_;
  std::span<const SCurveUtility> utils_;
  std::size_t n_;
  int points_;
  std::vector<std::vector<double>> grid_;
  std::vector<std::vector<double>> values_;
  std::vector<double> load_;
  std::vector<double> x_;
  bool found_ = false;
  double best_u_ = 0.0;
  std::vector<double> best_x_;
};

}  // namespace

OracleResult grid_search(const Network& net, std::span<const SCurveUtility> utils,
                         const GridSpec& spec) {
  if (utils.size() != net.num_sources()) {
    throw std::invalid_argument("one utility per source expected");
  }
  if (spec.points_per_dim < 2) throw InvalidParameter("points_per_dim must be at least 2");
  if (spec.refinement_passes < 0) throw InvalidParameter("refinement_passes must be non-negative");
  const std::size_t n = utils.size();
  if (n == 0) throw InvalidParameter("grid search needs at least one source");
  if (n > static_cast<std::size_t>(spec.max_sources)) {
    throw BudgetExceeded("grid search supports at most " + std::to_string(spec.max_sources) +
                         " sources; scenario has " + std::to_string(n));
  }
  double cost = 1.0;
  for (std::size_t s = 0; s + 1 < n; ++s) cost *= spec.points_per_dim;
  if (cost > static_cast<double>(spec.budget)) {
    throw BudgetExceeded("grid of " + std::to_string(spec.points_per_dim) + "^" +
                         std::to_string(n - 1) + " points exceeds the budget of " +
                         std::to_string(spec.budget));
  }

  std::vector<double> mins(n);
  for (std::size_t s = 0; s < n; ++s) mins[s] = utils[s].m;
  const auto min_loads = link_loads(net, mins);
  for (std::size_t l = 0; l < net.num_links(); ++l) {
    if (min_loads[l] > net.capacity(l)) {
      throw NoFeasiblePoint("link " + std::to_string(net.link_id(l)) + " capacity " +
                            std::to_string(net.capacity(l)) + " is below the minimum load " +
                            std::to_string(min_loads[l]));
    }
  }

  Box box;
  for (const auto& u : utils) {
    box.lo.push_back(u.m);
    box.hi.push_back(u.M);
  }

  OracleResult result;
  bool have = false;
  for (int pass = 0; pass <= spec.refinement_passes; ++pass) {
    GridPass grid(net, utils, box, spec.points_per_dim);
    grid.run();
    if (grid.found() && (!have || grid.best_utility() > result.utility)) {
      have = true;
      result.utility = grid.best_utility();
      result.rates = grid.best();
    }
    if (!have) throw NoFeasiblePoint("no feasible grid point");
    result.pass_utilities.push_back(result.utility);

    result.resolution = 0.0;
    for (std::size_t s = 0; s + 1 < n; ++s) {
      result.resolution =
          std::max(result.resolution, (box.hi[s] - box.lo[s]) / (spec.points_per_dim - 1));
    }

    for (std::size_t s = 0; s + 1 < n; ++s) {
      const double width = (box.hi[s] - box.lo[s]) / 4.0;
      double lo = result.rates[s] - width / 2.0;
      double hi = result.rates[s] + width / 2.0;
      if (lo < utils[s].m) {
        hi += utils[s].m - lo;
        lo = utils[s].m;
      }
      if (hi > utils[s].M) {
        lo -= hi - utils[s].M;
        hi = utils[s].M;
      }
      box.lo[s] = std::max(lo, utils[s].m);
      box.hi[s] = hi;
    }
  }

  std::vector<RateBounds> bounds;
  for (const auto& u : utils) bounds.push_back(u.bounds());
  result.certificate = is_feasible(net, result.rates, bounds, spec.feas_tol);
  return result;
}

LocalOptResult local_opt_test(const Network& net, std::span<const SCurveUtility> utils,
                              std::span<const double> candidate, const LocalOptSpec& spec) {
  const std::size_t n = utils.size();
  if (n != net.num_sources() || candidate.size() != n) {
    throw std::invalid_argument("one utility and one rate per source expected");
  }
  if (!(spec.radius >= 0.0) || spec.samples < 0) {
    throw InvalidParameter("radius and samples must be non-negative");
  }
  std::vector<RateBounds> bounds;
  for (const auto& u : utils) bounds.push_back(u.bounds());
  const auto admitted = is_feasible(net, candidate, bounds, spec.candidate_tol);
  if (!admitted.feasible) {
    throw InfeasibleCandidate("candidate violates " + std::to_string(admitted.violations.size()) +
                              " constraint(s) beyond tolerance " +
                              std::to_string(spec.candidate_tol));
  }

  const double base = aggregate_utility(utils, candidate);
  LocalOptResult out;
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> dir(n);
  std::vector<double> point(n);
  for (int k = 0; k < spec.samples; ++k) {
    double norm = 0.0;
    for (auto& d : dir) {
      d = normal(rng);
      norm += d * d;
    }
    norm = std::sqrt(norm);
    const double len = spec.radius * std::pow(unit(rng), 1.0 / static_cast<double>(n));
    for (std::size_t s = 0; s < n; ++s) {
      point[s] = candidate[s] + (norm > 0.0 ? len * dir[s] / norm : 0.0);
    }
    if (!is_feasible(net, point, bounds, spec.sample_tol).feasible) continue;
    ++out.feasible_samples;
    const double gain = aggregate_utility(utils, point) - base;
    if (gain > out.best_improvement) {
      out.best_improvement = gain;
      if (gain > spec.improvement_tol) {
        out.passed = false;
        out.improving_point = point;
      }
    }
  }
  return out;
}

double fd_gradient_check(const DifferentiableFunction& f, std::span<const double> point,
                         double step) {
  if (!(step > 0.0)) throw InvalidParameter("finite-difference step must be positive");
  const std::size_t n = point.size();
  if ((!f.lower.empty() && f.lower.size() != n) || (!f.upper.empty() && f.upper.size() != n)) {
    throw std::invalid_argument("domain box dimension mismatch");
  }
  std::vector<double> h(n);
  for (std::size_t i = 0; i < n; ++i) {
    h[i] = point[i] != 0.0 ? step * std::abs(point[i]) : step;
    if ((!f.lower.empty() && !(point[i] - h[i] > f.lower[i])) ||
        (!f.upper.empty() && !(point[i] + h[i] < f.upper[i]))) {
      throw DomainBoundary("stencil around coordinate " + std::to_string(i) +
                           " leaves the function's domain");
    }
  }
  const auto analytic = f.gradient(point);
  if (analytic.size() != n) throw std::invalid_argument("gradient dimension mismatch");
  std::vector<double> probe(point.begin(), point.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    probe[i] = point[i] + h[i];
    const double up = f.value(probe);
    probe[i] = point[i] - h[i];
    const double down = f.value(probe);
    probe[i] = point[i];
    const double fd = (up - down) / (probe[i] + h[i] - (probe[i] - h[i]));
    worst = std::max(worst, std::abs(analytic[i] - fd) / (std::abs(analytic[i]) + 1e-15));
  }
  return worst;
}

}  // namespace scpnum
