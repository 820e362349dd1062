#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "flockkin/kinetic.hpp"

namespace flockkin {

enum class MetricKind { euclidean, sum_of_norms };

/// Ground metric on R^k. sum_of_norms splits each point after `split`
/// coordinates and adds the two Euclidean norms (|x - y| + |v - w| on phase
/// space with split = d).
struct GroundMetric {
  MetricKind kind = MetricKind::euclidean;
  std::size_t split = 0;

  static GroundMetric euclidean() { return {}; }
  static GroundMetric sum_of_norms(std::size_t split) { return {MetricKind::sum_of_norms, split}; }

  double operator()(std::span<const double> a, std::span<const double> b) const;
};

/// Finite probability measure on R^k. Weight sums within 1e-12 of one are
/// renormalised on construction; anything else is rejected.
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;
  DiscreteMeasure(std::size_t dim, std::vector<double> points, std::vector<double> weights);

  /// Atoms (x, v) in R^{2d}.
  static DiscreteMeasure from_empirical(const EmpiricalMeasure& mu);
  /// Equal-weight measure on the given points (row-major, dim per point).
  static DiscreteMeasure uniform(std::size_t dim, std::vector<double> points);

  std::size_t size() const noexcept { return weights_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  std::span<const double> point(std::size_t i) const noexcept { return {points_.data() + i * dim_, dim_}; }
  double weight(std::size_t i) const noexcept { return weights_[i]; }
  std::span<const double> weights() const noexcept { return weights_; }
  std::span<const double> points() const noexcept { return points_; }

  /// True when every weight is bitwise equal.
  bool equal_weights() const noexcept;

 private:
  std::size_t dim_ = 0;
  std::vector<double> points_;
  std::vector<double> weights_;
};

struct PlanEntry {
  std::size_t source = 0;
  std::size_t target = 0;
  double mass = 0.0;
};

struct TransportPlan {
  std::vector<PlanEntry> entries;
  double cost = 0.0;
};

struct TransportResult {
  double distance = 0.0;
  TransportPlan plan;
  std::size_t pivots = 0;  ///< simplex pivots (0 on the assignment path)
};

enum class TransportSolver {
  automatic,        ///< assignment for equal-count equal-weight instances, else network simplex
  network_simplex,
  assignment,
};

/// Dense m x n cost matrix, or a lazily evaluated one above `dense_limit` entries.
class CostMatrix {
 public:
  static constexpr std::size_t dense_limit = 10'000'000;

  CostMatrix(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const GroundMetric& metric,
             std::function<double(double)> transform = {});

  std::size_t rows() const noexcept { return m_; }
  std::size_t cols() const noexcept { return n_; }
  bool dense() const noexcept { return !dense_.empty() || m_ * n_ == 0; }
  double operator()(std::size_t i, std::size_t j) const;

 private:
  const DiscreteMeasure* mu_;
  const DiscreteMeasure* nu_;
  GroundMetric metric_;
  std::function<double(double)> transform_;
  std::size_t m_, n_;
  std::vector<double> dense_;
};

/// Network simplex on the complete bipartite transportation graph, started
/// from the north-west-corner basis. Falls back to Bland's rule after a run of
/// degenerate pivots; throws InternalError if the pivot guard is exhausted.
TransportResult solve_transport(std::span<const double> supply, std::span<const double> demand,
                                const CostMatrix& cost);

/// Shortest-augmenting-path assignment (Jonker-Volgenant style) for n x n
/// equal-weight instances; every atom carries mass `mass`.
TransportResult solve_assignment(const CostMatrix& cost, double mass);

/// Exact Wasserstein-1 distance with its optimal plan.
TransportResult w1(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const GroundMetric& metric,
                   TransportSolver solver = TransportSolver::automatic);

/// Test oracle: exhaustive vertex enumeration of the transportation polytope
/// (or permutations for equal-weight square instances). Requires m * n <= 64.
double w1_bruteforce(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const GroundMetric& metric);

/// Bounded-Lipschitz distance sup { sum phi (mu - nu) : |phi| <= 1, Lip(phi) <= 1 },
/// solved as the dual min-cost flow (transport with ground cost min(metric, 2)).
/// Combined atom count is capped at 512.
double bounded_lipschitz(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                         const GroundMetric& metric);

/// W1 between mu and rho (x) delta_{v_ref}: every atom keeps its position and
/// weight while its velocity is replaced by v_ref.
double dirac_flocking_distance(const EmpiricalMeasure& mu, std::span<const double> v_ref,
                               const GroundMetric& metric);

/// Phase-space ground metric for measures on R^d x R^d.
GroundMetric phase_metric(MetricKind kind, std::size_t d);

}  // namespace flockkin
