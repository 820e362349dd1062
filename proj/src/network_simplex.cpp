// Network simplex for the dense transportation problem.
//
// Nodes 0..m-1 are sources, m..m+n-1 sinks; arc a = i * n + j joins source i
// to sink j. The basis is a spanning tree of m + n - 1 arcs stored as slots
// with per-node adjacency. Potentials are recomputed by a BFS from node 0 after
// every pivot, which also yields the parent/depth arrays used to trace cycles.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "flockkin/errors.hpp"
#include "flockkin/transport.hpp"

namespace flockkin {

namespace {

struct BasicArc {
  std::size_t arc;
  double flow;
};

class TransportSimplex {
 public:
  TransportSimplex(std::span<const double> supply, std::span<const double> demand, const CostMatrix& cost)
      : m_(supply.size()), n_(demand.size()), cost_(cost), supply_(supply), demand_(demand),
        adj_(m_ + n_), pot_(m_ + n_), parent_slot_(m_ + n_), depth_(m_ + n_) {}

  TransportResult run() {
    north_west_corner();
    double max_cost = 0.0;
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t j = 0; j < n_; ++j) max_cost = std::max(max_cost, cost_(i, j));
    const double cost_eps = 1e-12 * std::max(1.0, max_cost);
    double total_mass = 0.0;
    for (double s : supply_) total_mass += s;
    flow_eps_ = 1e-15 * std::max(1.0, total_mass);

    const std::size_t arcs = m_ * n_;
    const std::size_t block = std::max<std::size_t>(
        64, static_cast<std::size_t>(std::sqrt(static_cast<double>(arcs))));
    const std::size_t degenerate_limit = std::max<std::size_t>(50, m_ + n_);
    const std::size_t pivot_guard = 100 * arcs + 100000;

    std::size_t next_arc = 0, degenerate_run = 0, pivots = 0;
    bool bland = false;
    for (;;) {
      compute_potentials();
      std::size_t entering = arcs;
      if (bland) {
        for (std::size_t a = 0; a < arcs; ++a) {
          if (reduced_cost(a) < -cost_eps) {
            entering = a;
            break;
          }
        }
      } else {
        double best = -cost_eps;
        std::size_t scanned = 0;
        while (scanned < arcs) {
          const std::size_t stop = std::min(arcs, scanned + block);
          for (; scanned < stop; ++scanned) {
            const std::size_t a = (next_arc + scanned) % arcs;
            const double r = reduced_cost(a);
            if (r < best) {
              best = r;
              entering = a;
            }
          }
          if (entering != arcs) break;
        }
        next_arc = (next_arc + scanned) % arcs;
      }
      if (entering == arcs) break;  // optimal

      const double theta = pivot(entering, bland);
      if (++pivots > pivot_guard)
        throw InternalError("network simplex: pivot guard exceeded (cycling suspected)");
      if (theta > 0.0) {
        degenerate_run = 0;
        bland = false;
      } else if (++degenerate_run > degenerate_limit) {
        bland = true;
      }
    }

    TransportResult result;
    result.pivots = pivots;
    for (const auto& b : basis_) {
      if (b.flow <= 0.0) continue;
      const std::size_t i = b.arc / n_, j = b.arc % n_;
      result.plan.entries.push_back({i, j, b.flow});
      result.plan.cost += b.flow * cost_(i, j);
    }
    std::sort(result.plan.entries.begin(), result.plan.entries.end(),
              [](const PlanEntry& a, const PlanEntry& b) {
                return a.source != b.source ? a.source < b.source : a.target < b.target;
              });
    result.distance = result.plan.cost;
    return result;
  }

 private:
  double reduced_cost(std::size_t a) const {
    const std::size_t i = a / n_, j = a % n_;
    return cost_(i, j) - pot_[i] - pot_[m_ + j];
  }

  std::size_t other_end(std::size_t slot, std::size_t node) const {
    const std::size_t a = basis_[slot].arc;
    const std::size_t src = a / n_, snk = m_ + a % n_;
    return node == src ? snk : src;
  }

  void add_basic(std::size_t i, std::size_t j, double flow) {
    const std::size_t slot = basis_.size();
    basis_.push_back({i * n_ + j, flow});
    adj_[i].push_back(slot);
    adj_[m_ + j].push_back(slot);
  }

  void north_west_corner() {
    std::vector<double> ra(supply_.begin(), supply_.end());
    std::vector<double> rb(demand_.begin(), demand_.end());
    basis_.reserve(m_ + n_ - 1);
    std::size_t i = 0, j = 0;
    for (;;) {
      const bool row_first = ra[i] <= rb[j];
      const double f = std::max(0.0, std::min(ra[i], rb[j]));
      add_basic(i, j, f);
      ra[i] -= f;
      rb[j] -= f;
      if (i == m_ - 1 && j == n_ - 1) break;
      if (i == m_ - 1)
        ++j;
      else if (j == n_ - 1)
        ++i;
      else if (row_first)
        ++i;
      else
        ++j;
    }
  }

  void compute_potentials() {
    const std::size_t nodes = m_ + n_;
    constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
    std::fill(parent_slot_.begin(), parent_slot_.end(), none);
    queue_.clear();
    queue_.push_back(0);
    pot_[0] = 0.0;
    depth_[0] = 0;
    visited_.assign(nodes, 0);
    visited_[0] = 1;
    for (std::size_t head = 0; head < queue_.size(); ++head) {
      const std::size_t u = queue_[head];
      for (std::size_t slot : adj_[u]) {
        const std::size_t w = other_end(slot, u);
        if (visited_[w]) continue;
        visited_[w] = 1;
        const std::size_t a = basis_[slot].arc;
        pot_[w] = cost_(a / n_, a % n_) - pot_[u];
        parent_slot_[w] = slot;
        depth_[w] = depth_[u] + 1;
        queue_.push_back(w);
      }
    }
    if (queue_.size() != nodes) throw InternalError("network simplex: basis is not a spanning tree");
  }

  // Returns the step length theta.
  double pivot(std::size_t entering, bool bland) {
    const std::size_t src = entering / n_, snk = m_ + entering % n_;
    // Tree path from the sink up to the LCA, then from the LCA down to the source.
    std::vector<std::size_t>& up_sink = path_a_;
    std::vector<std::size_t>& up_src = path_b_;
    up_sink.clear();
    up_src.clear();
    std::size_t a = snk, b = src;
    while (depth_[a] > depth_[b]) {
      up_sink.push_back(parent_slot_[a]);
      a = other_end(parent_slot_[a], a);
    }
    while (depth_[b] > depth_[a]) {
      up_src.push_back(parent_slot_[b]);
      b = other_end(parent_slot_[b], b);
    }
    while (a != b) {
      up_sink.push_back(parent_slot_[a]);
      a = other_end(parent_slot_[a], a);
      up_src.push_back(parent_slot_[b]);
      b = other_end(parent_slot_[b], b);
    }
    cycle_.assign(up_sink.begin(), up_sink.end());
    cycle_.insert(cycle_.end(), up_src.rbegin(), up_src.rend());
    // Along sink -> source, even positions lose theta, odd positions gain it.
    double theta = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < cycle_.size(); p += 2) theta = std::min(theta, basis_[cycle_[p]].flow);
    theta = std::max(theta, 0.0);

    std::size_t leaving = cycle_.size();
    for (std::size_t p = 0; p < cycle_.size(); p += 2) {
      const auto& arc = basis_[cycle_[p]];
      if (arc.flow > theta + flow_eps_) continue;
      if (leaving == cycle_.size()) {
        leaving = p;
        if (!bland) break;
      } else if (arc.arc < basis_[cycle_[leaving]].arc) {
        leaving = p;
      }
    }
    if (leaving == cycle_.size()) throw InternalError("network simplex: no leaving arc");

    for (std::size_t p = 0; p < cycle_.size(); ++p) {
      auto& arc = basis_[cycle_[p]];
      if (p % 2 == 0) {
        arc.flow -= theta;
        if (arc.flow < flow_eps_) arc.flow = 0.0;
      } else {
        arc.flow += theta;
      }
    }

    // Replace the leaving slot by the entering arc.
    const std::size_t slot = cycle_[leaving];
    const std::size_t old = basis_[slot].arc;
    auto detach = [&](std::size_t node) {
      auto& list = adj_[node];
      list.erase(std::find(list.begin(), list.end(), slot));
    };
    detach(old / n_);
    detach(m_ + old % n_);
    basis_[slot] = {entering, theta};
    adj_[src].push_back(slot);
    adj_[snk].push_back(slot);
    return theta;
  }

  std::size_t m_, n_;
  const CostMatrix& cost_;
  std::span<const double> supply_, demand_;
  std::vector<BasicArc> basis_;
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<double> pot_;
  std::vector<std::size_t> parent_slot_, depth_, queue_;
  std::vector<char> visited_;
  std::vector<std::size_t> path_a_, path_b_, cycle_;
  double flow_eps_ = 0.0;
};

}  // namespace

TransportResult solve_transport(std::span<const double> supply, std::span<const double> demand,
                                const CostMatrix& cost) {
  if (supply.empty() || demand.empty()) throw DomainError("solve_transport: empty marginal");
  if (cost.rows() != supply.size() || cost.cols() != demand.size())
    throw DomainError("solve_transport: cost matrix shape mismatch");
  TransportSimplex simplex(supply, demand, cost);
  return simplex.run();
}

}  // namespace flockkin
