#include <limits>
#include <vector>

#include "flockkin/errors.hpp"
#include "flockkin/transport.hpp"

namespace flockkin {

// Shortest augmenting paths with row/column potentials: each row is inserted
// by a Dijkstra-like sweep over columns, O(n^3) overall.
TransportResult solve_assignment(const CostMatrix& cost, double mass) {
  const std::size_t n = cost.rows();
  if (n == 0 || cost.cols() != n) throw DomainError("solve_assignment: square cost matrix required");
  constexpr double inf = std::numeric_limits<double>::infinity();

  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);  // match[col] = row (1-based)
  std::vector<char> used(n + 1);

  for (std::size_t row = 1; row <= n; ++row) {
    match[0] = row;
    std::size_t col0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[col0] = 1;
      const std::size_t row0 = match[col0];
      double delta = inf;
      std::size_t col1 = 0;
      for (std::size_t col = 1; col <= n; ++col) {
        if (used[col]) continue;
        const double cur = cost(row0 - 1, col - 1) - u[row0] - v[col];
        if (cur < minv[col]) {
          minv[col] = cur;
          way[col] = col0;
        }
        if (minv[col] < delta) {
          delta = minv[col];
          col1 = col;
        }
      }
      if (col1 == 0) throw InternalError("solve_assignment: no augmenting column");
      for (std::size_t col = 0; col <= n; ++col) {
        if (used[col]) {
          u[match[col]] += delta;
          v[col] -= delta;
        } else {
          minv[col] -= delta;
        }
      }
      col0 = col1;
    } while (match[col0] != 0);
    do {
      const std::size_t col1 = way[col0];
      match[col0] = match[col1];
      col0 = col1;
    } while (col0 != 0);
  }

  TransportResult result;
  std::vector<std::size_t> target_of(n);
  for (std::size_t col = 1; col <= n; ++col) target_of[match[col] - 1] = col - 1;
  for (std::size_t i = 0; i < n; ++i) {
    result.plan.entries.push_back({i, target_of[i], mass});
    result.plan.cost += mass * cost(i, target_of[i]);
  }
  result.distance = result.plan.cost;
  return result;
}

}  // namespace flockkin
