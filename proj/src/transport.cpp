#include "flockkin/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <string>
#include <utility>

#include "flockkin/errors.hpp"

namespace flockkin {

namespace {

double norm_diff(const double* a, const double* b, std::size_t k) {
  double s = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    const double d = a[c] - b[c];
    s += d * d;
  }
  return std::sqrt(s);
}

void require_same_dim(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const char* who) {
  if (mu.size() == 0 || nu.size() == 0) throw DomainError(std::string(who) + ": empty measure");
  if (mu.dim() != nu.dim()) throw DomainError(std::string(who) + ": dimension mismatch");
}

}  // namespace

double GroundMetric::operator()(std::span<const double> a, std::span<const double> b) const {
  if (kind == MetricKind::euclidean) return norm_diff(a.data(), b.data(), a.size());
  const std::size_t s = std::min(split, a.size());
  return norm_diff(a.data(), b.data(), s) + norm_diff(a.data() + s, b.data() + s, a.size() - s);
}

GroundMetric phase_metric(MetricKind kind, std::size_t d) {
  return kind == MetricKind::euclidean ? GroundMetric::euclidean() : GroundMetric::sum_of_norms(d);
}

DiscreteMeasure::DiscreteMeasure(std::size_t dim, std::vector<double> points, std::vector<double> weights)
    : dim_(dim), points_(std::move(points)), weights_(std::move(weights)) {
  if (dim_ == 0) throw DomainError("DiscreteMeasure: dimension must be positive");
  if (weights_.empty()) throw DomainError("DiscreteMeasure: no atoms");
  if (points_.size() != weights_.size() * dim_)
    throw DomainError("DiscreteMeasure: point array does not match weights");
  for (double p : points_)
    if (!std::isfinite(p)) throw DomainError("DiscreteMeasure: non-finite coordinate");
  double total = 0.0;
  for (double w : weights_) {
    if (!(w > 0.0) || !std::isfinite(w)) throw DomainError("DiscreteMeasure: weights must be positive");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw DomainError("DiscreteMeasure: weights sum to " + std::to_string(total) + ", not 1");
  if (total != 1.0)
    for (double& w : weights_) w /= total;
}

DiscreteMeasure DiscreteMeasure::from_empirical(const EmpiricalMeasure& mu) {
  const std::size_t d = mu.dim;
  std::vector<double> pts(mu.size() * 2 * d);
  for (std::size_t a = 0; a < mu.size(); ++a) {
    std::copy_n(mu.x.data() + a * d, d, pts.data() + a * 2 * d);
    std::copy_n(mu.v.data() + a * d, d, pts.data() + a * 2 * d + d);
  }
  return DiscreteMeasure(2 * d, std::move(pts), mu.w);
}

DiscreteMeasure DiscreteMeasure::uniform(std::size_t dim, std::vector<double> points) {
  if (dim == 0 || points.size() % dim != 0 || points.empty())
    throw DomainError("DiscreteMeasure::uniform: bad point array");
  const std::size_t n = points.size() / dim;
  return DiscreteMeasure(dim, std::move(points), std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

bool DiscreteMeasure::equal_weights() const noexcept {
  return std::all_of(weights_.begin(), weights_.end(), [&](double w) { return w == weights_.front(); });
}

CostMatrix::CostMatrix(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const GroundMetric& metric,
                       std::function<double(double)> transform)
    : mu_(&mu), nu_(&nu), metric_(metric), transform_(std::move(transform)), m_(mu.size()), n_(nu.size()) {
  if (m_ * n_ > dense_limit) return;
  dense_.resize(m_ * n_);
  for (std::size_t i = 0; i < m_; ++i) {
    const auto a = mu.point(i);
    for (std::size_t j = 0; j < n_; ++j) {
      const double c = metric_(a, nu.point(j));
      dense_[i * n_ + j] = transform_ ? transform_(c) : c;
    }
  }
}

double CostMatrix::operator()(std::size_t i, std::size_t j) const {
  if (!dense_.empty()) return dense_[i * n_ + j];
  const double c = metric_(mu_->point(i), nu_->point(j));
  return transform_ ? transform_(c) : c;
}

TransportResult w1(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const GroundMetric& metric,
                   TransportSolver solver) {
  require_same_dim(mu, nu, "w1");
  const bool square_uniform = mu.size() == nu.size() && mu.equal_weights() && nu.equal_weights() &&
                              mu.weight(0) == nu.weight(0);
  if (solver == TransportSolver::assignment && !square_uniform)
    throw DomainError("w1: assignment solver needs equal-count equal-weight measures");
  const CostMatrix cost(mu, nu, metric);
  if (solver == TransportSolver::assignment || (solver == TransportSolver::automatic && square_uniform))
    return solve_assignment(cost, mu.weight(0));
  return solve_transport(mu.weights(), nu.weights(), cost);
}

namespace {

// One spanning tree of K_{m,n} as a leaf-elimination order: at each step the
// leaf node's residual mass is pushed through `cell` to its other endpoint.
struct TreeStep {
  unsigned char cell;
  unsigned char leaf;  ///< node: rows 0..m-1, columns m..m+n-1
};

constexpr std::size_t max_trees = 2'000'000;

class TreeEnumerator {
 public:
  TreeEnumerator(std::size_t m, std::size_t n) : m_(m), n_(n), parent_(m + n), size_(m + n, 1) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    chosen_.reserve(m + n - 1);
    dfs(0);
  }
  std::vector<std::vector<TreeStep>> trees;

 private:
  std::size_t find(std::size_t a) const {
    while (parent_[a] != a) a = parent_[a];
    return a;
  }

  void dfs(std::size_t cell) {
    const std::size_t need = m_ + n_ - 1;
    if (chosen_.size() == need) {
      record();
      return;
    }
    if (need - chosen_.size() > m_ * n_ - cell) return;
    const std::size_t r = find(cell / n_), c = find(m_ + cell % n_);
    if (r != c) {
      auto [big, small] = size_[r] >= size_[c] ? std::pair{r, c} : std::pair{c, r};
      parent_[small] = big;
      size_[big] += size_[small];
      chosen_.push_back(cell);
      dfs(cell + 1);
      chosen_.pop_back();
      size_[big] -= size_[small];
      parent_[small] = small;
    }
    dfs(cell + 1);
  }

  void record() {
    std::vector<std::size_t> degree(m_ + n_, 0);
    for (std::size_t cell : chosen_) {
      ++degree[cell / n_];
      ++degree[m_ + cell % n_];
    }
    std::vector<char> gone(chosen_.size(), 0);
    std::vector<TreeStep> order;
    order.reserve(chosen_.size());
    while (order.size() < chosen_.size()) {
      for (std::size_t e = 0; e < chosen_.size(); ++e) {
        if (gone[e]) continue;
        const std::size_t cell = chosen_[e];
        const std::size_t r = cell / n_, c = m_ + cell % n_;
        std::size_t leaf;
        if (degree[r] == 1)
          leaf = r;
        else if (degree[c] == 1)
          leaf = c;
        else
          continue;
        gone[e] = 1;
        --degree[r];
        --degree[c];
        order.push_back({static_cast<unsigned char>(cell), static_cast<unsigned char>(leaf)});
      }
    }
    trees.push_back(std::move(order));
  }

  std::size_t m_, n_;
  std::vector<std::size_t> parent_, size_;
  std::vector<std::size_t> chosen_;
};

const std::vector<std::vector<TreeStep>>& spanning_trees(std::size_t m, std::size_t n) {
  static std::mutex mutex;
  static std::map<std::pair<std::size_t, std::size_t>, std::vector<std::vector<TreeStep>>> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find({m, n});
  if (it == cache.end()) it = cache.emplace(std::pair{m, n}, TreeEnumerator(m, n).trees).first;
  return it->second;
}

}  // namespace

double w1_bruteforce(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const GroundMetric& metric) {
  require_same_dim(mu, nu, "w1_bruteforce");
  const std::size_t m = mu.size(), n = nu.size();
  if (m * n > 64) throw DomainError("w1_bruteforce: m * n must not exceed 64");
  std::vector<double> c(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) c[i * n + j] = metric(mu.point(i), nu.point(j));

  if (m == 1 || n == 1) {
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) total += (m == 1 ? nu.weight(j) : mu.weight(i)) * c[i * n + j];
    return total;
  }

  if (m == n && mu.equal_weights() && nu.equal_weights() && mu.weight(0) == nu.weight(0)) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    double best = std::numeric_limits<double>::infinity();
    do {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += c[i * n + perm[i]];
      best = std::min(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best * mu.weight(0);
  }

  // Number of spanning trees of K_{m,n} is m^(n-1) n^(m-1).
  const double count = std::pow(static_cast<double>(m), static_cast<double>(n - 1)) *
                       std::pow(static_cast<double>(n), static_cast<double>(m - 1));
  if (count > static_cast<double>(max_trees))
    throw DomainError("w1_bruteforce: too many basic solutions to enumerate for this shape");

  std::vector<double> residual(m + n);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& tree : spanning_trees(m, n)) {
    for (std::size_t i = 0; i < m; ++i) residual[i] = mu.weight(i);
    for (std::size_t j = 0; j < n; ++j) residual[m + j] = nu.weight(j);
    double cost = 0.0;
    bool feasible = true;
    for (const TreeStep& s : tree) {
      const double f = residual[s.leaf];
      if (f < -1e-12) {
        feasible = false;
        break;
      }
      const std::size_t other = s.leaf < m ? m + s.cell % n : s.cell / n;
      residual[s.leaf] = 0.0;
      residual[other] -= f;
      cost += f * c[s.cell];
    }
    if (feasible) best = std::min(best, cost);
  }
  return best;
}

double bounded_lipschitz(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const GroundMetric& metric) {
  require_same_dim(mu, nu, "bounded_lipschitz");
  if (mu.size() + nu.size() > 512) throw DomainError("bounded_lipschitz: at most 512 atoms in total");
  const CostMatrix cost(mu, nu, metric, [](double c) { return std::min(c, 2.0); });
  return solve_transport(mu.weights(), nu.weights(), cost).distance;
}

double dirac_flocking_distance(const EmpiricalMeasure& mu, std::span<const double> v_ref,
                               const GroundMetric& metric) {
  mu.validate();
  if (v_ref.size() != mu.dim) throw DomainError("dirac_flocking_distance: v_ref has wrong dimension");
  const DiscreteMeasure source = DiscreteMeasure::from_empirical(mu);
  EmpiricalMeasure target = mu;
  for (std::size_t a = 0; a < mu.size(); ++a) std::copy(v_ref.begin(), v_ref.end(), target.v.begin() + a * mu.dim);
  return w1(source, DiscreteMeasure::from_empirical(target), metric).distance;
}

}  // namespace flockkin
