#include "oracles.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace oracle {

double lp_max(const std::vector<double>& c, const std::vector<double>& A, const std::vector<double>& b) {
  const std::size_t m = b.size(), n = c.size();
  const std::size_t cols = n + m + 1;  // structural, slack, rhs
  std::vector<double> T((m + 1) * cols, 0.0);
  auto at = [&](std::size_t r, std::size_t k) -> double& { return T[r * cols + k]; };
  std::vector<std::size_t> basis(m);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t k = 0; k < n; ++k) at(r, k) = A[r * n + k];
    at(r, n + r) = 1.0;
    at(r, cols - 1) = b[r];
    basis[r] = n + r;
  }
  for (std::size_t k = 0; k < n; ++k) at(m, k) = -c[k];

  constexpr double eps = 1e-13;
  for (int iter = 0; iter < 100000; ++iter) {
    std::size_t enter = cols;
    for (std::size_t k = 0; k + 1 < cols; ++k)
      if (at(m, k) < -eps) {
        enter = k;
        break;
      }
    if (enter == cols) return at(m, cols - 1);
    std::size_t leave = m;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < m; ++r) {
      if (at(r, enter) <= eps) continue;
      const double ratio = at(r, cols - 1) / at(r, enter);
      if (ratio < best - 1e-15 || (std::abs(ratio - best) <= 1e-15 && basis[r] < basis[leave])) {
        best = ratio;
        leave = r;
      }
    }
    if (leave == m) throw std::runtime_error("lp_max: unbounded");
    const double piv = at(leave, enter);
    for (std::size_t k = 0; k < cols; ++k) at(leave, k) /= piv;
    for (std::size_t r = 0; r <= m; ++r) {
      if (r == leave) continue;
      const double f = at(r, enter);
      if (f == 0.0) continue;
      for (std::size_t k = 0; k < cols; ++k) at(r, k) -= f * at(leave, k);
    }
    basis[leave] = enter;
  }
  throw std::runtime_error("lp_max: iteration limit");
}

double lipschitz_dual(const flockkin::DiscreteMeasure& mu, const flockkin::DiscreteMeasure& nu,
                      const flockkin::GroundMetric& metric, double cap) {
  const std::size_t m = mu.size(), n = nu.size(), p = m + n;
  auto point = [&](std::size_t k) { return k < m ? mu.point(k) : nu.point(k - m); };
  std::vector<double> c(p);
  for (std::size_t k = 0; k < m; ++k) c[k] = mu.weight(k);
  for (std::size_t k = 0; k < n; ++k) c[m + k] = -nu.weight(k);
  std::vector<double> A, b;
  for (std::size_t i = 0; i < p; ++i) {
    std::vector<double> row(p, 0.0);
    row[i] = 1.0;
    A.insert(A.end(), row.begin(), row.end());
    b.push_back(cap);
    for (std::size_t j = 0; j < p; ++j) {
      if (i == j) continue;
      std::vector<double> diff(p, 0.0);
      diff[i] = 1.0;
      diff[j] = -1.0;
      A.insert(A.end(), diff.begin(), diff.end());
      b.push_back(metric(point(i), point(j)));
    }
  }
  return lp_max(c, A, b);
}

double w1_dual(const flockkin::DiscreteMeasure& mu, const flockkin::DiscreteMeasure& nu,
               const flockkin::GroundMetric& metric) {
  double diam = 0.0;
  const std::size_t m = mu.size(), n = nu.size();
  auto point = [&](std::size_t k) { return k < m ? mu.point(k) : nu.point(k - m); };
  for (std::size_t i = 0; i < m + n; ++i)
    for (std::size_t j = 0; j < m + n; ++j) diam = std::max(diam, metric(point(i), point(j)));
  return lipschitz_dual(mu, nu, metric, diam + 1.0);
}

double two_body_gf(double gf0, double level, double t) { return gf0 * std::exp(-2.0 * level * t); }

double two_body_gap(double gap0, double w0, double level, double t) {
  return gap0 + w0 * (1.0 - std::exp(-level * t)) / level;
}

std::vector<double> random_weights(std::size_t n, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  std::vector<double> w(n);
  double s = 0.0;
  for (double& x : w) s += (x = u(gen));
  for (double& x : w) x /= s;
  return w;
}

}  // namespace oracle
