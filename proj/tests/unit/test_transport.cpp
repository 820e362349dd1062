#include <doctest.h>

#include <cmath>
#include <random>

#include "flockkin/errors.hpp"
#include "flockkin/transport.hpp"
#include "oracles.hpp"

using namespace flockkin;

namespace {

DiscreteMeasure diracs(std::vector<double> pts, std::vector<double> w) {
  return DiscreteMeasure(1, std::move(pts), std::move(w));
}

DiscreteMeasure random_measure(std::mt19937_64& gen, std::size_t n, std::size_t dim, bool uniform) {
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  std::vector<double> pts(dim * n);
  for (double& p : pts) p = u(gen);
  if (uniform) return DiscreteMeasure::uniform(dim, std::move(pts));
  return DiscreteMeasure(dim, std::move(pts), oracle::random_weights(n, static_cast<unsigned>(gen())));
}

void check_plan(const TransportResult& r, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                const GroundMetric& metric) {
  std::vector<double> rows(mu.size(), 0.0), cols(nu.size(), 0.0);
  double cost = 0.0;
  for (const auto& e : r.plan.entries) {
    CHECK(e.mass > 0.0);
    rows[e.source] += e.mass;
    cols[e.target] += e.mass;
    cost += e.mass * metric(mu.point(e.source), nu.point(e.target));
  }
  for (std::size_t i = 0; i < mu.size(); ++i) CHECK(std::abs(rows[i] - mu.weight(i)) <= 1e-10);
  for (std::size_t j = 0; j < nu.size(); ++j) CHECK(std::abs(cols[j] - nu.weight(j)) <= 1e-10);
  CHECK(std::abs(cost - r.distance) <= 1e-10);
  CHECK(r.plan.entries.size() <= mu.size() + nu.size() - 1);
}

}  // namespace

TEST_CASE("ground metrics satisfy the metric axioms") {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> n(0.0, 1.0);
  for (const auto& metric : {GroundMetric::euclidean(), GroundMetric::sum_of_norms(2)}) {
    for (int k = 0; k < 300; ++k) {
      std::vector<double> a(4), b(4), c(4);
      for (int i = 0; i < 4; ++i) a[i] = n(gen), b[i] = n(gen), c[i] = n(gen);
      CHECK(metric(a, a) == 0.0);
      CHECK(metric(a, b) == metric(b, a));
      CHECK(metric(a, c) <= metric(a, b) + metric(b, c) + 1e-12);
    }
  }
  const std::vector<double> p{0, 0, 0, 0}, q{3, 4, 0, 1};
  CHECK(GroundMetric::sum_of_norms(2)(p, q) == doctest::Approx(6.0));
  CHECK(GroundMetric::euclidean()(p, q) == doctest::Approx(std::sqrt(26.0)));
}

TEST_CASE("measure construction") {
  CHECK_THROWS_AS(diracs({0.0, 1.0}, {0.5, 0.6}), DomainError);
  CHECK_THROWS_AS(diracs({0.0}, {-1.0}), DomainError);
  CHECK_THROWS_AS(diracs({std::nan("")}, {1.0}), DomainError);
  const auto mu = diracs({0.0, 1.0}, {0.5, 0.5 + 5e-13});
  CHECK(mu.weight(0) + mu.weight(1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(DiscreteMeasure::uniform(1, {0.0, 1.0, 2.0}).equal_weights());
}

TEST_CASE("w1 examples") {
  const auto e = GroundMetric::euclidean();
  CHECK(w1(diracs({0.0}, {1.0}), diracs({3.0}, {1.0}), e).distance == doctest::Approx(3.0));
  CHECK(w1(diracs({0.0, 1.0}, {0.5, 0.5}), diracs({0.0, 2.0}, {0.5, 0.5}), e).distance == doctest::Approx(0.5));
  const auto mu = diracs({0.0, 1.0, 5.0}, {0.2, 0.3, 0.5});
  CHECK(w1(mu, mu, e).distance == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("w1 brute force oracle") {
  const auto e = GroundMetric::euclidean();
  const std::vector<double> a{0.0, 1.0}, b{3.0, -3.0};
  CHECK(w1_bruteforce(DiscreteMeasure(2, a, {1.0}), DiscreteMeasure(2, b, {1.0}), e) == doctest::Approx(5.0));
  const auto src = diracs({1.0}, {1.0});
  const auto dst = diracs({0.0, 4.0, -2.0}, {0.2, 0.5, 0.3});
  CHECK(w1_bruteforce(src, dst, e) == doctest::Approx(0.2 * 1 + 0.5 * 3 + 0.3 * 3));

  std::mt19937_64 gen(3);
  for (int k = 0; k < 50; ++k) {
    const auto mu = random_measure(gen, 3, 2, true), nu = random_measure(gen, 3, 2, true);
    CHECK(std::abs(w1(mu, nu, e).distance - w1_bruteforce(mu, nu, e)) <= 1e-12);
  }
  // The brute force agrees with an independent LP dual.
  for (int k = 0; k < 50; ++k) {
    const auto mu = random_measure(gen, 3, 2, false), nu = random_measure(gen, 4, 2, false);
    CHECK(std::abs(w1_bruteforce(mu, nu, e) - oracle::w1_dual(mu, nu, e)) <= 1e-9);
  }
  std::mt19937_64 big(4);
  CHECK_THROWS_AS(w1_bruteforce(random_measure(big, 9, 1, false), random_measure(big, 9, 1, false), e),
                  DomainError);
}

TEST_CASE("solvers agree and plans are feasible") {
  std::mt19937_64 gen(7);
  for (const auto& metric : {GroundMetric::euclidean(), GroundMetric::sum_of_norms(1)}) {
    for (int k = 0; k < 40; ++k) {
      const std::size_t m = 1 + gen() % 30, n = 1 + gen() % 30;
      const auto mu = random_measure(gen, m, 2, false), nu = random_measure(gen, n, 2, false);
      const auto r = w1(mu, nu, metric);
      check_plan(r, mu, nu, metric);
      if (m + n <= 14) CHECK(std::abs(r.distance - oracle::w1_dual(mu, nu, metric)) <= 1e-9);
    }
    for (int k = 0; k < 20; ++k) {
      const std::size_t n = 2 + gen() % 40;
      const auto mu = random_measure(gen, n, 2, true), nu = random_measure(gen, n, 2, true);
      const auto a = w1(mu, nu, metric, TransportSolver::assignment);
      const auto s = w1(mu, nu, metric, TransportSolver::network_simplex);
      check_plan(a, mu, nu, metric);
      check_plan(s, mu, nu, metric);
      CHECK(std::abs(a.distance - s.distance) <= 1e-10);
    }
  }
}

TEST_CASE("degenerate instances terminate") {
  // Many equal costs and equal weights: heavy degeneracy for the simplex.
  std::vector<double> grid;
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 12; ++j) grid.push_back(i), grid.push_back(j);
  const auto mu = DiscreteMeasure::uniform(2, grid);
  auto shifted = grid;
  for (std::size_t k = 0; k < shifted.size(); k += 2) shifted[k] += 1.0;
  const auto nu = DiscreteMeasure::uniform(2, shifted);
  const auto r = w1(mu, nu, GroundMetric::sum_of_norms(1), TransportSolver::network_simplex);
  CHECK(r.distance == doctest::Approx(1.0).epsilon(1e-12));
  check_plan(r, mu, nu, GroundMetric::sum_of_norms(1));
}

TEST_CASE("w1 metric axioms on measures") {
  std::mt19937_64 gen(11);
  const auto e = GroundMetric::euclidean();
  for (int k = 0; k < 100; ++k) {
    const auto a = random_measure(gen, 1 + gen() % 7, 2, false);
    const auto b = random_measure(gen, 1 + gen() % 7, 2, false);
    const auto c = random_measure(gen, 1 + gen() % 7, 2, false);
    const double ab = w1(a, b, e).distance, ba = w1(b, a, e).distance;
    CHECK(std::abs(ab - ba) <= 1e-10);
    CHECK(w1(a, a, e).distance == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(w1(a, c, e).distance - ab - w1(b, c, e).distance <= 1e-9);
  }
}

TEST_CASE("bounded Lipschitz distance") {
  const auto e = GroundMetric::euclidean();
  CHECK(bounded_lipschitz(diracs({0.0}, {1.0}), diracs({3.0}, {1.0}), e) == doctest::Approx(2.0));
  CHECK(bounded_lipschitz(diracs({0.0}, {1.0}), diracs({0.5}, {1.0}), e) == doctest::Approx(0.5));
  const auto mu = diracs({0.0, 2.0}, {0.4, 0.6});
  CHECK(bounded_lipschitz(mu, mu, e) == doctest::Approx(0.0).epsilon(1e-15));

  std::mt19937_64 gen(13);
  for (int k = 0; k < 1000; ++k) {
    const auto a = random_measure(gen, 1 + gen() % 6, 2, k % 2 == 0);
    const auto b = random_measure(gen, 1 + gen() % 6, 2, k % 2 == 0);
    const double d = bounded_lipschitz(a, b, e);
    CHECK(d <= w1(a, b, e).distance + 1e-12);
    CHECK(d <= 2.0 + 1e-12);
    if (a.size() + b.size() <= 8) CHECK(std::abs(d - oracle::lipschitz_dual(a, b, e, 2.0)) <= 1e-9);
  }
  std::vector<double> many(600, 0.0);
  CHECK_THROWS_AS(bounded_lipschitz(DiscreteMeasure::uniform(1, many), diracs({0.0}, {1.0}), e), DomainError);
}

TEST_CASE("dirac flocking distance") {
  EmpiricalMeasure mu;
  mu.dim = 1;
  mu.x = {0.0, 0.0};
  mu.v = {1.0, -1.0};
  mu.w = {0.5, 0.5};
  const std::vector<double> zero{0.0};
  CHECK(dirac_flocking_distance(mu, zero, phase_metric(MetricKind::euclidean, 1)) == doctest::Approx(1.0));

  EmpiricalMeasure same = mu;
  same.v = {0.3, 0.3};
  const std::vector<double> ref{0.3};
  CHECK(dirac_flocking_distance(same, ref, phase_metric(MetricKind::euclidean, 1)) == 0.0);

  std::mt19937_64 gen(21);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    EmpiricalMeasure r;
    r.dim = 2;
    const std::size_t atoms = 1 + gen() % 6;
    for (std::size_t a = 0; a < 2 * atoms; ++a) r.x.push_back(n(gen)), r.v.push_back(n(gen));
    r.w = oracle::random_weights(atoms, static_cast<unsigned>(k));
    const std::vector<double> vr{n(gen), n(gen)};
    double identity = 0.0, gf = 0.0;
    for (std::size_t a = 0; a < atoms; ++a) {
      const double dv = std::hypot(r.v[2 * a] - vr[0], r.v[2 * a + 1] - vr[1]);
      identity += r.w[a] * dv;
      gf += r.w[a] * dv * dv;
    }
    const double d = dirac_flocking_distance(r, vr, phase_metric(MetricKind::euclidean, 2));
    CHECK(d <= identity + 1e-12);
    CHECK(d <= std::sqrt(gf) + 1e-12);
  }
}
