#include <doctest.h>

#include <cmath>

#include "flockkin/dynamics.hpp"
#include "flockkin/errors.hpp"
#include "flockkin/kinetic.hpp"

using namespace flockkin;

namespace {

ModelSpec linear_model(std::size_t d) {
  ModelSpec m;
  m.dimension = d;
  m.kernel = KernelSpec::constant(1.0);
  return m;
}

ModelSpec rich_model(std::size_t d) {
  ModelSpec m;
  m.dimension = d;
  m.kernel = KernelSpec::cucker_smale(1.0, 0.5);
  m.coupling = CouplingSpec::power(1.1);
  m.repulsion = RepulsionSpec::saturated(0.05, 0.01);
  m.phi_star = 0.05;
  m.f_star = 0.05;
  return m;
}

EmpiricalMeasure atoms(std::vector<double> x, std::vector<double> v, std::vector<double> w) {
  EmpiricalMeasure mu;
  mu.dim = x.size() / w.size();
  mu.x = std::move(x);
  mu.v = std::move(v);
  mu.w = std::move(w);
  return mu;
}

}  // namespace

TEST_CASE("from_particles") {
  ParticleState one(1, 1);
  const auto mu = from_particles(one);
  REQUIRE(mu.size() == 1);
  CHECK(mu.w[0] == 1.0);
  ParticleState two(2, 3);
  two.x(1, 2) = 5.0;
  const auto mu2 = from_particles(two);
  CHECK(mu2.w == std::vector<double>{0.5, 0.5});
  CHECK(mu2.x_of(1)[2] == 5.0);

  InitialSpec spec;
  spec.n = 31;
  spec.dim = 2;
  spec.seed = 2;
  const auto s = sample_initial(spec);
  const auto m = moments(from_particles(s));
  double v2 = 0.0, x1 = 0.0;
  for (std::size_t i = 0; i < 31; ++i) {
    v2 += (s.v(i, 0) * s.v(i, 0) + s.v(i, 1) * s.v(i, 1)) / 31.0;
    x1 += s.x(i, 0) / 31.0;
  }
  CHECK(m.V2 == doctest::Approx(v2).epsilon(1e-14));
  CHECK(m.X1[0] == doctest::Approx(x1).epsilon(1e-14));
}

TEST_CASE("sample_initial") {
  InitialSpec spec;
  spec.n = 20;
  spec.dim = 2;
  spec.x_center = {1.0, -1.0};
  spec.x_radius = 0.0;
  spec.seed = 3;
  const auto s = sample_initial(spec);
  for (std::size_t i = 0; i < 20; ++i) {
    CHECK(s.x(i, 0) == 1.0);
    CHECK(s.x(i, 1) == -1.0);
  }
  CHECK(sample_initial(spec) == s);

  // Nested sampling: the first agents of a larger run are the same.
  spec.x_radius = 1.0;
  auto big = spec;
  big.n = 50;
  const auto a = sample_initial(spec), b = sample_initial(big);
  for (std::size_t i = 0; i < 20; ++i) CHECK(a.position_of(i) == b.position_of(i));

  InitialSpec wide;
  wide.n = 10000;
  wide.dim = 1;
  wide.seed = 12;
  const auto w = sample_initial(wide);
  double mean = 0.0;
  for (double x : w.positions()) mean += x / 10000.0;
  CHECK(std::abs(mean) <= 3.0 / std::sqrt(3.0) / 100.0);

  for (auto preset : {InitialPreset::gaussian_truncated, InitialPreset::two_cluster}) {
    InitialSpec g;
    g.preset = preset;
    g.n = 200;
    g.dim = 2;
    g.x_center2 = {3.0, 0.0};
    g.v_center2 = {0.0, 1.0};
    g.seed = 1;
    const auto s2 = sample_initial(g);
    CHECK(support_radius(from_particles(s2)) <= g.support_bound() + 1e-12);
  }
}

TEST_CASE("moments") {
  const auto mu = atoms({-1.0, 1.0}, {0.0, 0.0}, {0.5, 0.5});
  const auto m = moments(mu);
  CHECK(m.X1[0] == 0.0);
  CHECK(m.X2 == doctest::Approx(1.0));
  CHECK(m.Gamma == doctest::Approx(1.0));
  CHECK(m.Gf == 0.0);

  const auto single = moments(atoms({2.0, 3.0}, {1.0, -1.0}, {1.0}));
  CHECK(single.Gf == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(single.Gamma == doctest::Approx(0.0).epsilon(1e-15));

  auto mu3 = atoms({0.0, 1.0, 2.0}, {0.3, -0.1, 0.8}, {0.2, 0.3, 0.5});
  const auto before = moments(mu3);
  for (double& v : mu3.v) v += 2.5;
  const auto after = moments(mu3);
  CHECK(after.Gf == doctest::Approx(before.Gf).epsilon(1e-12));
  CHECK(after.V1[0] == doctest::Approx(before.V1[0] + 2.5).epsilon(1e-14));
  CHECK_THROWS_AS(atoms({0.0}, {0.0}, {0.9}).validate(), DomainError);
}

TEST_CASE("support radius") {
  CHECK(support_radius(atoms({0.0}, {0.0}, {1.0})) == 0.0);
  CHECK(support_radius(atoms({3.0}, {4.0}, {1.0})) == doctest::Approx(5.0));
  CHECK(support_radius(atoms({3.0}, {4.0}, {1.0}), PhaseNorm::sum_of_norms) == doctest::Approx(7.0));
  CHECK(support_radius(atoms({3.0, 1.0}, {4.0, 1.0}, {0.5, 0.5})) == doctest::Approx(5.0));
}

TEST_CASE("field_H") {
  const auto mu = atoms({1.0, 2.0}, {0.5, -0.5}, {1.0});
  const std::vector<double> x{4.0, 0.0}, v{1.0, 1.0};
  const auto h = field_H(mu, x, v, linear_model(2));
  CHECK(h[0] == doctest::Approx(-(1.0 - 0.5)));
  CHECK(h[1] == doctest::Approx(-(1.0 + 0.5)));

  const auto common = atoms({0.0, 1.0, 2.0}, {0.7, 0.7, 0.7}, {0.2, 0.3, 0.5});
  const std::vector<double> x1{5.0}, v1{0.7};
  CHECK(field_H(common, x1, v1, linear_model(1))[0] == 0.0);

  InitialSpec spec;
  spec.n = 8;
  spec.dim = 2;
  spec.seed = 17;
  for (std::size_t n : {8u, 33u, 64u}) {
    spec.n = n;
    const auto s = sample_initial(spec);
    const auto model = rich_model(2);
    const auto acc = accelerations(s, model);
    const auto emp = from_particles(s);
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto hi = field_H(emp, s.position_of(i), s.velocity_of(i), model);
      for (std::size_t k = 0; k < 2; ++k) worst = std::max(worst, std::abs(hi[k] - acc[k * n + i]));
    }
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("characteristics") {
  InitialSpec spec;
  spec.n = 6;
  spec.dim = 2;
  spec.v_center = {0.2, 0.1};
  spec.seed = 4;
  const auto model = rich_model(2);
  IntegratorConfig cfg;
  cfg.dt = 0.01;
  cfg.t_end = 1.0;
  cfg.error_tol = 1e-12;
  const auto traj = integrate(sample_initial(spec), model, cfg);
  const auto& s0 = traj.front().state;
  const auto path = flow_characteristic(traj, model, s0.position_of(0), s0.velocity_of(0), cfg, 0.0, 1.0);
  CHECK(path.back().t == 1.0);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(path.back().x[k] == doctest::Approx(traj.back().state.x(0, k)).epsilon(1e-8));
    CHECK(path.back().v[k] == doctest::Approx(traj.back().state.v(0, k)).epsilon(1e-8));
  }

  // Round trip forward and back.
  const std::vector<double> x0{0.3, -0.2}, v0{0.0, 0.5};
  const auto fwd = flow_characteristic(traj, model, x0, v0, cfg, 0.0, 1.0);
  const auto back = flow_characteristic(traj, model, fwd.back().x, fwd.back().v, cfg, 1.0, 0.0);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(std::abs(back.back().x[k] - x0[k]) <= 1e-6);
    CHECK(std::abs(back.back().v[k] - v0[k]) <= 1e-6);
  }

  // Every atom at the seed velocity with no repulsion: free motion.
  ParticleState same(4, 1);
  for (std::size_t i = 0; i < 4; ++i) {
    same.x(i, 0) = static_cast<double>(i);
    same.v(i, 0) = 0.4;
  }
  const auto free_traj = integrate(same, linear_model(1), cfg);
  const std::vector<double> xs{1.5}, vs{0.4};
  const auto free_path = flow_characteristic(free_traj, linear_model(1), xs, vs, cfg, 0.0, 1.0);
  for (const auto& p : free_path) {
    CHECK(p.v[0] == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(p.x[0] == doctest::Approx(1.5 + 0.4 * p.t).epsilon(1e-14));
  }

  CHECK_THROWS_AS(flow_characteristic(traj, model, x0, v0, cfg, 0.0, 2.0), DomainError);
}
