#include <doctest.h>

#include <cmath>
#include <random>

#include "flockkin/errors.hpp"
#include "flockkin/model.hpp"

using namespace flockkin;

namespace {

ModelSpec base_model(double phi, double f) {
  ModelSpec m;
  m.dimension = 2;
  m.kernel = KernelSpec::constant(phi);
  m.phi_star = phi;
  m.f_star = f;
  if (f > 0) m.repulsion = RepulsionSpec::saturated(f, 1.0);
  return m;
}

}  // namespace

TEST_CASE("kernel values") {
  CHECK(eval_phi(KernelSpec::constant(1.0), 7.3) == 1.0);
  CHECK(eval_phi(KernelSpec::cucker_smale(1.0, 1.0), 0.0) == 1.0);
  CHECK(eval_phi(KernelSpec::cucker_smale(1.0, 1.0), 1.0) == doctest::Approx(0.5).epsilon(1e-15));
  const auto cs = KernelSpec::cucker_smale(2.0, 0.3);
  for (double r = 0.0; r < 1e4; r = 2 * r + 0.1) {
    const double p = eval_phi(cs, r);
    CHECK(std::isfinite(p));
    CHECK(p > 0.0);
    CHECK(p == doctest::Approx(2.0 * std::pow(1 + r * r, -0.3)).epsilon(1e-14));
  }
  CHECK(kernel_min_on_ball(KernelSpec::cucker_smale(1.0, 1.0), 10.0) == doctest::Approx(1.0 / 101.0));
  CHECK(kernel_min_on_ball(KernelSpec::constant(0.7), 1e6) == 0.7);
  CHECK_THROWS_AS(KernelSpec::cucker_smale(-1.0, 1.0).validate(), ValidationError);
}

TEST_CASE("coupling values and properties") {
  const std::vector<double> v{2.0, -1.0};
  CHECK(eval_g(CouplingSpec::linear(), v) == v);
  const std::vector<double> e{1.0, 0.0};
  CHECK(eval_g(CouplingSpec::power(1.25), e) == e);
  const std::vector<double> z{0.0, 0.0};
  CHECK(eval_g(CouplingSpec::power(1.2), z) == z);
  CHECK(eval_g(CouplingSpec::linear(), z) == z);

  std::mt19937_64 gen(5);
  std::normal_distribution<double> n(0.0, 3.0);
  for (const auto& spec : {CouplingSpec::linear(), CouplingSpec::power(1.1), CouplingSpec::power(1.24)}) {
    for (int k = 0; k < 1000; ++k) {
      const std::vector<double> w{n(gen), n(gen), n(gen)};
      const std::vector<double> mw{-w[0], -w[1], -w[2]};
      const auto g = eval_g(spec, w), gm = eval_g(spec, mw);
      double dot = 0.0, norm2 = 0.0;
      for (int c = 0; c < 3; ++c) {
        CHECK(g[c] + gm[c] == 0.0);
        dot += g[c] * w[c];
        norm2 += w[c] * w[c];
      }
      CHECK(dot - std::pow(norm2, spec.exponent()) >= -1e-12 * std::max(1.0, dot));
    }
  }
  CHECK_THROWS_AS(CouplingSpec::power(1.25).validate(), ValidationError);
  CHECK_THROWS_AS(CouplingSpec::power(0.9).validate(), ValidationError);
}

TEST_CASE("repulsion values and bound") {
  const std::vector<double> x{1.0, 1.0};
  CHECK(eval_repulsion(RepulsionSpec::zero(), x) == std::vector<double>{0.0, 0.0});
  CHECK(eval_repulsion(RepulsionSpec::saturated(1.0, 1.0), std::vector<double>{0.0, 0.0, 0.0}) ==
        std::vector<double>{0.0, 0.0, 0.0});
  const auto f = eval_repulsion(RepulsionSpec::saturated(2.0, 0.01), std::vector<double>{3.0, 4.0});
  // 2 * (3, 4) / sqrt(25.01)
  CHECK(f[0] == doctest::Approx(1.19976).epsilon(1e-5));
  CHECK(f[1] == doctest::Approx(1.59968).epsilon(1e-5));
  CHECK(f[0] == doctest::Approx(6.0 / std::sqrt(25.01)).epsilon(1e-15));

  const auto sat = RepulsionSpec::saturated(0.8, 0.05);
  std::mt19937_64 gen(9);
  std::normal_distribution<double> n(0.0, 50.0);
  for (int k = 0; k < 1000; ++k) {
    const auto r = eval_repulsion(sat, std::vector<double>{n(gen), n(gen)});
    CHECK(std::hypot(r[0], r[1]) < sat.bound());
  }
}

TEST_CASE("cstar") {
  CHECK(cstar(base_model(1.0, 0.0)) == doctest::Approx(2.0));
  CHECK(cstar(base_model(1.0, std::sqrt(2.0) * 0.5)) == doctest::Approx(1.0).epsilon(1e-14));
  auto m = base_model(0.5, 0.0);
  m.coupling = CouplingSpec::power(1.2);
  CHECK(cstar(m) == doctest::Approx(1.14870).epsilon(1e-5));
  CHECK(cstar(m) == doctest::Approx(std::pow(2.0, 1.2) * 0.5).epsilon(1e-15));
  CHECK(repulsion_threshold(base_model(1.0, 0.0)) == doctest::Approx(std::sqrt(2.0)));
  CHECK_THROWS_AS(cstar(base_model(1.0, 1.5)), ValidationError);
  CHECK_THROWS_AS(base_model(1.0, 1.5).validate(), ValidationError);
}

TEST_CASE("assumption checker") {
  const auto ok = check_assumptions(base_model(1.0, 0.0), 64, 3.0, 1);
  CHECK(ok.all_pass());
  CHECK(ok.cstar == doctest::Approx(2.0));

  auto bad = base_model(1.0, 0.0);
  bad.repulsion = RepulsionSpec::saturated(3.0, 1.0);
  bad.f_star = 3.0;
  const auto rep = check_assumptions(bad, 64, 3.0, 1);
  CHECK_FALSE(rep.all_pass());
  CHECK_FALSE(rep.at("A3-smallness").pass);
  CHECK(std::isnan(rep.cstar));

  ModelSpec cs;
  cs.dimension = 2;
  cs.kernel = KernelSpec::cucker_smale(1.0, 1.0);
  cs.phi_star = 1.0 / 101.0;
  const auto lower = check_assumptions(cs, 128, 10.0, 3);
  CHECK(lower.phi_min == doctest::Approx(1.0 / 101.0).epsilon(1e-9));
  CHECK(lower.at("A3-lower").pass);

  // A declared Phi* above the sampled minimum is refuted.
  cs.phi_star = 0.5;
  CHECK_FALSE(check_assumptions(cs, 128, 10.0, 3).at("A3-lower").pass);

  // Deterministic in the seed.
  const auto a = check_assumptions(bad, 32, 2.0, 77), b = check_assumptions(bad, 32, 2.0, 77);
  CHECK(a.force_max == b.force_max);
  CHECK(a.growth_constant == b.growth_constant);
}

TEST_CASE("describe is stable and distinguishes models") {
  CHECK(describe(base_model(1.0, 0.0)) == describe(base_model(1.0, 0.0)));
  CHECK(describe(base_model(1.0, 0.0)) != describe(base_model(0.9, 0.0)));
}
