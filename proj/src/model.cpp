#include "flockkin/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "flockkin/errors.hpp"
#include "flockkin/rng.hpp"

namespace flockkin {

namespace {

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double c) { return std::isfinite(c); });
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double c : v) s += c * c;
  return s;
}

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

}  // namespace

KernelSpec KernelSpec::constant(double level) {
  KernelSpec s;
  s.preset = KernelPreset::constant;
  s.level = level;
  return s;
}

KernelSpec KernelSpec::cucker_smale(double amplitude, double beta) {
  KernelSpec s;
  s.preset = KernelPreset::cucker_smale;
  s.amplitude = amplitude;
  s.beta = beta;
  return s;
}

void KernelSpec::validate() const {
  if (preset == KernelPreset::constant) {
    if (!(level > 0.0) || !std::isfinite(level))
      throw ValidationError("kernel: constant level must be positive and finite");
  } else {
    if (!(amplitude > 0.0) || !std::isfinite(amplitude))
      throw ValidationError("kernel: amplitude must be positive and finite");
    if (!(beta >= 0.0) || !std::isfinite(beta))
      throw ValidationError("kernel: beta must be non-negative and finite");
  }
}

double eval_phi(const KernelSpec& spec, double r) {
  if (!std::isfinite(r) || r < 0.0) throw DomainError("eval_phi: r must be finite and >= 0");
  return eval_phi_sq(spec, r * r);
}

double kernel_min_on_ball(const KernelSpec& spec, double radius) {
  if (!std::isfinite(radius) || radius < 0.0)
    throw DomainError("kernel_min_on_ball: radius must be finite and >= 0");
  return eval_phi_sq(spec, radius * radius);
}

CouplingSpec CouplingSpec::linear() { return {}; }

CouplingSpec CouplingSpec::power(double alpha) {
  CouplingSpec s;
  s.preset = CouplingPreset::power;
  s.alpha = alpha;
  return s;
}

void CouplingSpec::validate() const {
  const double a = exponent();
  if (!(a >= 1.0 && a < 1.25))
    throw ValidationError("coupling: alpha must lie in [1, 5/4), got " + std::to_string(a));
}

std::vector<double> eval_g(const CouplingSpec& spec, std::span<const double> v) {
  if (!all_finite(v)) throw DomainError("eval_g: non-finite input");
  const double s = coupling_scale(spec, norm2(v));
  std::vector<double> out(v.begin(), v.end());
  for (double& c : out) c *= s;
  return out;
}

RepulsionSpec RepulsionSpec::zero() { return {}; }

RepulsionSpec RepulsionSpec::saturated(double cap, double softening) {
  RepulsionSpec s;
  s.preset = RepulsionPreset::saturated;
  s.cap = cap;
  s.softening = softening;
  return s;
}

void RepulsionSpec::validate() const {
  if (preset == RepulsionPreset::zero) return;
  if (!(cap >= 0.0) || !std::isfinite(cap))
    throw ValidationError("repulsion: cap must be non-negative and finite");
  if (!(softening > 0.0) || !std::isfinite(softening))
    throw ValidationError("repulsion: softening must be positive and finite");
}

std::vector<double> eval_repulsion(const RepulsionSpec& spec, std::span<const double> x) {
  if (!all_finite(x)) throw DomainError("eval_repulsion: non-finite input");
  const double s = repulsion_scale(spec, norm2(x));
  std::vector<double> out(x.begin(), x.end());
  for (double& c : out) c *= s;
  return out;
}

double repulsion_threshold(const ModelSpec& spec) {
  return std::pow(2.0, spec.alpha() - 0.5) * spec.phi_star * spec.g_star;
}

void ModelSpec::validate() const {
  if (dimension < 1) throw ValidationError("model: dimension must be >= 1");
  kernel.validate();
  coupling.validate();
  repulsion.validate();
  if (!(phi_star > 0.0) || !std::isfinite(phi_star))
    throw ValidationError("model: phi_star must be positive");
  if (!(g_star > 0.0)) throw ValidationError("model: g_star must be positive");
  if (!(f_star >= 0.0) || !std::isfinite(f_star))
    throw ValidationError("model: f_star must be non-negative");
  const double threshold = repulsion_threshold(*this);
  if (!(f_star < threshold)) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "model: F* = %.6g violates F* < 2^(alpha-1/2) Phi* G* = %.6g",
                  f_star, threshold);
    throw ValidationError(buf);
  }
}

double cstar(const ModelSpec& spec) {
  const double c = std::pow(2.0, spec.alpha()) * spec.phi_star * spec.g_star -
                   std::sqrt(2.0) * spec.f_star;
  if (!(c > 0.0) || !(spec.f_star < repulsion_threshold(spec))) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "cstar: C* = %.6g is not positive (smallness condition fails)", c);
    throw ValidationError(buf);
  }
  return c;
}

std::string describe(const ModelSpec& spec) {
  char buf[512];
  const char* kernel = spec.kernel.preset == KernelPreset::constant ? "constant" : "cucker_smale";
  const char* coupling = spec.coupling.preset == CouplingPreset::linear ? "linear" : "power";
  const char* repulsion = spec.repulsion.preset == RepulsionPreset::zero ? "zero" : "saturated";
  std::snprintf(buf, sizeof buf,
                "d=%zu;kernel=%s(%.17g,%.17g,%.17g);coupling=%s(%.17g);repulsion=%s(%.17g,%.17g);"
                "phi*=%.17g;g*=%.17g;f*=%.17g",
                spec.dimension, kernel, spec.kernel.level, spec.kernel.amplitude, spec.kernel.beta,
                coupling, spec.coupling.exponent(), repulsion, spec.repulsion.cap,
                spec.repulsion.softening, spec.phi_star, spec.g_star, spec.f_star);
  return buf;
}

// ---------------------------------------------------------------------------

bool AssumptionReport::all_pass() const noexcept {
  return std::all_of(checks.begin(), checks.end(), [](const AssumptionCheck& c) { return c.pass; });
}

const AssumptionCheck& AssumptionReport::at(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return c;
  throw DomainError("assumption report has no entry '" + name + "'");
}

AssumptionReport check_assumptions(const ModelSpec& spec, std::size_t sample_budget, double radius,
                                   std::uint64_t seed) {
  if (sample_budget < 1) throw DomainError("check_assumptions: sample_budget must be >= 1");
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw DomainError("check_assumptions: radius must be positive");

  const std::size_t d = spec.dimension;
  const double alpha = spec.alpha();
  const double inf = std::numeric_limits<double>::infinity();

  // Sample points: x and v uniform in B_radius, plus the centre and a boundary point.
  std::vector<std::vector<double>> xs, vs;
  xs.reserve(sample_budget + 2);
  vs.reserve(sample_budget + 2);
  for (std::size_t k = 0; k < sample_budget; ++k) {
    const CounterRng rng(seed, k);
    std::vector<double> x(d), v(d);
    uniform_in_ball(rng, 0, radius, x);
    uniform_in_ball(rng, 1000, radius, v);
    xs.push_back(std::move(x));
    vs.push_back(std::move(v));
  }
  std::vector<double> edge(d, 0.0);
  edge[0] = radius;
  xs.emplace_back(d, 0.0);
  vs.push_back(edge);
  xs.push_back(edge);
  vs.push_back(edge);

  // Radial grid including both endpoints; Phi is radial so this covers the ball.
  const std::size_t grid = std::max<std::size_t>(sample_budget, 2);
  std::vector<double> radii(grid);
  for (std::size_t j = 0; j < grid; ++j)
    radii[j] = radius * static_cast<double>(j) / static_cast<double>(grid - 1);

  AssumptionReport report;
  report.radius = radius;
  report.samples = sample_budget;

  // A1: finite-difference Lipschitz ratios on pairs at distance >= 1e-6.
  {
    double phi_lip = 0.0, g_lip = 0.0, f_lip = 0.0;
    std::vector<double> worst;
    const double step = std::max(1e-6, 1e-5 * radius);
    auto consider_pair = [&](std::span<const double> a, std::span<const double> b,
                             std::span<const double> va, std::span<const double> vb) {
      const double dx = distance(a, b);
      if (dx >= 1e-6) {
        const double phi_ratio =
            std::abs(eval_phi_sq(spec.kernel, norm2(a)) - eval_phi_sq(spec.kernel, norm2(b))) / dx;
        const double sa = norm2(a), sb = norm2(b);
        const double f_ratio = std::abs(sa - sb) >= 1e-6
                                   ? std::abs(repulsion_scale(spec.repulsion, sa) -
                                              repulsion_scale(spec.repulsion, sb)) /
                                         std::abs(sa - sb)
                                   : 0.0;
        if (phi_ratio > phi_lip) phi_lip = phi_ratio;
        if (f_ratio > f_lip) f_lip = f_ratio;
      }
      const double dv = distance(va, vb);
      if (dv >= 1e-6) {
        const auto ga = eval_g(spec.coupling, va);
        const auto gb = eval_g(spec.coupling, vb);
        const double g_ratio = distance(ga, gb) / dv;
        if (g_ratio > g_lip) {
          g_lip = g_ratio;
          worst.assign(va.begin(), va.end());
        }
      }
    };
    for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
      consider_pair(xs[k], xs[k + 1], vs[k], vs[k + 1]);
      auto xp = xs[k];
      auto vp = vs[k];
      xp[k % d] += step;
      vp[k % d] += step;
      consider_pair(xs[k], xp, vs[k], vp);
    }
    const double worst_ratio = std::max({phi_lip, g_lip, f_lip});
    AssumptionCheck c;
    c.name = "A1";
    c.observed = worst_ratio;
    c.bound = inf;
    c.pass = std::isfinite(worst_ratio);
    c.witness = worst;
    char buf[160];
    std::snprintf(buf, sizeof buf, "Lipschitz ratios: Phi %.6g, G %.6g, F %.6g", phi_lip, g_lip,
                  f_lip);
    c.detail = buf;
    report.checks.push_back(std::move(c));
  }

  // A2a: oddness, exact.
  {
    double worst = 0.0;
    std::vector<double> witness;
    for (const auto& v : vs) {
      std::vector<double> neg(v);
      for (double& c : neg) c = -c;
      const auto gp = eval_g(spec.coupling, v);
      const auto gm = eval_g(spec.coupling, neg);
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) s += (gp[k] + gm[k]) * (gp[k] + gm[k]);
      if (std::sqrt(s) > worst || witness.empty()) {
        worst = std::max(worst, std::sqrt(s));
        witness = v;
      }
    }
    report.checks.push_back({"A2a", worst == 0.0, worst, 0.0, witness, "max |G(v) + G(-v)|"});
  }

  // A2b: coercivity G(v).v >= G* |v|^(2 alpha), relative slack 1e-12.
  {
    double worst = inf;
    std::vector<double> witness;
    for (const auto& v : vs) {
      const double n2 = norm2(v);
      if (n2 == 0.0) continue;
      const auto g = eval_g(spec.coupling, v);
      double dot = 0.0;
      for (std::size_t k = 0; k < d; ++k) dot += g[k] * v[k];
      const double target = spec.g_star * std::pow(n2, alpha);
      const double margin = (dot - target) / std::max(1.0, target);
      if (margin < worst) {
        worst = margin;
        witness = v;
      }
    }
    if (!std::isfinite(worst)) worst = 0.0;
    report.checks.push_back({"A2b", worst >= -1e-12, worst, -1e-12, witness,
                             "min (G(v).v - G*|v|^(2 alpha)) / max(1, G*|v|^(2 alpha))"});
  }

  // A3: Phi >= Phi* on the ball, |F(|x|^2) x| <= F*, smallness.
  {
    double phi_min = inf, phi_r = 0.0;
    for (double r : radii) {
      const double p = eval_phi_sq(spec.kernel, r * r);
      if (p < phi_min) {
        phi_min = p;
        phi_r = r;
      }
    }
    for (const auto& x : xs) {
      const double p = eval_phi_sq(spec.kernel, norm2(x));
      if (p < phi_min) {
        phi_min = p;
        phi_r = std::sqrt(norm2(x));
      }
    }
    report.phi_min = phi_min;
    report.checks.push_back({"A3-lower", phi_min > 0.0 && phi_min >= spec.phi_star * (1.0 - 1e-12),
                             phi_min, spec.phi_star, {phi_r},
                             "min Phi(|x|) over |x| <= radius against declared Phi*"});

    double f_max = 0.0;
    std::vector<double> witness(d, 0.0);
    auto consider = [&](std::span<const double> x) {
      const double f = std::sqrt(norm2(x)) * repulsion_scale(spec.repulsion, norm2(x));
      if (f > f_max) {
        f_max = f;
        witness.assign(x.begin(), x.end());
      }
    };
    for (const auto& x : xs) consider(x);
    std::vector<double> ray(d, 0.0);
    for (double r : radii) {
      ray[0] = r;
      consider(ray);
    }
    report.force_max = f_max;
    report.checks.push_back({"A3-force", f_max <= spec.f_star, f_max, spec.f_star, witness,
                             "max |F(|x|^2) x| against declared F*"});

    const double threshold = repulsion_threshold(spec);
    report.checks.push_back({"A3-smallness", spec.f_star < threshold, spec.f_star, threshold, {},
                             "F* < 2^(alpha-1/2) Phi* G*"});
  }

  // A4: linear growth |Phi(|x|) G(v)| <= C (1 + |x| + |v|), fitted C reported.
  {
    double c_fit = 0.0;
    std::vector<double> witness;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      const auto g = eval_g(spec.coupling, vs[k]);
      const double lhs = eval_phi_sq(spec.kernel, norm2(xs[k])) * std::sqrt(norm2(g));
      const double rhs = 1.0 + std::sqrt(norm2(xs[k])) + std::sqrt(norm2(vs[k]));
      if (lhs / rhs > c_fit) {
        c_fit = lhs / rhs;
        witness = xs[k];
        witness.insert(witness.end(), vs[k].begin(), vs[k].end());
      }
    }
    report.growth_constant = c_fit;
    report.checks.push_back({"A4", std::isfinite(c_fit), c_fit, inf, witness,
                             "fitted C in |Phi(|x|) G(v)| <= C (1 + |x| + |v|)"});
  }

  {
    const bool in_range = alpha >= 1.0 && alpha < 1.25;
    report.checks.push_back(
        {"alpha-range", in_range, alpha, 1.25, {}, "alpha in [1, 5/4) for global well-posedness"});
  }

  const double c = std::pow(2.0, alpha) * spec.phi_star * spec.g_star - std::sqrt(2.0) * spec.f_star;
  report.cstar = (spec.f_star < repulsion_threshold(spec) && c > 0.0)
                     ? c
                     : std::numeric_limits<double>::quiet_NaN();
  return report;
}

}  // namespace flockkin
