#include "flockkin/diagnostics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "flockkin/errors.hpp"
#include "flockkin/rng.hpp"

namespace flockkin {

// ---------------------------------------------------------------------------
// Envelopes

double DecayEnvelope::B() const { return std::pow(g0, 1.0 - alpha); }

double DecayEnvelope::A() const { return (alpha - 1.0) * cstar; }

void DecayEnvelope::validate() const {
  if (!(cstar > 0.0) || !std::isfinite(cstar)) throw ValidationError("DecayEnvelope: cstar must be positive");
  if (!(g0 >= 0.0) || !std::isfinite(g0)) throw ValidationError("DecayEnvelope: g0 must be non-negative");
  if (!(alpha >= 1.0) || !std::isfinite(alpha)) throw ValidationError("DecayEnvelope: alpha must be >= 1");
}

double envelope_value(const DecayEnvelope& env, double t) {
  env.validate();
  if (t < 0.0) throw DomainError("envelope_value: t must be non-negative");
  if (t == 0.0 || env.g0 == 0.0) return env.g0;
  if (env.alpha == 1.0) return env.g0 * std::exp(-env.cstar * t);
  return std::pow(env.B() + env.A() * t, -1.0 / (env.alpha - 1.0));
}

// ---------------------------------------------------------------------------
// Series helpers

namespace {

template <class F>
std::vector<double> collect(const Trajectory& traj, F&& f) {
  std::vector<double> out;
  out.reserve(traj.size());
  for (const auto& s : traj.snapshots) out.push_back(f(s));
  return out;
}

void require_series(std::span<const double> t, std::span<const double> y, const char* who) {
  if (t.empty()) throw DomainError(std::string(who) + ": empty trajectory");
  if (t.size() != y.size()) throw DomainError(std::string(who) + ": series length mismatch");
}

double diameter(const ParticleState& s, bool positions) {
  const std::size_t n = s.size(), d = s.dim();
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double r2 = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double diff = positions ? s.x(i, k) - s.x(j, k) : s.v(i, k) - s.v(j, k);
        r2 += diff * diff;
      }
      best = std::max(best, r2);
    }
  }
  return std::sqrt(best);
}

}  // namespace

std::vector<double> snapshot_times(const Trajectory& traj) {
  return collect(traj, [](const Snapshot& s) { return s.time(); });
}
std::vector<double> gf_series(const Trajectory& traj) {
  return collect(traj, [](const Snapshot& s) { return s.moments.Gf; });
}
std::vector<double> gamma_series(const Trajectory& traj) {
  return collect(traj, [](const Snapshot& s) { return s.moments.Gamma; });
}
std::vector<double> support_series(const Trajectory& traj) {
  return collect(traj, [](const Snapshot& s) { return s.moments.support_radius; });
}

double observed_position_diameter(const Trajectory& traj) {
  if (traj.empty()) throw DomainError("observed_position_diameter: empty trajectory");
  double dx = 0.0, dv = 0.0, gap = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    dx = std::max(dx, diameter(traj.snapshots[k].state, true));
    dv = std::max(dv, diameter(traj.snapshots[k].state, false));
    if (k > 0) gap = std::max(gap, traj.snapshots[k].time() - traj.snapshots[k - 1].time());
  }
  return dx + dv * gap;
}

DecayEnvelope observed_envelope(const Trajectory& traj, const ModelSpec& model) {
  ModelSpec observed = model;
  observed.phi_star = kernel_min_on_ball(model.kernel, observed_position_diameter(traj));
  observed.f_star = model.repulsion.bound();
  DecayEnvelope env;
  env.alpha = model.alpha();
  env.cstar = cstar(observed);
  env.g0 = traj.front().moments.Gf;
  return env;
}

// ---------------------------------------------------------------------------
// Verdicts

VerdictReport verify_decay(const Trajectory& traj, const DecayEnvelope& env, double rel_tol) {
  if (traj.empty()) throw DomainError("verify_decay: empty trajectory");
  const auto t = snapshot_times(traj);
  const auto gf = gf_series(traj);
  return verify_decay(t, gf, env, rel_tol);
}

VerdictReport verify_decay(std::span<const double> t, std::span<const double> gf, const DecayEnvelope& env,
                           double rel_tol) {
  require_series(t, gf, "verify_decay");
  env.validate();
  VerdictReport rep;
  rep.name = "decay";
  rep.tolerance = rel_tol;
  rep.worst_margin = std::numeric_limits<double>::infinity();
  const double t0 = t.front();
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double bound = envelope_value(env, t[k] - t0);
    double margin;
    if (env.g0 == 0.0)
      margin = -gf[k];
    else if (bound > 0.0)
      margin = (bound - gf[k]) / bound;
    else
      margin = gf[k] == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
    if (!std::isfinite(gf[k])) margin = -std::numeric_limits<double>::infinity();
    rep.series.push_back({t[k], gf[k], bound});
    if (margin < rep.worst_margin) {
      rep.worst_margin = margin;
      rep.witness_time = t[k];
    }
  }
  rep.pass = rep.worst_margin >= -rel_tol;
  rep.detail = env.g0 == 0.0 ? "g0 = 0: absolute check Gf <= tolerance" : "relative check Gf <= envelope (1 + tolerance)";
  return rep;
}

VerdictReport verify_gamma_bound(const Trajectory& traj, double window, double plateau_fraction) {
  if (traj.empty()) throw DomainError("verify_gamma_bound: empty trajectory");
  const auto t = snapshot_times(traj);
  const auto g = gamma_series(traj);
  return verify_gamma_bound(t, g, window, plateau_fraction);
}

VerdictReport verify_gamma_bound(std::span<const double> t, std::span<const double> gamma, double window,
                                 double plateau_fraction) {
  require_series(t, gamma, "verify_gamma_bound");
  if (!(window > 0.0)) throw DomainError("verify_gamma_bound: window must be positive");
  const double t_last = t.back();
  if (t_last - t.front() < 2.0 * window)
    throw DomainError("verify_gamma_bound: trajectory shorter than two windows");

  VerdictReport rep;
  rep.name = "gamma";
  rep.tolerance = 0.0;
  bool finite = true;
  double sup = 0.0, last_max = -std::numeric_limits<double>::infinity();
  double prev_max = last_max, witness = t_last;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (!std::isfinite(gamma[k])) finite = false;
    sup = std::max(sup, gamma[k]);
    if (t[k] > t_last - window) {
      if (gamma[k] > last_max) {
        last_max = gamma[k];
        witness = t[k];
      }
    } else if (t[k] > t_last - 2.0 * window) {
      prev_max = std::max(prev_max, gamma[k]);
    }
  }
  if (prev_max == -std::numeric_limits<double>::infinity())
    throw DomainError("verify_gamma_bound: no snapshot inside the previous window");
  const double increment = last_max - prev_max;
  const double threshold = prev_max + plateau_fraction * sup;
  for (std::size_t k = 0; k < t.size(); ++k) rep.series.push_back({t[k], gamma[k], threshold});
  if (!finite) {
    rep.worst_margin = -std::numeric_limits<double>::infinity();
    rep.detail = "Gamma is not finite";
  } else {
    rep.worst_margin = sup > 0.0 ? plateau_fraction - increment / sup : plateau_fraction;
    rep.detail = "sup Gamma = " + std::to_string(sup) + ", trailing increment = " + std::to_string(increment);
  }
  rep.witness_time = witness;
  rep.pass = rep.worst_margin >= -rep.tolerance;
  return rep;
}

double support_envelope(double R0, double C, double s) {
  const double g = std::expm1(C * s);
  return R0 * (g + 1.0) + C * std::sqrt(std::max(g, 0.0));
}

SupportFit fit_support_envelope(const Trajectory& traj, double c_cap) {
  const auto t = snapshot_times(traj);
  const auto r = support_series(traj);
  return fit_support_envelope(t, r, c_cap);
}

SupportFit fit_support_envelope(std::span<const double> t, std::span<const double> radius, double c_cap) {
  require_series(t, radius, "fit_support_envelope");
  if (!(c_cap > 0.0)) throw DomainError("fit_support_envelope: c_cap must be positive");
  SupportFit fit;
  fit.R0 = radius.front();
  const double t0 = t.front();
  auto dominates = [&](double C) {
    for (std::size_t k = 0; k < t.size(); ++k) {
      if (!std::isfinite(radius[k])) return false;
      const double env = support_envelope(fit.R0, C, t[k] - t0);
      if (radius[k] > env * (1.0 + 1e-12)) return false;
    }
    return true;
  };

  VerdictReport& rep = fit.report;
  rep.name = "support";
  rep.tolerance = 0.0;
  if (dominates(0.0)) {
    fit.C = 0.0;
  } else if (!dominates(c_cap)) {
    fit.C = std::numeric_limits<double>::infinity();
  } else {
    double lo = 0.0, hi = c_cap;
    while (hi - lo > 1e-6 * hi) {
      const double mid = 0.5 * (lo + hi);
      (dominates(mid) ? hi : lo) = mid;
    }
    fit.C = hi;
  }

  const double C = std::isfinite(fit.C) ? fit.C : c_cap;
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double env = support_envelope(fit.R0, C, t[k] - t0);
    rep.series.push_back({t[k], radius[k], env});
    const double slack = env > 0.0 ? (env - radius[k]) / env : 0.0;
    if (slack < worst) {
      worst = slack;
      rep.witness_time = t[k];
    }
  }
  rep.worst_margin = std::isfinite(fit.C) ? (c_cap - fit.C) / c_cap : -std::numeric_limits<double>::infinity();
  rep.pass = rep.worst_margin >= 0.0;
  rep.detail = "R0 = " + std::to_string(fit.R0) + ", fitted C = " + std::to_string(fit.C) +
               ", C cap = " + std::to_string(c_cap);
  return fit;
}

// ---------------------------------------------------------------------------
// Studies

ParticleState perturb_velocities(const ParticleState& state, double perturbation, std::uint64_t seed) {
  if (!(perturbation >= 0.0)) throw DomainError("perturb_velocities: perturbation must be non-negative");
  ParticleState out = state;
  if (perturbation == 0.0) return out;
  std::vector<double> delta(state.dim());
  for (std::size_t i = 0; i < state.size(); ++i) {
    const CounterRng rng(seed, i);
    uniform_in_ball(rng, 0, perturbation, delta);
    for (std::size_t k = 0; k < state.dim(); ++k) out.v(i, k) += delta[k];
  }
  return out;
}

namespace {

const Snapshot& snapshot_at(const Trajectory& traj, double t) {
  const Snapshot* best = nullptr;
  for (const auto& s : traj.snapshots)
    if (!best || std::abs(s.time() - t) < std::abs(best->time() - t)) best = &s;
  if (!best || std::abs(best->time() - t) > 1e-9 * std::max(1.0, std::abs(t)))
    throw DomainError("no snapshot recorded at t = " + std::to_string(t));
  return *best;
}

double measure_distance(const ParticleState& a, const ParticleState& b, const GroundMetric& metric) {
  return w1(DiscreteMeasure::from_empirical(from_particles(a)), DiscreteMeasure::from_empirical(from_particles(b)),
            metric)
      .distance;
}

std::vector<double> sorted_times(std::span<const double> times) {
  std::vector<double> ts(times.begin(), times.end());
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  for (double t : ts)
    if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("study times must be finite and non-negative");
  return ts;
}

Trajectory run_to(const ParticleState& start, const ModelSpec& model, IntegratorConfig config,
                  const std::vector<double>& times) {
  config.t_end = start.time + times.back();
  std::vector<double> marks;
  for (double t : times) marks.push_back(start.time + t);
  return integrate(start, model, config, marks);
}

}  // namespace

StabilityResult stability_study(const InitialSpec& f0, double perturbation, const ModelSpec& model,
                                const IntegratorConfig& config, std::span<const double> times,
                                const GroundMetric& metric, std::uint64_t seed) {
  return stability_study(sample_initial(f0), perturbation, model, config, times, metric, seed);
}

StabilityResult stability_study(const ParticleState& f_start, double perturbation, const ModelSpec& model,
                                const IntegratorConfig& config, std::span<const double> times,
                                const GroundMetric& metric, std::uint64_t seed) {
  if (!(perturbation >= 0.0)) throw DomainError("stability_study: perturbation must be non-negative");
  const auto ts = sorted_times(times);
  if (ts.empty() || ts.front() != 0.0) throw DomainError("stability_study: times must include 0");

  const ParticleState g_start = perturb_velocities(f_start, perturbation, seed);
  const Trajectory f = run_to(f_start, model, config, ts);
  const Trajectory g = run_to(g_start, model, config, ts);

  StabilityResult res;
  res.perturbation = perturbation;
  double running = 0.0;
  for (double t : ts) {
    StabilityPoint p;
    p.t = t;
    p.distance = measure_distance(snapshot_at(f, f_start.time + t).state, snapshot_at(g, g_start.time + t).state,
                                  metric);
    if (t == 0.0) res.initial_distance = p.distance;
    if (res.initial_distance > 0.0)
      p.ratio = p.distance / res.initial_distance;
    else
      p.ratio = p.distance == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    running = std::max(running, p.ratio);
    p.envelope = running;
    res.series.push_back(p);
  }
  StabilityResult single[1] = {res};
  res.fitted_rate = fit_growth_rate(single);
  return res;
}

double fit_growth_rate(std::span<const StabilityResult> results) {
  double c = 0.0;
  for (const auto& r : results)
    for (const auto& p : r.series)
      if (p.t > 0.0 && p.ratio > 0.0) c = std::max(c, std::log(p.ratio) / p.t);
  return c;
}

std::vector<double> ConvergenceTable::column(double t) const {
  std::vector<double> out;
  for (const auto& row : rows)
    if (row.t == t) out.push_back(row.distance);
  return out;
}

ConvergenceTable meanfield_study(const InitialSpec& family, std::span<const std::size_t> n_list,
                                 const ModelSpec& model, const IntegratorConfig& config,
                                 std::span<const double> times, Pairing pairing,
                                 std::span<const std::uint64_t> seeds, const GroundMetric& metric) {
  if (n_list.size() < 3) throw DomainError("meanfield_study: need at least three values of N");
  for (std::size_t k = 1; k < n_list.size(); ++k)
    if (n_list[k] <= n_list[k - 1]) throw DomainError("meanfield_study: N list must be strictly increasing");
  if (n_list.front() == 0) throw DomainError("meanfield_study: N must be positive");
  if (seeds.empty()) throw DomainError("meanfield_study: no seeds");
  const auto ts = sorted_times(times);
  if (ts.empty()) throw DomainError("meanfield_study: no evaluation times");

  const std::size_t levels = n_list.size();
  const std::size_t rows_per_t = pairing == Pairing::against_largest ? levels : levels - 1;
  ConvergenceTable table;
  table.reference = pairing == Pairing::against_largest
                        ? "against_largest: W1(mu_t^N, mu_t^" + std::to_string(n_list.back()) + ")"
                        : "consecutive: W1(mu_t^N_k, mu_t^N_{k+1}) reported at N_k";
  for (double t : ts)
    for (std::size_t k = 0; k < rows_per_t; ++k) {
      ConvergenceRow row;
      row.n = n_list[k];
      row.t = t;
      table.rows.push_back(row);
    }

  for (std::uint64_t seed : seeds) {
    std::vector<Trajectory> runs;
    for (std::size_t n : n_list) {
      InitialSpec spec = family;
      spec.n = n;
      spec.seed = seed;
      runs.push_back(run_to(sample_initial(spec), model, config, ts));
    }
    for (std::size_t ti = 0; ti < ts.size(); ++ti) {
      for (std::size_t k = 0; k < rows_per_t; ++k) {
        const std::size_t other = pairing == Pairing::against_largest ? levels - 1 : k + 1;
        const auto begin = std::chrono::steady_clock::now();
        double dist = 0.0;
        if (other != k) {
          const auto& a = snapshot_at(runs[k], runs[k].front().time() + ts[ti]).state;
          const auto& b = snapshot_at(runs[other], runs[other].front().time() + ts[ti]).state;
          dist = measure_distance(a, b, metric);
        }
        const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - begin).count();
        auto& row = table.rows[ti * rows_per_t + k];
        row.per_seed.push_back(dist);
        row.wall_time += elapsed;
      }
    }
  }
  for (auto& row : table.rows) {
    double s = 0.0;
    for (double d : row.per_seed) s += d;
    row.distance = s / static_cast<double>(row.per_seed.size());
  }
  return table;
}

std::vector<FlockingPoint> flocking_study(const Trajectory& traj, const GroundMetric& metric) {
  std::vector<FlockingPoint> out;
  if (traj.empty()) return out;
  const std::vector<double> v_ref = traj.front().moments.V1;
  for (const auto& s : traj.snapshots) {
    FlockingPoint p;
    p.t = s.time();
    p.distance = dirac_flocking_distance(from_particles(s.state), v_ref, metric);
    p.sqrt_gf = std::sqrt(std::max(s.moments.Gf, 0.0));
    out.push_back(p);
  }
  return out;
}

double lipschitz_probe(const EmpiricalMeasure& mu, const ModelSpec& model, double ball_radius,
                       std::size_t sample_budget, std::uint64_t seed) {
  mu.validate();
  if (sample_budget < 2) throw DomainError("lipschitz_probe: budget must be >= 2");
  if (!(ball_radius > 0.0) || !std::isfinite(ball_radius))
    throw DomainError("lipschitz_probe: radius must be positive");
  const std::size_t d = mu.dim;
  constexpr double smallest_scale = 1e-6;
  constexpr double coordinate_step = 1e-3;

  std::vector<double> u1(2 * d), u2(2 * d), p1(2 * d), p2(2 * d);
  auto ratio = [&](const std::vector<double>& a, const std::vector<double>& b) {
    const std::span<const double> ax(a.data(), d), av(a.data() + d, d), bx(b.data(), d), bv(b.data() + d, d);
    const auto ha = field_H(mu, ax, av, model);
    const auto hb = field_H(mu, bx, bv, model);
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < d; ++k) num += (ha[k] - hb[k]) * (ha[k] - hb[k]);
    for (std::size_t k = 0; k < 2 * d; ++k) den += (a[k] - b[k]) * (a[k] - b[k]);
    return den > 0.0 ? std::sqrt(num / den) : 0.0;
  };

  double best = 0.0;
  for (std::size_t pair = 0; pair < sample_budget; ++pair) {
    const CounterRng rng(seed, pair);
    uniform_in_ball(rng, 0, 1.0, u1);
    uniform_in_ball(rng, 1000, 1.0, u2);
    for (double scale = ball_radius; scale >= smallest_scale; scale *= 0.5) {
      for (std::size_t k = 0; k < 2 * d; ++k) {
        p1[k] = scale * u1[k];
        p2[k] = scale * u2[k];
      }
      best = std::max(best, ratio(p1, p2));
      // Coordinate pair: p1 nudged along one axis towards the origin plane.
      const std::size_t axis = pair % (2 * d);
      p2 = p1;
      p2[axis] += (p1[axis] > 0.0 ? -1.0 : 1.0) * coordinate_step * scale;
      best = std::max(best, ratio(p1, p2));
    }
  }
  return best;
}

}  // namespace flockkin
