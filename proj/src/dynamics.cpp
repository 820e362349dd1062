#include "flockkin/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

#include "flockkin/errors.hpp"
#include "flockkin/kinetic.hpp"

namespace flockkin {

// ---------------------------------------------------------------------------
// ParticleState / Trajectory

ParticleState::ParticleState(std::size_t n, std::size_t d, double t)
    : time(t), n_(n), d_(d), pos_(n * d, 0.0), vel_(n * d, 0.0) {}

std::vector<double> ParticleState::position_of(std::size_t i) const {
  std::vector<double> out(d_);
  for (std::size_t k = 0; k < d_; ++k) out[k] = x(i, k);
  return out;
}

std::vector<double> ParticleState::velocity_of(std::size_t i) const {
  std::vector<double> out(d_);
  for (std::size_t k = 0; k < d_; ++k) out[k] = v(i, k);
  return out;
}

void ParticleState::validate() const {
  if (n_ < 1) throw DomainError("ParticleState: need at least one particle");
  if (d_ < 1) throw DomainError("ParticleState: dimension must be >= 1");
  if (!std::isfinite(time)) throw DomainError("ParticleState: non-finite time");
  auto finite = [](double c) { return std::isfinite(c); };
  if (!std::all_of(pos_.begin(), pos_.end(), finite) ||
      !std::all_of(vel_.begin(), vel_.end(), finite))
    throw DomainError("ParticleState: non-finite coordinate");
}

Trajectory Trajectory::until(double t_max) const {
  Trajectory out;
  for (const auto& s : snapshots)
    if (s.time() <= t_max) out.snapshots.push_back(s);
  return out;
}

void IntegratorConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("integrator: dt must be positive");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw DomainError("integrator: t_end must be >= 0");
  if (!(error_tol > 0.0)) throw DomainError("integrator: error_tol must be positive");
  if (max_steps < 1) throw DomainError("integrator: max_steps must be >= 1");
  if (observer_stride < 1) throw DomainError("integrator: observer_stride must be >= 1");
}

// ---------------------------------------------------------------------------
// Alignment measure

double alignment_measure(const ParticleState& state) {
  const std::size_t n = state.size(), d = state.dim();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      for (std::size_t k = 0; k < d; ++k) {
        const double dv = state.v(i, k) - state.v(j, k);
        sum += dv * dv;
      }
    }
  }
  return std::sqrt(sum) / static_cast<double>(n);
}

double alignment_measure_squared_fast(const ParticleState& state) {
  const std::size_t n = state.size(), d = state.dim();
  const double inv_n = 1.0 / static_cast<double>(n);
  double total = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    const auto col = state.v_component(k);
    double mean = 0.0;
    for (double c : col) mean += c;
    mean *= inv_n;
    double acc = 0.0;
    for (double c : col) acc += (c - mean) * (c - mean);
    total += acc;
  }
  return total * inv_n;
}

namespace {

double lambda_power(const ParticleState& state, const ModelSpec& model) {
  if (model.repulsion.preset == RepulsionPreset::zero) return 0.0;
  const double l2 = std::max(0.0, alignment_measure_squared_fast(state));
  const double expo = model.alpha() - 0.5;  // (Lambda^2)^((2 alpha - 1) / 2)
  return expo == 0.5 ? std::sqrt(l2) : std::pow(l2, expo);
}

/// Neumaier-compensated running sum.
struct CompensatedSum {
  double sum = 0.0;
  double comp = 0.0;
  void add(double x) noexcept {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }
  double value() const noexcept { return sum + comp; }
};

constexpr std::size_t kMaxStaticDim = 3;

// Dim = 0 selects the runtime-dimension variant.
template <std::size_t Dim>
void accumulate_row(const ParticleState& s, const ModelSpec& m, double lambda_pow, std::size_t i,
                    std::span<double> out) {
  const std::size_t n = s.size();
  const std::size_t d = Dim == 0 ? s.dim() : Dim;
  constexpr std::size_t cap = Dim == 0 ? 16 : Dim;
  std::array<double, cap> xi{}, vi{}, dx{}, dv{};
  std::array<CompensatedSum, cap> acc{};
  for (std::size_t k = 0; k < d; ++k) {
    xi[k] = s.x(i, k);
    vi[k] = s.v(i, k);
  }
  const KernelSpec& kernel = m.kernel;
  const CouplingSpec& coupling = m.coupling;
  const RepulsionSpec& repulsion = m.repulsion;
  // The diagonal term j == i vanishes: dv = 0 and dx = 0.
  for (std::size_t j = 0; j < n; ++j) {
    double r2 = 0.0, w2 = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      dx[k] = xi[k] - s.x(j, k);
      dv[k] = s.v(j, k) - vi[k];
      r2 += dx[k] * dx[k];
      w2 += dv[k] * dv[k];
    }
    const double align = eval_phi_sq(kernel, r2) * coupling_scale(coupling, w2);
    const double repel = lambda_pow * repulsion_scale(repulsion, r2);
    for (std::size_t k = 0; k < d; ++k) acc[k].add(align * dv[k] + repel * dx[k]);
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t k = 0; k < d; ++k) out[k * n + i] = acc[k].value() * inv_n;
}

template <std::size_t Dim>
void accumulate_all(const ParticleState& s, const ModelSpec& m, double lambda_pow,
                    std::span<double> out, int threads) {
  const auto n = static_cast<std::ptrdiff_t>(s.size());
#pragma omp parallel for schedule(static) num_threads(threads) if (threads > 1)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    accumulate_row<Dim>(s, m, lambda_pow, static_cast<std::size_t>(i), out);
}

}  // namespace

std::vector<double> pairwise_term(const ParticleState& state, const ModelSpec& model, std::size_t i,
                                  std::size_t j, double lambda_pow) {
  const std::size_t d = state.dim();
  std::vector<double> dx(d), dv(d), out(d);
  double r2 = 0.0, w2 = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    dx[k] = state.x(i, k) - state.x(j, k);
    dv[k] = state.v(j, k) - state.v(i, k);
    r2 += dx[k] * dx[k];
    w2 += dv[k] * dv[k];
  }
  const double align = eval_phi_sq(model.kernel, r2) * coupling_scale(model.coupling, w2);
  const double repel = lambda_pow * repulsion_scale(model.repulsion, r2);
  for (std::size_t k = 0; k < d; ++k) out[k] = align * dv[k] + repel * dx[k];
  return out;
}

void accelerations(const ParticleState& state, const ModelSpec& model, std::span<double> out,
                   int threads) {
  if (out.size() != state.size() * state.dim())
    throw DomainError("accelerations: output size mismatch");
  if (state.dim() > 16) throw DomainError("accelerations: dimension above 16 is not supported");
  const double lambda_pow = lambda_power(state, model);
  threads = std::max(threads, 1);
  switch (state.dim()) {
    case 1: accumulate_all<1>(state, model, lambda_pow, out, threads); break;
    case 2: accumulate_all<2>(state, model, lambda_pow, out, threads); break;
    case 3: accumulate_all<3>(state, model, lambda_pow, out, threads); break;
    default: accumulate_all<0>(state, model, lambda_pow, out, threads); break;
  }
  static_assert(kMaxStaticDim == 3);
}

std::vector<double> accelerations(const ParticleState& state, const ModelSpec& model, int threads) {
  std::vector<double> out(state.size() * state.dim());
  accelerations(state, model, out, threads);
  return out;
}

// ---------------------------------------------------------------------------
// Stepper

Stepper::Stepper(const ModelSpec& model, const IntegratorConfig& config)
    : model_(model), config_(config), h_next_(config.dt) {
  config_.validate();
}

void Stepper::rhs(const ParticleState& s, std::span<double> dx, std::span<double> dv) {
  std::copy(s.velocities().begin(), s.velocities().end(), dx.begin());
  accelerations(s, model_, dv, config_.threads);
}

// Assumes k_x_[0], k_v_[0] already hold f(s).
void Stepper::rk4(const ParticleState& s, double h, ParticleState& out) {
  const std::size_t len = s.size() * s.dim();
  for (auto* k : {k_x_, k_v_})
    for (int st = 0; st < 4; ++st) k[st].resize(len);
  if (stage_.size() != s.size() || stage_.dim() != s.dim()) stage_ = ParticleState(s.size(), s.dim());

  const double coef[3] = {0.5 * h, 0.5 * h, h};
  for (int st = 1; st < 4; ++st) {
    auto sx = stage_.positions();
    auto sv = stage_.velocities();
    const auto x0 = s.positions();
    const auto v0 = s.velocities();
    for (std::size_t a = 0; a < len; ++a) {
      sx[a] = x0[a] + coef[st - 1] * k_x_[st - 1][a];
      sv[a] = v0[a] + coef[st - 1] * k_v_[st - 1][a];
    }
    rhs(stage_, k_x_[st], k_v_[st]);
  }
  if (out.size() != s.size() || out.dim() != s.dim()) out = ParticleState(s.size(), s.dim());
  auto ox = out.positions();
  auto ov = out.velocities();
  const auto x0 = s.positions();
  const auto v0 = s.velocities();
  const double w = h / 6.0;
  for (std::size_t a = 0; a < len; ++a) {
    ox[a] = x0[a] + w * (k_x_[0][a] + 2.0 * k_x_[1][a] + 2.0 * k_x_[2][a] + k_x_[3][a]);
    ov[a] = v0[a] + w * (k_v_[0][a] + 2.0 * k_v_[1][a] + 2.0 * k_v_[2][a] + k_v_[3][a]);
  }
  out.time = s.time + h;
}

StepInfo Stepper::advance(ParticleState& state, double t_limit) {
  const double remaining = t_limit - state.time;
  if (!(remaining > 0.0)) throw DomainError("Stepper::advance: t_limit not ahead of state time");
  const std::size_t len = state.size() * state.dim();
  StepInfo info;

  std::vector<double> k1x(len), k1v(len);
  rhs(state, k1x, k1v);

  ParticleState full, half, twice;
  double h = std::min({h_next_, config_.dt, remaining});
  for (;;) {
    const bool clipped = h >= remaining;
    if (clipped) h = remaining;
    if (!clipped && h < config_.dt * 1e-9) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "step underflow at t = %.17g: h = %.3g below dt * 1e-9", state.time,
                    h);
      throw IntegrationError(buf);
    }
    k_x_[0] = k1x;
    k_v_[0] = k1v;
    rk4(state, h, full);
    k_x_[0] = k1x;
    k_v_[0] = k1v;
    rk4(state, 0.5 * h, half);
    k_x_[0].resize(len);
    k_v_[0].resize(len);
    rhs(half, k_x_[0], k_v_[0]);
    rk4(half, 0.5 * h, twice);

    double err = 0.0;
    const auto fx = full.positions(), fv = full.velocities();
    const auto tx = twice.positions(), tv = twice.velocities();
    for (std::size_t a = 0; a < len; ++a) {
      err = std::max(err, std::abs(tx[a] - fx[a]) / std::max(1.0, std::abs(tx[a])));
      err = std::max(err, std::abs(tv[a] - fv[a]) / std::max(1.0, std::abs(tv[a])));
    }
    err /= 15.0;
    if (!std::isfinite(err)) {
      throw IntegrationError("non-finite state during step");
    }

    if (err <= config_.error_tol) {
      const double t_new = clipped ? t_limit : state.time + h;
      state = std::move(twice);
      state.time = t_new;
      const double grow = err == 0.0 ? 5.0 : std::min(5.0, 0.9 * std::pow(config_.error_tol / err, 0.2));
      if (!clipped || grow < 1.0) h_next_ = std::min(config_.dt, h * std::max(grow, 0.2));
      info.h = h;
      info.error = err;
      return info;
    }
    h *= std::max(0.1, 0.9 * std::pow(config_.error_tol / err, 0.2));
    ++info.rejected;
  }
}

ParticleState step(const ParticleState& state, const ModelSpec& model,
                   const IntegratorConfig& config) {
  state.validate();
  Stepper stepper(model, config);
  ParticleState out = state;
  stepper.advance(out, state.time + config.dt);
  return out;
}

Snapshot make_snapshot(const ParticleState& state) {
  Snapshot s;
  s.state = state;
  s.moments = moments(from_particles(state));
  s.lambda = alignment_measure(state);
  return s;
}

Trajectory integrate(const ParticleState& state, const ModelSpec& model,
                     const IntegratorConfig& config, std::span<const double> output_times) {
  config.validate();
  state.validate();
  model.kernel.validate();
  model.coupling.validate();
  model.repulsion.validate();
  if (model.dimension != state.dim()) throw DomainError("integrate: model/state dimension mismatch");
  if (config.t_end < state.time) throw DomainError("integrate: t_end before the initial time");

  std::vector<double> marks;
  for (double t : output_times)
    if (t > state.time && t < config.t_end) marks.push_back(t);
  std::sort(marks.begin(), marks.end());
  marks.erase(std::unique(marks.begin(), marks.end()), marks.end());

  Trajectory traj;
  traj.snapshots.push_back(make_snapshot(state));
  ParticleState current = state;
  Stepper stepper(model, config);
  std::size_t steps = 0;
  auto next_mark = marks.begin();

  while (current.time < config.t_end) {
    const double target = next_mark != marks.end() ? *next_mark : config.t_end;
    try {
      stepper.advance(current, target);
    } catch (const IntegrationError& e) {
      throw IntegrationError(e.what(), std::move(traj));
    }
    ++steps;
    bool record = steps % config.observer_stride == 0 || current.time >= config.t_end;
    if (next_mark != marks.end() && current.time >= *next_mark) {
      record = true;
      ++next_mark;
    }
    if (record && current.time > traj.back().time()) traj.snapshots.push_back(make_snapshot(current));
    if (steps >= config.max_steps && current.time < config.t_end) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "max_steps = %zu exceeded at t = %.17g", config.max_steps,
                    current.time);
      if (current.time > traj.back().time()) traj.snapshots.push_back(make_snapshot(current));
      throw IntegrationError(buf, std::move(traj));
    }
  }
  return traj;
}

}  // namespace flockkin
