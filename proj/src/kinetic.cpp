#include "flockkin/kinetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "flockkin/errors.hpp"
#include "flockkin/rng.hpp"

namespace flockkin {

namespace {

double norm(std::span<const double> a) {
  double s = 0.0;
  for (double c : a) s += c * c;
  return std::sqrt(s);
}

}  // namespace

void EmpiricalMeasure::validate() const {
  if (dim < 1) throw DomainError("EmpiricalMeasure: dimension must be >= 1");
  if (w.empty()) throw DomainError("EmpiricalMeasure: no atoms");
  if (x.size() != w.size() * dim || v.size() != w.size() * dim)
    throw DomainError("EmpiricalMeasure: coordinate arrays do not match atom count");
  double total = 0.0;
  for (double wi : w) {
    if (!(wi > 0.0) || !std::isfinite(wi)) throw DomainError("EmpiricalMeasure: weights must be positive");
    total += wi;
  }
  if (std::abs(total - 1.0) > 1e-12) throw DomainError("EmpiricalMeasure: weights do not sum to 1");
  auto finite = [](double c) { return std::isfinite(c); };
  if (!std::all_of(x.begin(), x.end(), finite) || !std::all_of(v.begin(), v.end(), finite))
    throw DomainError("EmpiricalMeasure: non-finite coordinate");
}

EmpiricalMeasure from_particles(const ParticleState& state) {
  const std::size_t n = state.size(), d = state.dim();
  EmpiricalMeasure mu;
  mu.dim = d;
  mu.x.resize(n * d);
  mu.v.resize(n * d);
  mu.w.assign(n, 1.0 / static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      mu.x[i * d + k] = state.x(i, k);
      mu.v[i * d + k] = state.v(i, k);
    }
  }
  return mu;
}

double phase_norm(std::span<const double> x, std::span<const double> v, PhaseNorm kind) {
  if (kind == PhaseNorm::sum_of_norms) return norm(x) + norm(v);
  double s = 0.0;
  for (double c : x) s += c * c;
  for (double c : v) s += c * c;
  return std::sqrt(s);
}

double support_radius(const EmpiricalMeasure& mu, PhaseNorm kind) {
  double r = 0.0;
  for (std::size_t a = 0; a < mu.size(); ++a) r = std::max(r, phase_norm(mu.x_of(a), mu.v_of(a), kind));
  return r;
}

MomentSet moments(const EmpiricalMeasure& mu, PhaseNorm kind) {
  const std::size_t d = mu.dim;
  MomentSet m;
  m.V1.assign(d, 0.0);
  m.X1.assign(d, 0.0);
  for (std::size_t a = 0; a < mu.size(); ++a) {
    const double w = mu.w[a];
    for (std::size_t k = 0; k < d; ++k) {
      const double xv = mu.x[a * d + k], vv = mu.v[a * d + k];
      m.V1[k] += w * vv;
      m.X1[k] += w * xv;
      m.V2 += w * vv * vv;
      m.X2 += w * xv * xv;
    }
  }
  // Fluctuations as centred second moments; algebraically V2 - |V1|^2 and
  // X2 - |X1|^2 without the cancellation.
  for (std::size_t a = 0; a < mu.size(); ++a) {
    const double w = mu.w[a];
    for (std::size_t k = 0; k < d; ++k) {
      const double dv = mu.v[a * d + k] - m.V1[k];
      const double dx = mu.x[a * d + k] - m.X1[k];
      m.Gf += w * dv * dv;
      m.Gamma += w * dx * dx;
    }
  }
  m.support_radius = support_radius(mu, kind);
  return m;
}

std::vector<double> field_H(const EmpiricalMeasure& mu, std::span<const double> x,
                            std::span<const double> v, const ModelSpec& model) {
  const std::size_t d = mu.dim;
  if (x.size() != d || v.size() != d) throw DomainError("field_H: point dimension mismatch");
  double repel_scale = 0.0;
  if (model.repulsion.preset != RepulsionPreset::zero) {
    const MomentSet m = moments(mu);
    const double expo = model.alpha() - 0.5;
    const double g = std::max(0.0, m.Gf);
    repel_scale = expo == 0.5 ? std::sqrt(g) : std::pow(g, expo);
  }
  std::vector<double> out(d, 0.0), dx(d), dv(d);
  for (std::size_t a = 0; a < mu.size(); ++a) {
    double r2 = 0.0, w2 = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      dx[k] = x[k] - mu.x[a * d + k];
      dv[k] = mu.v[a * d + k] - v[k];  // -G(v - w) = G(w - v)
      r2 += dx[k] * dx[k];
      w2 += dv[k] * dv[k];
    }
    const double align = eval_phi_sq(model.kernel, r2) * coupling_scale(model.coupling, w2);
    const double repel = repel_scale * repulsion_scale(model.repulsion, r2);
    for (std::size_t k = 0; k < d; ++k) out[k] += mu.w[a] * (align * dv[k] + repel * dx[k]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Initial data

void InitialSpec::validate() const {
  if (n < 1) throw ValidationError("initial: n must be >= 1");
  if (dim < 1) throw ValidationError("initial: dimension must be >= 1");
  auto check_center = [&](const std::vector<double>& c, const char* name) {
    if (!c.empty() && c.size() != dim)
      throw ValidationError(std::string("initial: ") + name + " has wrong dimension");
  };
  check_center(x_center, "x_center");
  check_center(v_center, "v_center");
  check_center(x_center2, "x_center2");
  check_center(v_center2, "v_center2");
  if (!(x_radius >= 0.0) || !(v_radius >= 0.0) || !std::isfinite(x_radius) || !std::isfinite(v_radius))
    throw ValidationError("initial: radii must be finite and >= 0");
  if (preset == InitialPreset::gaussian_truncated && (!(x_sigma > 0.0) || !(v_sigma > 0.0)))
    throw ValidationError("initial: gaussian sigmas must be positive");
}

double InitialSpec::support_bound() const {
  auto centre_norm = [&](const std::vector<double>& c) { return c.empty() ? 0.0 : norm(c); };
  auto bound = [&](const std::vector<double>& xc, const std::vector<double>& vc) {
    const double rx = centre_norm(xc) + x_radius;
    const double rv = centre_norm(vc) + v_radius;
    return std::sqrt(rx * rx + rv * rv);
  };
  double r = bound(x_center, v_center);
  if (preset == InitialPreset::two_cluster) r = std::max(r, bound(x_center2, v_center2));
  return r;
}

namespace {

void truncated_gaussian(const CounterRng& rng, std::uint64_t base, double sigma, double radius,
                        std::span<double> out) {
  if (radius == 0.0) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  for (std::uint64_t attempt = 0; attempt < 100000; ++attempt) {
    double r2 = 0.0;
    for (std::size_t k = 0; k < out.size(); ++k) {
      out[k] = sigma * rng.normal(base + attempt * 64 + k);
      r2 += out[k] * out[k];
    }
    if (r2 <= radius * radius) return;
  }
  throw InternalError("truncated gaussian: acceptance rate too small (radius << sigma)");
}

}  // namespace

ParticleState sample_initial(const InitialSpec& spec) {
  spec.validate();
  const std::size_t n = spec.n, d = spec.dim;
  auto centre = [&](const std::vector<double>& c, std::size_t k) { return c.empty() ? 0.0 : c[k]; };
  ParticleState state(n, d, 0.0);
  std::vector<double> dx(d), dv(d);
  for (std::size_t i = 0; i < n; ++i) {
    const CounterRng rng(spec.seed, i);
    const std::vector<double>* xc = &spec.x_center;
    const std::vector<double>* vc = &spec.v_center;
    switch (spec.preset) {
      case InitialPreset::uniform_ball:
        uniform_in_ball(rng, 0, spec.x_radius, dx);
        uniform_in_ball(rng, 1000, spec.v_radius, dv);
        break;
      case InitialPreset::gaussian_truncated:
        truncated_gaussian(rng, 0, spec.x_sigma, spec.x_radius, dx);
        truncated_gaussian(rng, 1u << 30, spec.v_sigma, spec.v_radius, dv);
        break;
      case InitialPreset::two_cluster:
        if (rng.uniform(5'000'000) >= 0.5) {
          xc = &spec.x_center2;
          vc = &spec.v_center2;
        }
        uniform_in_ball(rng, 0, spec.x_radius, dx);
        uniform_in_ball(rng, 1000, spec.v_radius, dv);
        break;
    }
    for (std::size_t k = 0; k < d; ++k) {
      state.x(i, k) = centre(*xc, k) + dx[k];
      state.v(i, k) = centre(*vc, k) + dv[k];
    }
  }
  return state;
}

// ---------------------------------------------------------------------------
// Characteristics

namespace {

/// Reconstructs the measure at arbitrary t from the snapshots of a trajectory.
class MeasureFlow {
 public:
  MeasureFlow(const Trajectory& traj, const ModelSpec& model, MeasureInterpolation interp,
              int threads)
      : traj_(traj), model_(model), interp_(interp), threads_(threads),
        accel_(traj.size()) {}

  /// Measure at time t, using snapshot interval `seg` = [t_seg, t_seg+1].
  const EmpiricalMeasure& at(double t, std::size_t seg) {
    const Snapshot& a = traj_.snapshots[seg];
    if (interp_ == MeasureInterpolation::hold || seg + 1 >= traj_.size()) {
      if (cached_hold_ != seg) {
        scratch_ = from_particles(a.state);
        cached_hold_ = seg;
      }
      return scratch_;
    }
    cached_hold_ = static_cast<std::size_t>(-1);
    const Snapshot& b = traj_.snapshots[seg + 1];
    const auto& acc_a = accel(seg);
    const auto& acc_b = accel(seg + 1);
    const std::size_t n = a.state.size(), d = a.state.dim();
    const double h = b.time() - a.time();
    const double s = (t - a.time()) / h;
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
    scratch_.dim = d;
    scratch_.x.resize(n * d);
    scratch_.v.resize(n * d);
    scratch_.w.assign(n, 1.0 / static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < d; ++k) {
        const double xa = a.state.x(i, k), xb = b.state.x(i, k);
        const double va = a.state.v(i, k), vb = b.state.v(i, k);
        const double aa = acc_a[k * n + i], ab = acc_b[k * n + i];
        scratch_.x[i * d + k] = h00 * xa + h10 * h * va + h01 * xb + h11 * h * vb;
        scratch_.v[i * d + k] = h00 * va + h10 * h * aa + h01 * vb + h11 * h * ab;
      }
    }
    return scratch_;
  }

 private:
  const std::vector<double>& accel(std::size_t idx) {
    if (accel_[idx].empty()) accel_[idx] = accelerations(traj_.snapshots[idx].state, model_, threads_);
    return accel_[idx];
  }

  const Trajectory& traj_;
  const ModelSpec& model_;
  MeasureInterpolation interp_;
  int threads_;
  std::vector<std::vector<double>> accel_;
  EmpiricalMeasure scratch_;
  std::size_t cached_hold_ = static_cast<std::size_t>(-1);
};

}  // namespace

std::vector<PhasePoint> flow_characteristic(const Trajectory& traj, const ModelSpec& model,
                                            std::span<const double> x0,
                                            std::span<const double> v0,
                                            const IntegratorConfig& config, double t_start,
                                            double t_stop, MeasureInterpolation interp) {
  config.validate();
  if (traj.empty()) throw DomainError("flow_characteristic: empty trajectory");
  const double t_first = traj.front().time(), t_last = traj.back().time();
  auto in_range = [&](double t) { return std::isfinite(t) && t >= t_first && t <= t_last; };
  if (!in_range(t_start) || !in_range(t_stop))
    throw DomainError("flow_characteristic: seed or stop time outside the trajectory range");
  const std::size_t d = traj.front().state.dim();
  if (x0.size() != d || v0.size() != d) throw DomainError("flow_characteristic: seed dimension mismatch");

  std::vector<double> nodes;
  nodes.reserve(traj.size());
  for (const auto& s : traj.snapshots) nodes.push_back(s.time());

  MeasureFlow flow(traj, model, interp, config.threads);
  const double dir = t_stop >= t_start ? 1.0 : -1.0;

  // y = (X, V); f(t, y) = (V, H(t, X, V)).
  auto rhs = [&](double t, std::size_t seg, std::span<const double> y, std::span<double> dy) {
    const auto& mu = flow.at(t, seg);
    const auto h = field_H(mu, y.subspan(0, d), y.subspan(d, d), model);
    for (std::size_t k = 0; k < d; ++k) {
      dy[k] = y[d + k];
      dy[d + k] = h[k];
    }
  };
  const std::size_t len = 2 * d;
  auto rk4 = [&](double t, std::size_t seg, std::span<const double> y, double h,
                 std::span<double> out) {
    std::vector<double> k1(len), k2(len), k3(len), k4(len), tmp(len);
    rhs(t, seg, y, k1);
    for (std::size_t a = 0; a < len; ++a) tmp[a] = y[a] + 0.5 * h * k1[a];
    rhs(t + 0.5 * h, seg, tmp, k2);
    for (std::size_t a = 0; a < len; ++a) tmp[a] = y[a] + 0.5 * h * k2[a];
    rhs(t + 0.5 * h, seg, tmp, k3);
    for (std::size_t a = 0; a < len; ++a) tmp[a] = y[a] + h * k3[a];
    rhs(t + h, seg, tmp, k4);
    for (std::size_t a = 0; a < len; ++a) out[a] = y[a] + h / 6.0 * (k1[a] + 2 * k2[a] + 2 * k3[a] + k4[a]);
  };

  std::vector<double> y(len), full(len), half(len), twice(len);
  std::copy(x0.begin(), x0.end(), y.begin());
  std::copy(v0.begin(), v0.end(), y.begin() + static_cast<std::ptrdiff_t>(d));

  std::vector<PhasePoint> path;
  auto record = [&](double t) {
    path.push_back({t, std::vector<double>(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(d)),
                    std::vector<double>(y.begin() + static_cast<std::ptrdiff_t>(d), y.end())});
  };
  double t = t_start;
  record(t);
  double h_try = config.dt;
  std::size_t steps = 0;
  while (dir * (t_stop - t) > 0.0) {
    // Next node strictly ahead of t in the direction of travel.
    double node;
    if (dir > 0) {
      auto it = std::upper_bound(nodes.begin(), nodes.end(), t);
      node = it == nodes.end() ? t_stop : std::min(*it, t_stop);
    } else {
      auto it = std::lower_bound(nodes.begin(), nodes.end(), t);
      node = it == nodes.begin() ? t_stop : std::max(*(it - 1), t_stop);
    }
    const double remaining = std::abs(node - t);
    double h = std::min({h_try, config.dt, remaining});
    for (;;) {
      const bool clipped = h >= remaining;
      if (clipped) h = remaining;
      if (!clipped && h < config.dt * 1e-9)
        throw IntegrationError("flow_characteristic: step underflow");
      const double mid = t + dir * 0.5 * h;
      auto seg_it = std::upper_bound(nodes.begin(), nodes.end(), mid);
      const std::size_t seg =
          seg_it == nodes.begin() ? 0 : static_cast<std::size_t>(seg_it - nodes.begin()) - 1;
      const double hs = dir * h;
      rk4(t, seg, y, hs, full);
      rk4(t, seg, y, 0.5 * hs, half);
      rk4(t + 0.5 * hs, seg, half, 0.5 * hs, twice);
      double err = 0.0;
      for (std::size_t a = 0; a < len; ++a)
        err = std::max(err, std::abs(twice[a] - full[a]) / std::max(1.0, std::abs(twice[a])));
      err /= 15.0;
      if (err <= config.error_tol) {
        y = twice;
        t = clipped ? node : t + hs;
        const double grow = err == 0.0 ? 5.0 : std::min(5.0, 0.9 * std::pow(config.error_tol / err, 0.2));
        if (!clipped || grow < 1.0) h_try = std::min(config.dt, h * std::max(grow, 0.2));
        break;
      }
      h *= std::max(0.1, 0.9 * std::pow(config.error_tol / err, 0.2));
    }
    record(t);
    if (++steps > config.max_steps) throw IntegrationError("flow_characteristic: max_steps exceeded");
  }
  return path;
}

}  // namespace flockkin
