#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "flockkin/dynamics.hpp"
#include "flockkin/model.hpp"
#include "flockkin/state.hpp"

namespace flockkin {

/// Weighted atoms on phase space R^d x R^d. Atom-major storage: x and v hold
/// size() * dim() entries each.
struct EmpiricalMeasure {
  std::size_t dim = 0;
  std::vector<double> x;
  std::vector<double> v;
  std::vector<double> w;

  std::size_t size() const noexcept { return w.size(); }
  std::span<const double> x_of(std::size_t a) const noexcept { return {x.data() + a * dim, dim}; }
  std::span<const double> v_of(std::size_t a) const noexcept { return {v.data() + a * dim, dim}; }

  /// Throws DomainError unless weights are positive, sum to 1 within 1e-12
  /// and coordinates are finite.
  void validate() const;
};

EmpiricalMeasure from_particles(const ParticleState& state);

enum class PhaseNorm { euclidean, sum_of_norms };

/// Phase-space norm of (x, v): |(x, v)| or |x| + |v|.
double phase_norm(std::span<const double> x, std::span<const double> v, PhaseNorm norm);

MomentSet moments(const EmpiricalMeasure& mu, PhaseNorm norm = PhaseNorm::euclidean);

double support_radius(const EmpiricalMeasure& mu, PhaseNorm norm = PhaseNorm::euclidean);

/// Mean-field field H_[mu](x, v).
std::vector<double> field_H(const EmpiricalMeasure& mu, std::span<const double> x,
                            std::span<const double> v, const ModelSpec& model);

// ---------------------------------------------------------------------------
// Initial data

enum class InitialPreset { uniform_ball, gaussian_truncated, two_cluster };

struct InitialSpec {
  InitialPreset preset = InitialPreset::uniform_ball;
  std::size_t n = 1;
  std::size_t dim = 1;
  std::vector<double> x_center;  ///< defaults to the origin
  std::vector<double> v_center;
  double x_radius = 1.0;  ///< truncation radius of positions around their centre
  double v_radius = 1.0;
  double x_sigma = 1.0;   ///< gaussian_truncated only
  double v_sigma = 1.0;
  std::vector<double> x_center2;  ///< two_cluster only: second cluster
  std::vector<double> v_center2;
  std::uint64_t seed = 0;

  void validate() const;
  /// Radius of a phase-space ball (euclidean) containing every sample.
  double support_bound() const;
};

/// Agent i draws only from counter stream i, so the first N agents of a run
/// with more agents are identical (nested sampling).
ParticleState sample_initial(const InitialSpec& spec);

// ---------------------------------------------------------------------------
// Characteristics

struct PhasePoint {
  double t = 0.0;
  std::vector<double> x;
  std::vector<double> v;
};

enum class MeasureInterpolation {
  hold,     ///< piecewise constant: latest snapshot at or before t
  hermite,  ///< per-atom cubic Hermite between consecutive snapshots
};

/// Integrates dX/dt = V, dV/dt = H_[f(t)](X, V) from (x0, v0) at time t_start
/// to t_stop (either direction) with the measure f(t) reconstructed from the
/// snapshots of `traj`. Every snapshot time crossed is a node of the returned
/// path. Throws DomainError when t_start or t_stop lies outside the trajectory.
std::vector<PhasePoint> flow_characteristic(const Trajectory& traj, const ModelSpec& model,
                                            std::span<const double> x0,
                                            std::span<const double> v0,
                                            const IntegratorConfig& config, double t_start,
                                            double t_stop,
                                            MeasureInterpolation interp = MeasureInterpolation::hermite);

}  // namespace flockkin
