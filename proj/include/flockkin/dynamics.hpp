#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "flockkin/model.hpp"
#include "flockkin/state.hpp"

namespace flockkin {

struct IntegratorConfig {
  double dt = 0.01;          ///< base (maximal) step
  double t_end = 1.0;
  double error_tol = 1e-10;  ///< per-step local error bound for step doubling
  std::size_t max_steps = 1'000'000;
  std::size_t observer_stride = 1;  ///< accepted steps between snapshots
  int threads = 1;                  ///< workers for the force kernel

  void validate() const;
};

/// Raised when the step controller cannot meet the tolerance or the step cap
/// is hit. `partial` holds whatever trajectory was recorded before the fault.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, Trajectory partial = {})
      : std::runtime_error(what), partial(std::move(partial)) {}
  Trajectory partial;
};

/// Lambda(v) = (1/N) (sum_{i>j} |v_i - v_j|^2)^(1/2), evaluated pairwise.
double alignment_measure(const ParticleState& state);

/// Lambda^2 via the O(N) centred-variance identity; what the force kernel uses.
double alignment_measure_squared_fast(const ParticleState& state);

/// Unnormalised contribution of agent j to the acceleration of agent i:
/// Phi(|x_i - x_j|) G(v_j - v_i) + lambda_pow F(|x_i - x_j|^2)(x_i - x_j),
/// where lambda_pow = Lambda^(2 alpha - 1).
std::vector<double> pairwise_term(const ParticleState& state, const ModelSpec& model, std::size_t i,
                                  std::size_t j, double lambda_pow);

/// Accelerations of all agents, written coordinate-major into `out`
/// (size n * d). Rows are partitioned across `threads` workers; each row is
/// summed sequentially in index order with compensation, so the result is
/// bitwise independent of the thread count.
void accelerations(const ParticleState& state, const ModelSpec& model, std::span<double> out,
                   int threads = 1);
std::vector<double> accelerations(const ParticleState& state, const ModelSpec& model,
                                  int threads = 1);

struct StepInfo {
  double h = 0.0;      ///< accepted step
  double error = 0.0;  ///< scaled local error estimate of the accepted step
  std::size_t rejected = 0;
};

/// Classical RK4 with step-doubling error control. Keeps the suggested step
/// between calls.
class Stepper {
 public:
  Stepper(const ModelSpec& model, const IntegratorConfig& config);

  /// Advances `state` by one accepted step no longer than min(dt, t_limit - time).
  StepInfo advance(ParticleState& state, double t_limit);

 private:
  void rhs(const ParticleState& s, std::span<double> dx, std::span<double> dv);
  void rk4(const ParticleState& s, double h, ParticleState& out);

  const ModelSpec& model_;
  IntegratorConfig config_;
  double h_next_;
  ParticleState stage_;
  std::vector<double> k_x_[4], k_v_[4];
};

/// One accepted step from `state` (time advances by at most config.dt).
ParticleState step(const ParticleState& state, const ModelSpec& model,
                   const IntegratorConfig& config);

/// Integrates from state.time to config.t_end. A snapshot (with moments) is
/// recorded at the start, every observer_stride accepted steps, at each time in
/// `output_times` (steps are clipped to land on them) and at the end.
Trajectory integrate(const ParticleState& state, const ModelSpec& model,
                     const IntegratorConfig& config, std::span<const double> output_times = {});

/// Makes a snapshot (moments and Lambda) of a state.
Snapshot make_snapshot(const ParticleState& state);

}  // namespace flockkin
