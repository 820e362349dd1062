#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "flockkin/dynamics.hpp"
#include "flockkin/kinetic.hpp"
#include "flockkin/model.hpp"
#include "flockkin/state.hpp"
#include "flockkin/transport.hpp"

namespace flockkin {

/// Upper bound for the velocity fluctuation: g0 e^{-C* t} for alpha = 1,
/// (B + A t)^{-1/(alpha - 1)} otherwise.
struct DecayEnvelope {
  double alpha = 1.0;
  double cstar = 1.0;
  double g0 = 0.0;

  double B() const;  ///< g0^{1 - alpha}
  double A() const;  ///< (alpha - 1) C*
  void validate() const;
};

double envelope_value(const DecayEnvelope& env, double t);

struct SeriesPoint {
  double t = 0.0;
  double observed = 0.0;
  double bound = 0.0;
};

/// Outcome of one check. pass == (worst_margin >= -tolerance).
struct VerdictReport {
  std::string name;
  bool pass = false;
  double worst_margin = 0.0;
  double witness_time = 0.0;
  double tolerance = 0.0;
  std::vector<SeriesPoint> series;
  std::string detail;
};

/// Per-snapshot (t, value) extraction helpers.
std::vector<double> snapshot_times(const Trajectory& traj);
std::vector<double> gf_series(const Trajectory& traj);
std::vector<double> gamma_series(const Trajectory& traj);
std::vector<double> support_series(const Trajectory& traj);

/// Largest pairwise position distance the trajectory can have reached:
/// the maximal snapshot diameter padded by velocity diameter times the
/// largest snapshot gap.
double observed_position_diameter(const Trajectory& traj);

/// Envelope built from the model with Phi* replaced by the kernel minimum over
/// the observed position diameter and g0 = Gf of the first snapshot.
/// Throws ValidationError if the resulting C* is not positive.
DecayEnvelope observed_envelope(const Trajectory& traj, const ModelSpec& model);

/// Margin is (bound - Gf) / bound; the g0 = 0 branch uses -Gf with rel_tol
/// as an absolute tolerance.
VerdictReport verify_decay(const Trajectory& traj, const DecayEnvelope& env, double rel_tol);
VerdictReport verify_decay(std::span<const double> t, std::span<const double> gf,
                           const DecayEnvelope& env, double rel_tol);

/// Plateau test on the trailing two windows. Margin is
/// plateau_fraction - (max last window - max previous window) / sup.
VerdictReport verify_gamma_bound(const Trajectory& traj, double window, double plateau_fraction = 0.05);
VerdictReport verify_gamma_bound(std::span<const double> t, std::span<const double> gamma,
                                 double window, double plateau_fraction = 0.05);

struct SupportFit {
  double R0 = 0.0;
  double C = 0.0;  ///< smallest dominating constant; +inf if none up to c_cap
  VerdictReport report;
};

/// R0 e^{Cs} + C (e^{Cs} - 1)^{1/2} with s = t - t0.
double support_envelope(double R0, double C, double s);

SupportFit fit_support_envelope(const Trajectory& traj, double c_cap = 10.0);
SupportFit fit_support_envelope(std::span<const double> t, std::span<const double> radius,
                                double c_cap = 10.0);

// ---------------------------------------------------------------------------
// Studies

/// Moves every velocity by a seeded vector uniform in the ball of radius
/// `perturbation` (stream i for agent i).
ParticleState perturb_velocities(const ParticleState& state, double perturbation, std::uint64_t seed);

struct StabilityPoint {
  double t = 0.0;
  double distance = 0.0;  ///< W1(f_t, g_t)
  double ratio = 0.0;     ///< distance / W1(f_0, g_0); 0 when both vanish
  double envelope = 0.0;  ///< running max of ratio over s <= t
};

struct StabilityResult {
  double perturbation = 0.0;
  double initial_distance = 0.0;
  std::vector<StabilityPoint> series;
  double fitted_rate = 0.0;  ///< smallest c >= 0 with ratio(t) <= e^{ct} on the series
};

/// Integrates f0 and its perturbation with identical settings up to
/// max(times) and compares them at each time in `times` (which must include 0).
StabilityResult stability_study(const InitialSpec& f0, double perturbation, const ModelSpec& model,
                                const IntegratorConfig& config, std::span<const double> times,
                                const GroundMetric& metric, std::uint64_t seed);
StabilityResult stability_study(const ParticleState& f0, double perturbation, const ModelSpec& model,
                                const IntegratorConfig& config, std::span<const double> times,
                                const GroundMetric& metric, std::uint64_t seed);

/// Smallest c >= 0 with ratio <= e^{ct} at every t > 0 of every series.
double fit_growth_rate(std::span<const StabilityResult> results);

enum class Pairing { against_largest, consecutive };

struct ConvergenceRow {
  std::size_t n = 0;
  double t = 0.0;
  double distance = 0.0;            ///< mean over seeds
  std::vector<double> per_seed;
  double wall_time = 0.0;           ///< seconds spent on the W1 solves of this row
};

struct ConvergenceTable {
  std::string reference;
  std::vector<ConvergenceRow> rows;  ///< grouped by t, N increasing inside each group

  /// Mean distances at time t in N order.
  std::vector<double> column(double t) const;
};

/// Nested-seed clouds for every N in n_list (strictly increasing, >= 3
/// entries) and every seed; distances at each time in `times`.
ConvergenceTable meanfield_study(const InitialSpec& family, std::span<const std::size_t> n_list,
                                 const ModelSpec& model, const IntegratorConfig& config,
                                 std::span<const double> times, Pairing pairing,
                                 std::span<const std::uint64_t> seeds, const GroundMetric& metric);

struct FlockingPoint {
  double t = 0.0;
  double distance = 0.0;  ///< W1(f_t, rho_t (x) delta_{V1(0)})
  double sqrt_gf = 0.0;
};

std::vector<FlockingPoint> flocking_study(const Trajectory& traj, const GroundMetric& metric);

/// max |H(p1) - H(p2)| / |p1 - p2| over sampled pairs in the phase-space ball
/// of the given radius. Each base pair is evaluated at radii radius 2^{-j}
/// down to 1e-6, so doubling the radius can only add pairs.
double lipschitz_probe(const EmpiricalMeasure& mu, const ModelSpec& model, double ball_radius,
                       std::size_t sample_budget, std::uint64_t seed);

}  // namespace flockkin
