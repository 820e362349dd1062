#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace flockkin {

// ---------------------------------------------------------------------------
// Interaction rate Phi(r)

enum class KernelPreset { constant, cucker_smale };

/// Phi(r) = level (constant) or amplitude / (1 + r^2)^beta (cucker_smale).
struct KernelSpec {
  KernelPreset preset = KernelPreset::constant;
  double level = 1.0;
  double amplitude = 1.0;
  double beta = 0.0;

  static KernelSpec constant(double level);
  static KernelSpec cucker_smale(double amplitude, double beta);

  void validate() const;
};

double eval_phi(const KernelSpec& spec, double r);

/// Phi evaluated from the squared distance; avoids the square root in the
/// pair kernel.
inline double eval_phi_sq(const KernelSpec& spec, double r2) noexcept;

/// Infimum of Phi over [0, radius]. Both presets are non-increasing in r.
double kernel_min_on_ball(const KernelSpec& spec, double radius);

// ---------------------------------------------------------------------------
// Coupling force G(v)

enum class CouplingPreset { linear, power };

/// G(v) = v (linear) or v |v|^(2 alpha - 2) (power). G* = 1 for both.
struct CouplingSpec {
  CouplingPreset preset = CouplingPreset::linear;
  double alpha = 1.0;

  static CouplingSpec linear();
  static CouplingSpec power(double alpha);

  /// Exponent alpha realised by the preset (1 for linear).
  double exponent() const noexcept { return preset == CouplingPreset::linear ? 1.0 : alpha; }
  void validate() const;
};

/// Scalar s with G(v) = s * v, as a function of |v|^2.
inline double coupling_scale(const CouplingSpec& spec, double norm2) noexcept;

std::vector<double> eval_g(const CouplingSpec& spec, std::span<const double> v);

// ---------------------------------------------------------------------------
// Repelling force F(|x|^2) x

enum class RepulsionPreset { zero, saturated };

/// F(s) = 0 (zero) or cap / sqrt(s + softening) (saturated), so that
/// |F(|x|^2) x| < cap.
struct RepulsionSpec {
  RepulsionPreset preset = RepulsionPreset::zero;
  double cap = 0.0;
  double softening = 1.0;

  static RepulsionSpec zero();
  static RepulsionSpec saturated(double cap, double softening);

  /// Supremum of |F(|x|^2) x| over all x.
  double bound() const noexcept { return preset == RepulsionPreset::zero ? 0.0 : cap; }
  void validate() const;
};

/// F(s) for s = |x|^2.
inline double repulsion_scale(const RepulsionSpec& spec, double s) noexcept;

std::vector<double> eval_repulsion(const RepulsionSpec& spec, std::span<const double> x);

// ---------------------------------------------------------------------------

struct ModelSpec {
  std::size_t dimension = 1;
  KernelSpec kernel;
  CouplingSpec coupling;
  RepulsionSpec repulsion;
  double phi_star = 1.0;  ///< declared lower bound of Phi
  double g_star = 1.0;    ///< coercivity constant; fixed to 1 by the presets
  double f_star = 0.0;    ///< declared upper bound of |F(|x|^2) x|

  double alpha() const noexcept { return coupling.exponent(); }

  /// Throws ValidationError unless alpha is in [1, 5/4), the constants are
  /// positive and F* < 2^(alpha - 1/2) Phi* G*.
  void validate() const;
};

/// Largest F* allowed by the smallness condition: 2^(alpha - 1/2) Phi* G*.
double repulsion_threshold(const ModelSpec& spec);

/// Decay-rate constant C* = 2^alpha Phi* G* - sqrt(2) F*. Throws
/// ValidationError when it is not positive.
double cstar(const ModelSpec& spec);

/// Canonical one-line text form; hashed into snapshot headers.
std::string describe(const ModelSpec& spec);

// ---------------------------------------------------------------------------
// Assumption checker

struct AssumptionCheck {
  std::string name;    ///< "A1", "A2a", "A2b", "A3-lower", "A3-force", "A3-smallness", "A4"
  bool pass = false;
  double observed = 0.0;  ///< worst sampled value of the checked quantity
  double bound = 0.0;     ///< value it was compared against
  std::vector<double> witness;  ///< point realising `observed`
  std::string detail;
};

struct AssumptionReport {
  double radius = 0.0;
  std::size_t samples = 0;
  double phi_min = 0.0;       ///< min Phi found on the ball
  double force_max = 0.0;     ///< max |F(|x|^2) x| found on the ball
  double growth_constant = 0.0;  ///< fitted C of |Phi G| <= C (1 + |x| + |v|)
  double cstar = 0.0;            ///< NaN when the smallness condition fails
  std::vector<AssumptionCheck> checks;

  bool all_pass() const noexcept;
  const AssumptionCheck& at(const std::string& name) const;
};

/// Samples x, v deterministically in the ball of the given radius and checks
/// each assumption; failures are entries in the report, never exceptions.
AssumptionReport check_assumptions(const ModelSpec& spec, std::size_t sample_budget, double radius,
                                   std::uint64_t seed);

// ---------------------------------------------------------------------------
// inline definitions

inline double eval_phi_sq(const KernelSpec& spec, double r2) noexcept {
  if (spec.preset == KernelPreset::constant) return spec.level;
  const double base = 1.0 + r2;
  if (spec.beta == 0.0) return spec.amplitude;
  if (spec.beta == 0.5) return spec.amplitude / std::sqrt(base);
  if (spec.beta == 1.0) return spec.amplitude / base;
  return spec.amplitude * std::pow(base, -spec.beta);
}

inline double coupling_scale(const CouplingSpec& spec, double norm2) noexcept {
  if (spec.preset == CouplingPreset::linear || norm2 == 0.0) return 1.0;
  return std::pow(norm2, spec.alpha - 1.0);
}

inline double repulsion_scale(const RepulsionSpec& spec, double s) noexcept {
  if (spec.preset == RepulsionPreset::zero) return 0.0;
  return spec.cap / std::sqrt(s + spec.softening);
}

}  // namespace flockkin
