#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace flockkin {

/// Positions and velocities of n agents in d dimensions at one time stamp.
/// Storage is coordinate-major (structure of arrays): component k of agent i
/// lives at index k * n + i.
class ParticleState {
 public:
  ParticleState() = default;
  ParticleState(std::size_t n, std::size_t d, double time = 0.0);

  std::size_t size() const noexcept { return n_; }
  std::size_t dim() const noexcept { return d_; }

  double time = 0.0;

  double& x(std::size_t i, std::size_t k) noexcept { return pos_[k * n_ + i]; }
  double x(std::size_t i, std::size_t k) const noexcept { return pos_[k * n_ + i]; }
  double& v(std::size_t i, std::size_t k) noexcept { return vel_[k * n_ + i]; }
  double v(std::size_t i, std::size_t k) const noexcept { return vel_[k * n_ + i]; }

  /// Component k of all positions, contiguous.
  std::span<double> x_component(std::size_t k) noexcept { return {pos_.data() + k * n_, n_}; }
  std::span<const double> x_component(std::size_t k) const noexcept {
    return {pos_.data() + k * n_, n_};
  }
  std::span<double> v_component(std::size_t k) noexcept { return {vel_.data() + k * n_, n_}; }
  std::span<const double> v_component(std::size_t k) const noexcept {
    return {vel_.data() + k * n_, n_};
  }

  std::span<double> positions() noexcept { return pos_; }
  std::span<const double> positions() const noexcept { return pos_; }
  std::span<double> velocities() noexcept { return vel_; }
  std::span<const double> velocities() const noexcept { return vel_; }

  std::vector<double> position_of(std::size_t i) const;
  std::vector<double> velocity_of(std::size_t i) const;

  /// Throws DomainError for n = 0, d = 0 or non-finite entries.
  void validate() const;

  friend bool operator==(const ParticleState&, const ParticleState&) = default;

 private:
  std::size_t n_ = 0;
  std::size_t d_ = 0;
  std::vector<double> pos_;
  std::vector<double> vel_;
};

/// Moment functionals of a phase-space measure.
struct MomentSet {
  std::vector<double> V1;  ///< mean velocity
  std::vector<double> X1;  ///< mean position
  double V2 = 0.0;         ///< integral of |v|^2
  double X2 = 0.0;         ///< integral of |x|^2
  double Gf = 0.0;         ///< velocity fluctuation, integral of |v - V1|^2
  double Gamma = 0.0;      ///< position fluctuation, integral of |x - X1|^2
  double support_radius = 0.0;
};

struct Snapshot {
  ParticleState state;
  MomentSet moments;
  double lambda = 0.0;  ///< alignment measure of the state

  double time() const noexcept { return state.time; }
};

struct Trajectory {
  std::vector<Snapshot> snapshots;

  bool empty() const noexcept { return snapshots.empty(); }
  std::size_t size() const noexcept { return snapshots.size(); }
  const Snapshot& front() const { return snapshots.front(); }
  const Snapshot& back() const { return snapshots.back(); }

  /// Snapshots with time <= t_max.
  Trajectory until(double t_max) const;
};

}  // namespace flockkin
