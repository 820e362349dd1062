#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "flockkin/diagnostics.hpp"
#include "flockkin/dynamics.hpp"
#include "flockkin/kinetic.hpp"
#include "flockkin/model.hpp"
#include "flockkin/transport.hpp"

namespace flockkin::harness {

/// Schema violation in a run config. `line` is 1-based, 0 when unknown.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, int line, const std::string& message);
  int line = 0;
};

struct DecaySettings {
  double rel_tol = 1e-3;
  bool observed_phi_star = true;  ///< Phi* from the observed diameter, else the declared one
  std::optional<double> t_end;
};

struct GammaSettings {
  double window = 10.0;
  double plateau_fraction = 0.05;
};

struct SupportSettings {
  double c_cap = 10.0;
  std::optional<double> t_end;
};

struct StabilitySettings {
  std::vector<double> perturbations{0.0, 1e-3, 1e-2};
  std::vector<double> times{0.0, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0};
};

struct MeanfieldSettings {
  std::vector<std::size_t> n_list{64, 256, 1024};
  std::vector<double> times{0.0, 1.0};
  std::size_t seeds = 5;
  Pairing pairing = Pairing::against_largest;
  double factor = 3.0;  ///< allowed growth of each later column over the t = 0 column
};

struct FlockingSettings {
  std::optional<double> t_end;
  double spacing = 0.5;          ///< time between evaluated snapshots
  double monotone_after = 1.0;
  double slack = 1e-9;
  double rel_tol = 1e-3;
  std::optional<double> final_max;  ///< optional ceiling for the last distance
};

struct RunConfig {
  std::string source;  ///< file name for messages
  std::uint64_t seed = 0;
  int threads = 1;

  ModelSpec model;
  bool phi_star_given = false;
  bool f_star_given = false;

  InitialSpec initial;
  std::optional<ParticleState> explicit_state;  ///< initial.preset == explicit

  IntegratorConfig integrator;
  std::string output_dir = "out";
  std::size_t snapshot_stride = 1;
  MetricKind metric = MetricKind::euclidean;

  std::size_t assumption_samples = 256;
  double assumption_radius = 0.0;  ///< 0: support bound of the initial data

  DecaySettings decay;
  GammaSettings gamma;
  SupportSettings support;
  StabilitySettings stability;
  MeanfieldSettings meanfield;
  FlockingSettings flocking;

  /// Replaces the root seed and every seed derived from it.
  void set_seed(std::uint64_t root);
  void set_threads(int k);

  GroundMetric ground_metric() const { return phase_metric(metric, model.dimension); }
  /// Radius used by the assumption checker.
  double checker_radius() const;
  /// Initial particles: the explicit state or a sample of `initial`.
  ParticleState initial_state() const;
};

RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

/// Fully resolved config as YAML (every default spelled out).
std::string resolved_yaml(const RunConfig& config);

}  // namespace flockkin::harness
