#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "flockkin/model.hpp"
#include "flockkin/state.hpp"
#include "flockkin/transport.hpp"

namespace flockkin::harness {

/// Unreadable or malformed input file.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);

/// First 16 hex digits of the SHA-256 of describe(model).
std::string model_hash(const ModelSpec& model);

struct SnapshotHeader {
  std::size_t n = 0;
  std::size_t d = 0;
  double time = 0.0;
  std::string model_hash;
  std::uint64_t seed = 0;
};

struct SnapshotFile {
  SnapshotHeader header;
  ParticleState state;
};

/// Header "# N d time model_hash seed", a line with the values, a column line
/// "id,x_0,...,v_0,..." and one row per particle. Every number uses 17
/// significant digits so a reload is bitwise exact.
std::string format_snapshot(const ParticleState& state, const std::string& hash, std::uint64_t seed);
SnapshotFile parse_snapshot(const std::string& text, const std::string& source = "<snapshot>");
void write_snapshot(const std::string& path, const ParticleState& state, const std::string& hash,
                    std::uint64_t seed);
SnapshotFile read_snapshot(const std::string& path);

/// Plain measure file: column line "weight,p_0,...,p_{k-1}" then one atom per row.
std::string format_measure(const DiscreteMeasure& mu);
void write_measure(const std::string& path, const DiscreteMeasure& mu);

struct LoadedMeasure {
  DiscreteMeasure measure;
  bool from_snapshot = false;  ///< atoms are (x, v) pairs of a snapshot
};

/// Reads either a snapshot or a plain measure file.
LoadedMeasure read_measure(const std::string& path);

/// Columns t, V1_k, X1_k, V2, X2, Gf, Gamma, support_radius, Lambda.
std::string format_moments(const Trajectory& traj);

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);

/// "%.17g".
std::string fmt17(double v);

}  // namespace flockkin::harness
