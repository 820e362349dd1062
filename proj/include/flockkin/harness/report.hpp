#pragma once

#include <string>
#include <vector>

#include "flockkin/diagnostics.hpp"
#include "flockkin/model.hpp"

namespace flockkin::harness {

/// One entry of a report file. `series` is the CSV path relative to the run
/// directory (empty when the check has no series).
struct ReportEntry {
  std::string name;
  bool pass = false;
  double margin = 0.0;
  double witness_time = 0.0;
  double tolerance = 0.0;
  std::string series;
  std::string detail;
};

ReportEntry entry_of(const VerdictReport& rep, const std::string& series_path);

/// {"name", "pass", "margin", "witness_time", "tolerance", "series", "detail"}.
std::string report_json(const ReportEntry& entry);
/// {"pass": all, "verdicts": [...]}.
std::string summary_json(const std::vector<ReportEntry>& entries);

std::string assumptions_json(const AssumptionReport& report);

std::string verdict_series_csv(const VerdictReport& rep);
std::string stability_csv(const std::vector<StabilityResult>& results);
std::string convergence_csv(const ConvergenceTable& table);
std::string flocking_csv(const std::vector<FlockingPoint>& series);

/// Run manifest: status plus every listed file with its SHA-256.
struct ManifestFile {
  std::string path;  ///< relative to the run directory
  std::string sha256;
};

std::string manifest_json(const std::string& command, const std::string& status, const std::string& model_hash,
                          std::uint64_t seed, const std::vector<ManifestFile>& files, const std::string& note = {});

}  // namespace flockkin::harness
