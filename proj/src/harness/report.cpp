#include "flockkin/harness/report.hpp"

#include <cmath>
#include <json.hpp>

#include "flockkin/harness/snapshot_io.hpp"

namespace flockkin::harness {

using nlohmann::json;

namespace {

// JSON has no infinities; they are written as strings.
json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

json entry_object(const ReportEntry& e) {
  json j;
  j["name"] = e.name;
  j["pass"] = e.pass;
  j["margin"] = number(e.margin);
  j["witness_time"] = number(e.witness_time);
  j["tolerance"] = number(e.tolerance);
  j["series"] = e.series;
  j["detail"] = e.detail;
  return j;
}

}  // namespace

ReportEntry entry_of(const VerdictReport& rep, const std::string& series_path) {
  return {rep.name, rep.pass, rep.worst_margin, rep.witness_time, rep.tolerance, series_path, rep.detail};
}

std::string report_json(const ReportEntry& entry) { return entry_object(entry).dump(2) + "\n"; }

std::string summary_json(const std::vector<ReportEntry>& entries) {
  json j;
  bool all = true;
  j["verdicts"] = json::array();
  for (const auto& e : entries) {
    all = all && e.pass;
    j["verdicts"].push_back(entry_object(e));
  }
  j["pass"] = all;
  return j.dump(2) + "\n";
}

std::string assumptions_json(const AssumptionReport& report) {
  json j;
  j["pass"] = report.all_pass();
  j["radius"] = number(report.radius);
  j["samples"] = report.samples;
  j["phi_min"] = number(report.phi_min);
  j["force_max"] = number(report.force_max);
  j["growth_constant"] = number(report.growth_constant);
  j["cstar"] = number(report.cstar);
  j["checks"] = json::array();
  for (const auto& c : report.checks) {
    json w = json::array();
    for (double x : c.witness) w.push_back(number(x));
    j["checks"].push_back({{"name", c.name},
                           {"pass", c.pass},
                           {"observed", number(c.observed)},
                           {"bound", number(c.bound)},
                           {"witness", w},
                           {"detail", c.detail}});
  }
  return j.dump(2) + "\n";
}

std::string verdict_series_csv(const VerdictReport& rep) {
  std::string out = "t,observed,bound\n";
  for (const auto& p : rep.series) out += fmt17(p.t) + "," + fmt17(p.observed) + "," + fmt17(p.bound) + "\n";
  return out;
}

std::string stability_csv(const std::vector<StabilityResult>& results) {
  std::string out = "perturbation,t,distance,ratio,envelope\n";
  for (const auto& r : results)
    for (const auto& p : r.series)
      out += fmt17(r.perturbation) + "," + fmt17(p.t) + "," + fmt17(p.distance) + "," + fmt17(p.ratio) + "," +
             fmt17(p.envelope) + "\n";
  return out;
}

std::string convergence_csv(const ConvergenceTable& table) {
  std::string out = "# " + table.reference + "\nN,t,w1,wall_time";
  const std::size_t seeds = table.rows.empty() ? 0 : table.rows.front().per_seed.size();
  for (std::size_t s = 0; s < seeds; ++s) out += ",seed_" + std::to_string(s);
  out += '\n';
  for (const auto& r : table.rows) {
    out += std::to_string(r.n) + "," + fmt17(r.t) + "," + fmt17(r.distance) + "," + fmt17(r.wall_time);
    for (double d : r.per_seed) out += "," + fmt17(d);
    out += '\n';
  }
  return out;
}

std::string flocking_csv(const std::vector<FlockingPoint>& series) {
  std::string out = "t,w1_dirac,sqrt_Gf\n";
  for (const auto& p : series) out += fmt17(p.t) + "," + fmt17(p.distance) + "," + fmt17(p.sqrt_gf) + "\n";
  return out;
}

std::string manifest_json(const std::string& command, const std::string& status, const std::string& model_hash,
                          std::uint64_t seed, const std::vector<ManifestFile>& files, const std::string& note) {
  json j;
  j["command"] = command;
  j["status"] = status;
  j["model_hash"] = model_hash;
  j["seed"] = seed;
  if (!note.empty()) j["note"] = note;
  j["files"] = json::array();
  for (const auto& f : files) j["files"].push_back({{"path", f.path}, {"sha256", f.sha256}});
  return j.dump(2) + "\n";
}

}  // namespace flockkin::harness
