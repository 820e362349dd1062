#include "flockkin/harness/commands.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>

#include "flockkin/errors.hpp"
#include "flockkin/harness/snapshot_io.hpp"
#include "flockkin/rng.hpp"

namespace flockkin::harness {

namespace fs = std::filesystem;

namespace {

/// Collects every file written into a run directory for the manifest.
class RunWriter {
 public:
  explicit RunWriter(std::string dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  void write(const std::string& rel, const std::string& text) {
    const fs::path p = fs::path(dir_) / rel;
    fs::create_directories(p.parent_path());
    write_text(p.string(), text);
    files_.push_back({rel, sha256_hex(text)});
  }

  void manifest(const std::string& command, const std::string& status, const RunConfig& cfg,
                const std::string& note = {}) {
    write_text((fs::path(dir_) / "manifest.json").string(),
               manifest_json(command, status, model_hash(cfg.model), cfg.seed, files_, note));
  }

  const std::string& dir() const { return dir_; }

 private:
  std::string dir_;
  std::vector<ManifestFile> files_;
};

RunConfig prepare(const CommandOptions& opt) {
  if (opt.config.empty()) throw ConfigError("<cli>", 0, "--config is required");
  RunConfig cfg = load_config(opt.config);
  if (opt.seed) {
    cfg.set_seed(*opt.seed);
    if (!cfg.phi_star_given) cfg.model.phi_star = kernel_min_on_ball(cfg.model.kernel, cfg.checker_radius());
  }
  if (opt.threads) {
    if (*opt.threads < 1) throw ConfigError("<cli>", 0, "--threads must be >= 1");
    cfg.set_threads(*opt.threads);
  }
  if (opt.metric) {
    if (*opt.metric == "euclidean")
      cfg.metric = MetricKind::euclidean;
    else if (*opt.metric == "sum")
      cfg.metric = MetricKind::sum_of_norms;
    else
      throw ConfigError("<cli>", 0, "--metric must be euclidean or sum");
  }
  if (!opt.out.empty()) cfg.output_dir = opt.out;
  return cfg;
}

void write_trajectory(RunWriter& w, const RunConfig& cfg, const Trajectory& traj) {
  const std::string hash = model_hash(cfg.model);
  char name[48];
  for (std::size_t k = 0; k < traj.size(); ++k) {
    std::snprintf(name, sizeof name, "snapshots/snap_%06zu.csv", k);
    w.write(name, format_snapshot(traj.snapshots[k].state, hash, cfg.seed));
  }
  w.write("moments.csv", format_moments(traj));
}

/// Simulates the main run and writes its artifacts. Integration failures are
/// recorded (partial outputs, manifest status "partial") and rethrown.
Trajectory simulate_into(RunWriter& w, const RunConfig& cfg, const std::string& command) {
  w.write("config.resolved.yaml", resolved_yaml(cfg));
  const ParticleState start = cfg.initial_state();
  try {
    Trajectory traj = integrate(start, cfg.model, cfg.integrator);
    write_trajectory(w, cfg, traj);
    return traj;
  } catch (const IntegrationError& e) {
    write_trajectory(w, cfg, e.partial);
    w.manifest(command, "partial", cfg, e.what());
    throw;
  }
}

ReportEntry make_entry(std::string name, bool pass, double margin, double witness, double tol, std::string series,
                       std::string detail) {
  return {std::move(name), pass, margin, witness, tol, std::move(series), std::move(detail)};
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void emit(const FileSink& sink, const std::string& rel, const std::string& text) {
  if (sink) sink(rel, text);
}

Trajectory thin(const Trajectory& traj, double spacing) {
  Trajectory out;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto& s = traj.snapshots[k];
    const bool last = k + 1 == traj.size();
    if (out.empty() || last || s.time() >= out.back().time() + spacing - 1e-12) out.snapshots.push_back(s);
  }
  return out;
}

std::vector<ReportEntry> decay_suite(const RunConfig& cfg, const Trajectory& full, const FileSink& sink) {
  const Trajectory traj = full.until(cfg.decay.t_end.value_or(cfg.integrator.t_end));
  DecayEnvelope env;
  if (cfg.decay.observed_phi_star) {
    env = observed_envelope(traj, cfg.model);
  } else {
    env.alpha = cfg.model.alpha();
    env.cstar = cstar(cfg.model);
    env.g0 = traj.front().moments.Gf;
  }
  auto rep = verify_decay(traj, env, cfg.decay.rel_tol);
  rep.detail += "; C* = " + fmt(env.cstar) + ", alpha = " + fmt(env.alpha);
  emit(sink, "series_decay.csv", verdict_series_csv(rep));
  return {entry_of(rep, "series_decay.csv")};
}

std::vector<ReportEntry> gamma_suite(const RunConfig& cfg, const Trajectory& traj, const FileSink& sink) {
  const auto rep = verify_gamma_bound(traj, cfg.gamma.window, cfg.gamma.plateau_fraction);
  emit(sink, "series_gamma.csv", verdict_series_csv(rep));
  return {entry_of(rep, "series_gamma.csv")};
}

std::vector<ReportEntry> support_suite(const RunConfig& cfg, const Trajectory& full, const FileSink& sink) {
  const Trajectory traj = full.until(cfg.support.t_end.value_or(cfg.integrator.t_end));
  const auto fit = fit_support_envelope(traj, cfg.support.c_cap);
  emit(sink, "series_support.csv", verdict_series_csv(fit.report));
  return {entry_of(fit.report, "series_support.csv")};
}

std::vector<ReportEntry> stability_suite(const RunConfig& cfg, const FileSink& sink) {
  const ParticleState start = cfg.initial_state();
  const GroundMetric metric = cfg.ground_metric();
  const std::uint64_t seed = derive_seed(cfg.seed, "perturbation");
  std::vector<StabilityResult> results, positive;
  for (double delta : cfg.stability.perturbations) {
    results.push_back(stability_study(start, delta, cfg.model, cfg.integrator, cfg.stability.times, metric, seed));
    if (delta > 0.0) positive.push_back(results.back());
  }
  emit(sink, "series_stability.csv", stability_csv(results));

  std::vector<ReportEntry> out;
  bool have_zero = false, zero_ok = true;
  for (const auto& r : results) {
    if (r.perturbation != 0.0) continue;
    have_zero = true;
    for (const auto& p : r.series) zero_ok = zero_ok && p.distance == 0.0;
  }
  if (have_zero)
    out.push_back(make_entry("stability-zero", zero_ok, zero_ok ? 0.0 : -1.0, 0.0, 0.0, "series_stability.csv",
                             "zero perturbation must give identically zero distance"));
  if (!positive.empty()) {
    const double c = fit_growth_rate(positive);
    double worst = std::numeric_limits<double>::infinity(), witness = 0.0;
    for (const auto& r : positive)
      for (const auto& p : r.series) {
        const double bound = std::exp(c * p.t);
        const double m = (bound - p.ratio) / bound;
        if (m < worst) {
          worst = m;
          witness = p.t;
        }
      }
    const bool ok = std::isfinite(c) && worst >= -1e-12;
    out.push_back(make_entry("stability-rate", ok, worst, witness, 1e-12, "series_stability.csv",
                             "fitted shared growth rate c = " + fmt(c)));
  }
  return out;
}

std::vector<ReportEntry> meanfield_suite(const RunConfig& cfg, const FileSink& sink) {
  if (cfg.explicit_state) throw ConfigError(cfg.source, 0, "meanfield study needs a sampled initial preset");
  std::vector<std::uint64_t> seeds;
  for (std::size_t s = 0; s < cfg.meanfield.seeds; ++s)
    seeds.push_back(derive_seed(cfg.seed, "meanfield/" + std::to_string(s)));
  const auto& mf = cfg.meanfield;
  const auto table =
      meanfield_study(cfg.initial, mf.n_list, cfg.model, cfg.integrator, mf.times, mf.pairing, seeds, cfg.ground_metric());
  emit(sink, "series_meanfield.csv", convergence_csv(table));

  // against_largest: the last row is the reference itself; consecutive: one row per pair.
  const std::size_t compared = mf.n_list.size() - 1;
  std::vector<ReportEntry> out;
  const auto base = table.column(0.0);
  for (double t : mf.times) {
    const auto col = table.column(t);
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < compared; ++k) {
      const double m = col[k] > 0.0 ? (col[k] - col[k + 1]) / col[k] : -1.0;
      worst = std::min(worst, m);
    }
    out.push_back(make_entry("meanfield-trend-t" + fmt(t), worst > 0.0, worst, t, 0.0, "series_meanfield.csv",
                             "W1 column strictly decreasing in N (" + table.reference + ")"));
    if (t == 0.0) continue;
    double transfer = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < compared; ++k) {
      const double bound = mf.factor * base[k];
      transfer = std::min(transfer, bound > 0.0 ? (bound - col[k]) / bound : (col[k] == 0.0 ? 0.0 : -1.0));
    }
    out.push_back(make_entry("meanfield-transfer-t" + fmt(t), transfer >= 0.0, transfer, t, 0.0,
                             "series_meanfield.csv", "W1 at t <= " + fmt(mf.factor) + " x W1 at t = 0"));
  }
  return out;
}

std::vector<ReportEntry> flocking_suite(const RunConfig& cfg, const Trajectory& full, const FileSink& sink) {
  const auto& fl = cfg.flocking;
  const Trajectory traj = thin(full.until(fl.t_end.value_or(cfg.integrator.t_end)), fl.spacing);
  const auto series = flocking_study(traj, cfg.ground_metric());
  emit(sink, "series_flocking.csv", flocking_csv(series));
  const std::string csv = "series_flocking.csv";
  std::vector<ReportEntry> out;

  double worst = std::numeric_limits<double>::infinity(), witness = 0.0;
  for (const auto& p : series)
    if (p.sqrt_gf + fl.slack - p.distance < worst) {
      worst = p.sqrt_gf + fl.slack - p.distance;
      witness = p.t;
    }
  out.push_back(make_entry("flocking-coupling", worst >= 0.0, worst, witness, 0.0, csv,
                           "W1 to rho x delta(V1(0)) <= sqrt(Gf) + slack"));

  const DecayEnvelope env = observed_envelope(full.until(traj.back().time()), cfg.model);
  const auto& last = series.back();
  const double bound = std::sqrt(envelope_value(env, last.t - series.front().t));
  const double margin = bound > 0.0 ? (bound - last.sqrt_gf) / bound : (last.sqrt_gf == 0.0 ? 0.0 : -1.0);
  out.push_back(make_entry("flocking-decay", margin >= -fl.rel_tol, margin, last.t, fl.rel_tol, csv,
                           "sqrt(Gf(T)) <= sqrt(envelope(T)) (1 + tol), C* = " + fmt(env.cstar)));

  double mono = std::numeric_limits<double>::infinity(), mono_t = 0.0;
  for (std::size_t k = 1; k < series.size(); ++k) {
    if (series[k - 1].t < fl.monotone_after) continue;
    for (double m : {series[k - 1].distance - series[k].distance, series[k - 1].sqrt_gf - series[k].sqrt_gf})
      if (m + fl.slack < mono) {
        mono = m + fl.slack;
        mono_t = series[k].t;
      }
  }
  if (!std::isfinite(mono)) mono = 0.0;
  out.push_back(make_entry("flocking-monotone", mono >= 0.0, mono, mono_t, 0.0, csv,
                           "both series non-increasing after t = " + fmt(fl.monotone_after) + " up to slack"));
  if (fl.final_max) {
    const double m = *fl.final_max - last.distance;
    out.push_back(make_entry("flocking-final", m >= 0.0, m, last.t, 0.0, csv,
                             "final distance below " + fmt(*fl.final_max)));
  }
  return out;
}

bool needs_trajectory(const std::string& suite) {
  return suite == "decay" || suite == "gamma" || suite == "support" || suite == "flocking";
}

int report_error(std::ostream& err, int code, const std::string& what) {
  err << "error: " << what << "\n";
  return code;
}

/// Maps exceptions to exit codes.
template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    return report_error(err, exit_input_error, e.what());
  } catch (const ParseError& e) {
    return report_error(err, exit_input_error, e.what());
  } catch (const ValidationError& e) {
    return report_error(err, exit_input_error, e.what());
  } catch (const DomainError& e) {
    return report_error(err, exit_input_error, e.what());
  } catch (const IntegrationError& e) {
    return report_error(err, exit_runtime_failure, std::string("integration failed: ") + e.what());
  } catch (const std::exception& e) {
    return report_error(err, exit_runtime_failure, e.what());
  }
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"decay", "gamma", "support", "stability", "meanfield", "flocking"};
  return names;
}

std::vector<ReportEntry> run_suite(const std::string& suite, const RunConfig& cfg, const Trajectory& traj,
                                   const FileSink& sink) {
  if (suite == "decay") return decay_suite(cfg, traj, sink);
  if (suite == "gamma") return gamma_suite(cfg, traj, sink);
  if (suite == "support") return support_suite(cfg, traj, sink);
  if (suite == "stability") return stability_suite(cfg, sink);
  if (suite == "meanfield") return meanfield_suite(cfg, sink);
  if (suite == "flocking") return flocking_suite(cfg, traj, sink);
  throw ConfigError("<cli>", 0, "unknown suite '" + suite + "'");
}

int simulate_command(const CommandOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = prepare(opt);
    cfg.model.validate();
    RunWriter w(cfg.output_dir);
    const Trajectory traj = simulate_into(w, cfg, "simulate");
    w.manifest("simulate", "complete", cfg);
    out << "simulated " << traj.size() << " snapshots to t = " << fmt(traj.back().time()) << " in " << w.dir()
        << "\n";
    return int{exit_ok};
  });
}

int w1_command(const CommandOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (opt.files.size() != 2) throw ConfigError("<cli>", 0, "w1 needs exactly two files");
    const LoadedMeasure a = read_measure(opt.files[0]);
    const LoadedMeasure b = read_measure(opt.files[1]);
    if (a.measure.dim() != b.measure.dim())
      throw DomainError("dimension mismatch: " + std::to_string(a.measure.dim()) + " vs " +
                        std::to_string(b.measure.dim()));
    GroundMetric metric = GroundMetric::euclidean();
    const std::string kind = opt.metric.value_or("euclidean");
    if (kind == "sum") {
      if (a.measure.dim() % 2 != 0) throw DomainError("--metric sum needs an even number of coordinates");
      metric = GroundMetric::sum_of_norms(a.measure.dim() / 2);
    } else if (kind != "euclidean") {
      throw ConfigError("<cli>", 0, "--metric must be euclidean or sum");
    }
    const double d = w1(a.measure, b.measure, metric).distance;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12f", d);
    out << buf << "\n";
    return int{exit_ok};
  });
}

int check_assumptions_command(const CommandOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = prepare(opt);
    const auto report = check_assumptions(cfg.model, cfg.assumption_samples, cfg.checker_radius(),
                                          derive_seed(cfg.seed, "assumptions"));
    fs::create_directories(cfg.output_dir);
    write_text((fs::path(cfg.output_dir) / "assumptions.json").string(), assumptions_json(report));
    for (const auto& c : report.checks)
      out << c.name << ": " << (c.pass ? "pass" : "FAIL") << " (observed " << fmt(c.observed) << ", bound "
          << fmt(c.bound) << ")\n";
    if (!report.all_pass()) {
      err << "error: model violates the structural assumptions (see assumptions.json)\n";
      return int{exit_input_error};
    }
    return int{exit_ok};
  });
}

int verify_command(const CommandOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = prepare(opt);
    std::vector<std::string> suites;
    if (opt.suite == "all")
      suites = suite_names();
    else if (std::find(suite_names().begin(), suite_names().end(), opt.suite) != suite_names().end())
      suites = {opt.suite};
    else
      throw ConfigError("<cli>", 0, "unknown suite '" + opt.suite + "'");

    RunWriter w(cfg.output_dir);
    const auto assumptions = check_assumptions(cfg.model, cfg.assumption_samples, cfg.checker_radius(),
                                               derive_seed(cfg.seed, "assumptions"));
    w.write("assumptions.json", assumptions_json(assumptions));
    if (!assumptions.all_pass()) {
      for (const auto& c : assumptions.checks)
        if (!c.pass) err << "assumption " << c.name << " failed: " << c.detail << "\n";
      w.manifest("verify", "rejected", cfg, "assumption check failed");
      return int{exit_input_error};
    }

    Trajectory traj;
    const bool need = std::any_of(suites.begin(), suites.end(), needs_trajectory);
    if (need) traj = simulate_into(w, cfg, "verify");

    std::vector<ReportEntry> entries;
    const FileSink sink = [&w](const std::string& rel, const std::string& text) { w.write(rel, text); };
    for (const auto& suite : suites) {
      const auto got = run_suite(suite, cfg, traj, sink);
      for (const auto& e : got) {
        out << e.name << ": " << (e.pass ? "PASS" : "FAIL") << " margin=" << fmt(e.margin)
            << " witness_t=" << fmt(e.witness_time) << "  " << e.detail << "\n";
        w.write("report_" + e.name + ".json", report_json(e));
      }
      entries.insert(entries.end(), got.begin(), got.end());
    }
    w.write("report.json", summary_json(entries));
    w.manifest("verify", "complete", cfg);
    const bool all = std::all_of(entries.begin(), entries.end(), [](const ReportEntry& e) { return e.pass; });
    return int{all ? exit_ok : exit_verdict_failed};
  });
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"flockkin: flocking particle simulation and verification"};
  app.require_subcommand(1);
  CommandOptions opt;
  std::string metric;
  int threads = 0;
  std::uint64_t seed = 0;

  auto common = [&](CLI::App* sub, bool config_required) {
    auto* c = sub->add_option("--config", opt.config, "run config (YAML)");
    if (config_required) c->required();
    sub->add_option("--out", opt.out, "output directory (overrides output.dir)");
    sub->add_option("--metric", metric, "ground metric")->check(CLI::IsMember({"euclidean", "sum"}));
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "root seed override");
  };
  auto* simulate = app.add_subcommand("simulate", "integrate the particle system and write snapshots");
  common(simulate, true);
  auto* w1cmd = app.add_subcommand("w1", "Wasserstein-1 distance between two measure files");
  common(w1cmd, false);
  w1cmd->add_option("files", opt.files, "two snapshot or measure CSV files")->expected(2)->required();
  auto* verify = app.add_subcommand("verify", "run verification suites");
  common(verify, true);
  verify->add_option("--suite", opt.suite, "decay, gamma, support, stability, meanfield, flocking or all");
  auto* check = app.add_subcommand("check-assumptions", "check the model assumptions");
  common(check, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? int{exit_ok} : int{exit_input_error};
  }
  auto given = [](CLI::App* sub, const char* name) { return sub->count(name) > 0; };
  CLI::App* used = app.get_subcommands().front();
  if (given(used, "--metric")) opt.metric = metric;
  if (given(used, "--threads")) opt.threads = threads;
  if (given(used, "--seed")) opt.seed = seed;

  if (used == simulate) return simulate_command(opt, out, err);
  if (used == w1cmd) return w1_command(opt, out, err);
  if (used == verify) return verify_command(opt, out, err);
  return check_assumptions_command(opt, out, err);
}

}  // namespace flockkin::harness
