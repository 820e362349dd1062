#include "flockkin/harness/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "flockkin/errors.hpp"
#include "flockkin/rng.hpp"

namespace flockkin::harness {

ConfigError::ConfigError(const std::string& source, int line, const std::string& message)
    : std::runtime_error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + message),
      line(line) {}

namespace {

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& message) const {
    const int line = node.IsDefined() && node.Mark().line >= 0 ? node.Mark().line + 1 : 0;
    throw ConfigError(source_, line, message);
  }

  void keys(const YAML::Node& node, const std::string& where, std::initializer_list<const char*> allowed) const {
    if (!node.IsMap()) fail(node, where + " must be a mapping");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      if (!ok.count(key)) fail(kv.first, "unknown key '" + key + "' in " + where);
    }
  }

  template <class T>
  T scalar(const YAML::Node& node, const std::string& what) const {
    if (!node.IsScalar()) fail(node, what + " must be a scalar");
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      fail(node, "cannot parse " + what + " from '" + node.Scalar() + "'");
    }
  }

  template <class T>
  T get(const YAML::Node& parent, const char* key, T fallback, const std::string& where) const {
    const YAML::Node node = parent[key];
    if (!node.IsDefined() || node.IsNull()) return fallback;
    return scalar<T>(node, where + "." + key);
  }

  template <class T>
  std::optional<T> optional(const YAML::Node& parent, const char* key, const std::string& where) const {
    const YAML::Node node = parent[key];
    if (!node.IsDefined() || node.IsNull()) return std::nullopt;
    return scalar<T>(node, where + "." + key);
  }

  template <class T>
  std::vector<T> list(const YAML::Node& parent, const char* key, std::vector<T> fallback,
                      const std::string& where) const {
    const YAML::Node node = parent[key];
    if (!node.IsDefined() || node.IsNull()) return fallback;
    if (!node.IsSequence()) fail(node, where + "." + key + " must be a list");
    std::vector<T> out;
    for (const auto& item : node) out.push_back(scalar<T>(item, where + "." + key));
    return out;
  }

  double positive(const YAML::Node& parent, const char* key, double fallback, const std::string& where) const {
    const double v = get<double>(parent, key, fallback, where);
    if (!(v > 0.0) || !std::isfinite(v)) fail(parent[key], where + "." + key + " must be positive");
    return v;
  }

  double non_negative(const YAML::Node& parent, const char* key, double fallback,
                      const std::string& where) const {
    const double v = get<double>(parent, key, fallback, where);
    if (!(v >= 0.0) || !std::isfinite(v)) fail(parent[key], where + "." + key + " must be >= 0");
    return v;
  }

  const std::string& source() const { return source_; }

 private:
  std::string source_;
};

YAML::Node child(const YAML::Node& parent, const char* key) {
  const YAML::Node node = parent[key];
  return node.IsDefined() && !node.IsNull() ? node : YAML::Node(YAML::NodeType::Map);
}

template <class E>
E choose(const Reader& r, const YAML::Node& parent, const char* key, const std::string& where, E fallback,
         std::initializer_list<std::pair<const char*, E>> options) {
  const YAML::Node node = parent[key];
  if (!node.IsDefined() || node.IsNull()) return fallback;
  const auto name = r.scalar<std::string>(node, where + "." + key);
  std::string known;
  for (const auto& [label, value] : options) {
    if (name == label) return value;
    known += std::string(known.empty() ? "" : ", ") + label;
  }
  r.fail(node, "unknown " + where + "." + key + " '" + name + "' (expected one of: " + known + ")");
}

// Runs a spec validator and re-raises its message anchored at `node`.
template <class F>
void anchored(const Reader& r, const YAML::Node& node, F&& check) {
  try {
    check();
  } catch (const std::invalid_argument& e) {
    r.fail(node, e.what());
  }
}

void parse_model(const Reader& r, const YAML::Node& root, RunConfig& cfg) {
  const YAML::Node m = root["model"];
  if (!m.IsDefined()) r.fail(root, "missing section 'model'");
  r.keys(m, "model", {"dimension", "kernel", "coupling", "repulsion", "phi_star", "f_star"});
  const auto dim = r.get<long long>(m, "dimension", 1, "model");
  if (dim < 1 || dim > 16) r.fail(m["dimension"], "model.dimension must be in [1, 16]");
  cfg.model.dimension = static_cast<std::size_t>(dim);

  const YAML::Node k = child(m, "kernel");
  r.keys(k, "model.kernel", {"preset", "level", "amplitude", "beta"});
  cfg.model.kernel.preset = choose(r, k, "preset", "model.kernel", KernelPreset::constant,
                                   {{"constant", KernelPreset::constant}, {"cucker_smale", KernelPreset::cucker_smale}});
  cfg.model.kernel.level = r.get<double>(k, "level", 1.0, "model.kernel");
  cfg.model.kernel.amplitude = r.get<double>(k, "amplitude", 1.0, "model.kernel");
  cfg.model.kernel.beta = r.get<double>(k, "beta", 0.0, "model.kernel");
  anchored(r, k, [&] { cfg.model.kernel.validate(); });

  const YAML::Node c = child(m, "coupling");
  r.keys(c, "model.coupling", {"preset", "alpha"});
  cfg.model.coupling.preset = choose(r, c, "preset", "model.coupling", CouplingPreset::linear,
                                     {{"linear", CouplingPreset::linear}, {"power", CouplingPreset::power}});
  cfg.model.coupling.alpha = r.get<double>(c, "alpha", 1.0, "model.coupling");
  anchored(r, c, [&] { cfg.model.coupling.validate(); });

  const YAML::Node f = child(m, "repulsion");
  r.keys(f, "model.repulsion", {"preset", "cap", "softening"});
  cfg.model.repulsion.preset = choose(r, f, "preset", "model.repulsion", RepulsionPreset::zero,
                                      {{"zero", RepulsionPreset::zero}, {"saturated", RepulsionPreset::saturated}});
  cfg.model.repulsion.cap = r.get<double>(f, "cap", 0.0, "model.repulsion");
  cfg.model.repulsion.softening = r.get<double>(f, "softening", 1.0, "model.repulsion");
  anchored(r, f, [&] { cfg.model.repulsion.validate(); });

  if (auto v = r.optional<double>(m, "phi_star", "model")) {
    if (!(*v > 0.0)) r.fail(m["phi_star"], "model.phi_star must be positive");
    cfg.model.phi_star = *v;
    cfg.phi_star_given = true;
  }
  if (auto v = r.optional<double>(m, "f_star", "model")) {
    if (!(*v >= 0.0)) r.fail(m["f_star"], "model.f_star must be >= 0");
    cfg.model.f_star = *v;
    cfg.f_star_given = true;
  }
}

std::vector<double> vector_of(const Reader& r, const YAML::Node& parent, const char* key, std::size_t dim,
                              const std::string& where) {
  auto v = r.list<double>(parent, key, {}, where);
  if (!v.empty() && v.size() != dim)
    r.fail(parent[key], where + "." + key + " must have " + std::to_string(dim) + " components");
  return v;
}

void parse_initial(const Reader& r, const YAML::Node& root, RunConfig& cfg) {
  const YAML::Node node = root["initial"];
  if (!node.IsDefined()) r.fail(root, "missing section 'initial'");
  r.keys(node, "initial", {"preset", "n", "x_center", "v_center", "x_radius", "v_radius", "x_sigma", "v_sigma",
                           "x_center2", "v_center2", "x", "v"});
  const std::size_t d = cfg.model.dimension;
  const auto preset = r.get<std::string>(node, "preset", "uniform_ball", "initial");
  auto& spec = cfg.initial;
  spec.dim = d;
  spec.seed = derive_seed(cfg.seed, "initial");

  if (preset == "explicit") {
    for (const char* key : {"n", "x_center", "v_center", "x_radius", "v_radius", "x_sigma", "v_sigma", "x_center2",
                            "v_center2"})
      if (node[key].IsDefined()) r.fail(node[key], std::string("initial.") + key + " is not used by preset explicit");
    const YAML::Node xs = node["x"], vs = node["v"];
    if (!xs.IsSequence() || !vs.IsSequence()) r.fail(node, "preset explicit needs lists initial.x and initial.v");
    if (xs.size() != vs.size() || xs.size() == 0) r.fail(vs, "initial.x and initial.v must have the same positive length");
    ParticleState s(xs.size(), d);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      for (const auto& [seq, is_x] : {std::pair{xs[i], true}, std::pair{vs[i], false}}) {
        if (!seq.IsSequence() || seq.size() != d)
          r.fail(seq, "each particle needs " + std::to_string(d) + " coordinates");
        for (std::size_t k = 0; k < d; ++k) {
          const double value = r.scalar<double>(seq[k], "initial coordinate");
          if (!std::isfinite(value)) r.fail(seq[k], "non-finite initial coordinate");
          (is_x ? s.x(i, k) : s.v(i, k)) = value;
        }
      }
    }
    spec.n = xs.size();
    cfg.explicit_state = std::move(s);
    return;
  }
  if (node["x"].IsDefined() || node["v"].IsDefined())
    r.fail(node, "initial.x / initial.v require preset explicit");
  if (preset == "uniform_ball")
    spec.preset = InitialPreset::uniform_ball;
  else if (preset == "gaussian_truncated")
    spec.preset = InitialPreset::gaussian_truncated;
  else if (preset == "two_cluster")
    spec.preset = InitialPreset::two_cluster;
  else
    r.fail(node["preset"], "unknown initial.preset '" + preset +
                               "' (expected one of: uniform_ball, gaussian_truncated, two_cluster, explicit)");
  const auto n = r.get<long long>(node, "n", 1, "initial");
  if (n < 1) r.fail(node["n"], "initial.n must be >= 1");
  spec.n = static_cast<std::size_t>(n);
  spec.x_center = vector_of(r, node, "x_center", d, "initial");
  spec.v_center = vector_of(r, node, "v_center", d, "initial");
  spec.x_center2 = vector_of(r, node, "x_center2", d, "initial");
  spec.v_center2 = vector_of(r, node, "v_center2", d, "initial");
  spec.x_radius = r.non_negative(node, "x_radius", 1.0, "initial");
  spec.v_radius = r.non_negative(node, "v_radius", 1.0, "initial");
  spec.x_sigma = r.positive(node, "x_sigma", 1.0, "initial");
  spec.v_sigma = r.positive(node, "v_sigma", 1.0, "initial");
  anchored(r, node, [&] { spec.validate(); });
}

void parse_integrator(const Reader& r, const YAML::Node& root, RunConfig& cfg) {
  const YAML::Node node = child(root, "integrator");
  r.keys(node, "integrator", {"dt", "t_end", "error_tol", "max_steps"});
  auto& ic = cfg.integrator;
  ic.dt = r.positive(node, "dt", ic.dt, "integrator");
  ic.t_end = r.non_negative(node, "t_end", ic.t_end, "integrator");
  ic.error_tol = r.positive(node, "error_tol", ic.error_tol, "integrator");
  const auto steps = r.get<long long>(node, "max_steps", static_cast<long long>(ic.max_steps), "integrator");
  if (steps < 1) r.fail(node["max_steps"], "integrator.max_steps must be >= 1");
  ic.max_steps = static_cast<std::size_t>(steps);
  ic.threads = cfg.threads;
}

void parse_output(const Reader& r, const YAML::Node& root, RunConfig& cfg) {
  const YAML::Node node = child(root, "output");
  r.keys(node, "output", {"dir", "snapshot_stride"});
  cfg.output_dir = r.get<std::string>(node, "dir", cfg.output_dir, "output");
  const auto stride = r.get<long long>(node, "snapshot_stride", 1, "output");
  if (stride < 1) r.fail(node["snapshot_stride"], "output.snapshot_stride must be >= 1");
  cfg.snapshot_stride = static_cast<std::size_t>(stride);
  cfg.integrator.observer_stride = cfg.snapshot_stride;
}

void parse_studies(const Reader& r, const YAML::Node& root, RunConfig& cfg) {
  const YAML::Node node = child(root, "studies");
  r.keys(node, "studies", {"decay", "gamma", "support", "stability", "meanfield", "flocking"});

  const YAML::Node d = child(node, "decay");
  r.keys(d, "studies.decay", {"rel_tol", "phi_star", "t_end"});
  cfg.decay.rel_tol = r.non_negative(d, "rel_tol", cfg.decay.rel_tol, "studies.decay");
  cfg.decay.observed_phi_star =
      choose(r, d, "phi_star", "studies.decay", true, {{"observed", true}, {"declared", false}});
  cfg.decay.t_end = r.optional<double>(d, "t_end", "studies.decay");

  const YAML::Node g = child(node, "gamma");
  r.keys(g, "studies.gamma", {"window", "plateau_fraction"});
  cfg.gamma.window = r.positive(g, "window", cfg.gamma.window, "studies.gamma");
  cfg.gamma.plateau_fraction = r.non_negative(g, "plateau_fraction", cfg.gamma.plateau_fraction, "studies.gamma");

  const YAML::Node s = child(node, "support");
  r.keys(s, "studies.support", {"c_cap", "t_end"});
  cfg.support.c_cap = r.positive(s, "c_cap", cfg.support.c_cap, "studies.support");
  cfg.support.t_end = r.optional<double>(s, "t_end", "studies.support");

  const YAML::Node st = child(node, "stability");
  r.keys(st, "studies.stability", {"perturbations", "times"});
  cfg.stability.perturbations = r.list<double>(st, "perturbations", cfg.stability.perturbations, "studies.stability");
  cfg.stability.times = r.list<double>(st, "times", cfg.stability.times, "studies.stability");
  for (double p : cfg.stability.perturbations)
    if (!(p >= 0.0) || !std::isfinite(p)) r.fail(st["perturbations"], "perturbations must be finite and >= 0");
  if (std::find(cfg.stability.times.begin(), cfg.stability.times.end(), 0.0) == cfg.stability.times.end())
    r.fail(st["times"], "studies.stability.times must include 0");

  const YAML::Node mf = child(node, "meanfield");
  r.keys(mf, "studies.meanfield", {"n_list", "times", "seeds", "pairing", "factor"});
  cfg.meanfield.n_list = r.list<std::size_t>(mf, "n_list", cfg.meanfield.n_list, "studies.meanfield");
  if (cfg.meanfield.n_list.size() < 3) r.fail(mf["n_list"], "studies.meanfield.n_list needs at least 3 entries");
  for (std::size_t k = 0; k < cfg.meanfield.n_list.size(); ++k)
    if (cfg.meanfield.n_list[k] < 1 || (k > 0 && cfg.meanfield.n_list[k] <= cfg.meanfield.n_list[k - 1]))
      r.fail(mf["n_list"], "studies.meanfield.n_list must be positive and strictly increasing");
  cfg.meanfield.times = r.list<double>(mf, "times", cfg.meanfield.times, "studies.meanfield");
  if (std::find(cfg.meanfield.times.begin(), cfg.meanfield.times.end(), 0.0) == cfg.meanfield.times.end())
    r.fail(mf["times"], "studies.meanfield.times must include 0");
  const auto seeds = r.get<long long>(mf, "seeds", 5, "studies.meanfield");
  if (seeds < 1) r.fail(mf["seeds"], "studies.meanfield.seeds must be >= 1");
  cfg.meanfield.seeds = static_cast<std::size_t>(seeds);
  cfg.meanfield.pairing = choose(r, mf, "pairing", "studies.meanfield", Pairing::against_largest,
                                 {{"against_largest", Pairing::against_largest}, {"consecutive", Pairing::consecutive}});
  cfg.meanfield.factor = r.positive(mf, "factor", cfg.meanfield.factor, "studies.meanfield");

  const YAML::Node fl = child(node, "flocking");
  r.keys(fl, "studies.flocking", {"t_end", "spacing", "monotone_after", "slack", "rel_tol", "final_max"});
  cfg.flocking.t_end = r.optional<double>(fl, "t_end", "studies.flocking");
  cfg.flocking.spacing = r.non_negative(fl, "spacing", cfg.flocking.spacing, "studies.flocking");
  cfg.flocking.monotone_after = r.non_negative(fl, "monotone_after", cfg.flocking.monotone_after, "studies.flocking");
  cfg.flocking.slack = r.non_negative(fl, "slack", cfg.flocking.slack, "studies.flocking");
  cfg.flocking.rel_tol = r.non_negative(fl, "rel_tol", cfg.flocking.rel_tol, "studies.flocking");
  cfg.flocking.final_max = r.optional<double>(fl, "final_max", "studies.flocking");

  for (auto [t, key, sec] : {std::tuple{cfg.decay.t_end, "t_end", d}, std::tuple{cfg.support.t_end, "t_end", s},
                             std::tuple{cfg.flocking.t_end, "t_end", fl}})
    if (t && (!(*t >= 0.0) || *t > cfg.integrator.t_end))
      r.fail(sec[key], "study t_end must lie in [0, integrator.t_end]");
}

}  // namespace

double RunConfig::checker_radius() const {
  if (assumption_radius > 0.0) return assumption_radius;
  if (explicit_state) {
    double r = 0.0;
    const auto& s = *explicit_state;
    for (std::size_t i = 0; i < s.size(); ++i) {
      double n2 = 0.0;
      for (std::size_t k = 0; k < s.dim(); ++k) n2 += s.x(i, k) * s.x(i, k) + s.v(i, k) * s.v(i, k);
      r = std::max(r, std::sqrt(n2));
    }
    return std::max(r, 1.0);
  }
  return std::max(initial.support_bound(), 1.0);
}

void RunConfig::set_seed(std::uint64_t root) {
  seed = root;
  initial.seed = derive_seed(root, "initial");
}

void RunConfig::set_threads(int k) {
  threads = k;
  integrator.threads = k;
}

ParticleState RunConfig::initial_state() const { return explicit_state ? *explicit_state : sample_initial(initial); }

RunConfig parse_config(const std::string& text, const std::string& source) {
  const Reader r(source);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(source, e.mark.line + 1, e.msg);
  }
  if (!root.IsMap()) throw ConfigError(source, 0, "top level must be a mapping");
  r.keys(root, "config", {"seed", "threads", "model", "initial", "integrator", "output", "metric", "assumptions",
                          "studies"});
  RunConfig cfg;
  cfg.source = source;
  cfg.seed = r.get<std::uint64_t>(root, "seed", 0, "config");
  const auto threads = r.get<int>(root, "threads", 1, "config");
  if (threads < 1) r.fail(root["threads"], "threads must be >= 1");
  cfg.threads = threads;
  parse_model(r, root, cfg);
  parse_initial(r, root, cfg);
  parse_integrator(r, root, cfg);
  parse_output(r, root, cfg);
  cfg.metric = choose(r, root, "metric", "config", MetricKind::euclidean,
                      {{"euclidean", MetricKind::euclidean}, {"sum", MetricKind::sum_of_norms}});

  const YAML::Node a = child(root, "assumptions");
  r.keys(a, "assumptions", {"sample_budget", "radius"});
  const auto budget = r.get<long long>(a, "sample_budget", 256, "assumptions");
  if (budget < 1) r.fail(a["sample_budget"], "assumptions.sample_budget must be >= 1");
  cfg.assumption_samples = static_cast<std::size_t>(budget);
  cfg.assumption_radius = r.non_negative(a, "radius", 0.0, "assumptions");

  parse_studies(r, root, cfg);

  if (!cfg.phi_star_given) cfg.model.phi_star = kernel_min_on_ball(cfg.model.kernel, cfg.checker_radius());
  if (!cfg.f_star_given) cfg.model.f_star = cfg.model.repulsion.bound();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, "cannot open config file");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path);
}

namespace {

void emit_list(YAML::Emitter& out, const char* key, const auto& values) {
  out << YAML::Key << key << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (const auto& v : values) out << v;
  out << YAML::EndSeq;
}

}  // namespace

std::string resolved_yaml(const RunConfig& cfg) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "seed" << YAML::Value << cfg.seed;
  out << YAML::Key << "threads" << YAML::Value << cfg.threads;

  const auto& m = cfg.model;
  out << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "dimension" << YAML::Value << m.dimension;
  out << YAML::Key << "kernel" << YAML::Value << YAML::BeginMap;
  if (m.kernel.preset == KernelPreset::constant) {
    out << YAML::Key << "preset" << YAML::Value << "constant" << YAML::Key << "level" << YAML::Value << m.kernel.level;
  } else {
    out << YAML::Key << "preset" << YAML::Value << "cucker_smale" << YAML::Key << "amplitude" << YAML::Value
        << m.kernel.amplitude << YAML::Key << "beta" << YAML::Value << m.kernel.beta;
  }
  out << YAML::EndMap;
  out << YAML::Key << "coupling" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "preset" << YAML::Value
      << (m.coupling.preset == CouplingPreset::linear ? "linear" : "power");
  out << YAML::Key << "alpha" << YAML::Value << m.alpha() << YAML::EndMap;
  out << YAML::Key << "repulsion" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "preset" << YAML::Value
      << (m.repulsion.preset == RepulsionPreset::zero ? "zero" : "saturated");
  if (m.repulsion.preset == RepulsionPreset::saturated)
    out << YAML::Key << "cap" << YAML::Value << m.repulsion.cap << YAML::Key << "softening" << YAML::Value
        << m.repulsion.softening;
  out << YAML::EndMap;
  out << YAML::Key << "phi_star" << YAML::Value << m.phi_star;
  out << YAML::Key << "f_star" << YAML::Value << m.f_star;
  out << YAML::EndMap;

  out << YAML::Key << "initial" << YAML::Value << YAML::BeginMap;
  if (cfg.explicit_state) {
    const auto& s = *cfg.explicit_state;
    out << YAML::Key << "preset" << YAML::Value << "explicit";
    for (bool is_x : {true, false}) {
      out << YAML::Key << (is_x ? "x" : "v") << YAML::Value << YAML::BeginSeq;
      for (std::size_t i = 0; i < s.size(); ++i) {
        out << YAML::Flow << YAML::BeginSeq;
        for (std::size_t k = 0; k < s.dim(); ++k) out << (is_x ? s.x(i, k) : s.v(i, k));
        out << YAML::EndSeq;
      }
      out << YAML::EndSeq;
    }
  } else {
    const auto& s = cfg.initial;
    const char* names[] = {"uniform_ball", "gaussian_truncated", "two_cluster"};
    out << YAML::Key << "preset" << YAML::Value << names[static_cast<int>(s.preset)];
    out << YAML::Key << "n" << YAML::Value << s.n;
    emit_list(out, "x_center", s.x_center.empty() ? std::vector<double>(s.dim, 0.0) : s.x_center);
    emit_list(out, "v_center", s.v_center.empty() ? std::vector<double>(s.dim, 0.0) : s.v_center);
    out << YAML::Key << "x_radius" << YAML::Value << s.x_radius;
    out << YAML::Key << "v_radius" << YAML::Value << s.v_radius;
    out << YAML::Key << "x_sigma" << YAML::Value << s.x_sigma;
    out << YAML::Key << "v_sigma" << YAML::Value << s.v_sigma;
    if (!s.x_center2.empty()) emit_list(out, "x_center2", s.x_center2);
    if (!s.v_center2.empty()) emit_list(out, "v_center2", s.v_center2);
  }
  out << YAML::EndMap;

  const auto& ic = cfg.integrator;
  out << YAML::Key << "integrator" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "dt" << YAML::Value << ic.dt << YAML::Key << "t_end" << YAML::Value << ic.t_end;
  out << YAML::Key << "error_tol" << YAML::Value << ic.error_tol << YAML::Key << "max_steps" << YAML::Value
      << ic.max_steps;
  out << YAML::EndMap;

  out << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "dir" << YAML::Value << cfg.output_dir;
  out << YAML::Key << "snapshot_stride" << YAML::Value << cfg.snapshot_stride << YAML::EndMap;
  out << YAML::Key << "metric" << YAML::Value << (cfg.metric == MetricKind::euclidean ? "euclidean" : "sum");
  out << YAML::Key << "assumptions" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "sample_budget" << YAML::Value << cfg.assumption_samples;
  out << YAML::Key << "radius" << YAML::Value << cfg.checker_radius() << YAML::EndMap;

  out << YAML::Key << "studies" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "decay" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "rel_tol" << YAML::Value << cfg.decay.rel_tol;
  out << YAML::Key << "phi_star" << YAML::Value << (cfg.decay.observed_phi_star ? "observed" : "declared");
  out << YAML::Key << "t_end" << YAML::Value << cfg.decay.t_end.value_or(ic.t_end) << YAML::EndMap;
  out << YAML::Key << "gamma" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "window" << YAML::Value << cfg.gamma.window;
  out << YAML::Key << "plateau_fraction" << YAML::Value << cfg.gamma.plateau_fraction << YAML::EndMap;
  out << YAML::Key << "support" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "c_cap" << YAML::Value << cfg.support.c_cap;
  out << YAML::Key << "t_end" << YAML::Value << cfg.support.t_end.value_or(ic.t_end) << YAML::EndMap;
  out << YAML::Key << "stability" << YAML::Value << YAML::BeginMap;
  emit_list(out, "perturbations", cfg.stability.perturbations);
  emit_list(out, "times", cfg.stability.times);
  out << YAML::EndMap;
  out << YAML::Key << "meanfield" << YAML::Value << YAML::BeginMap;
  emit_list(out, "n_list", cfg.meanfield.n_list);
  emit_list(out, "times", cfg.meanfield.times);
  out << YAML::Key << "seeds" << YAML::Value << cfg.meanfield.seeds;
  out << YAML::Key << "pairing" << YAML::Value
      << (cfg.meanfield.pairing == Pairing::against_largest ? "against_largest" : "consecutive");
  out << YAML::Key << "factor" << YAML::Value << cfg.meanfield.factor << YAML::EndMap;
  out << YAML::Key << "flocking" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "t_end" << YAML::Value << cfg.flocking.t_end.value_or(ic.t_end);
  out << YAML::Key << "spacing" << YAML::Value << cfg.flocking.spacing;
  out << YAML::Key << "monotone_after" << YAML::Value << cfg.flocking.monotone_after;
  out << YAML::Key << "slack" << YAML::Value << cfg.flocking.slack;
  out << YAML::Key << "rel_tol" << YAML::Value << cfg.flocking.rel_tol;
  if (cfg.flocking.final_max) out << YAML::Key << "final_max" << YAML::Value << *cfg.flocking.final_max;
  out << YAML::EndMap;
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace flockkin::harness
