#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "flockkin/diagnostics.hpp"
#include "flockkin/errors.hpp"
#include "flockkin/harness/commands.hpp"
#include "flockkin/harness/config.hpp"
#include "flockkin/transport.hpp"

namespace py = pybind11;
using namespace flockkin;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

DiscreteMeasure to_measure(const Array& points, const std::optional<Array>& weights) {
  if (points.ndim() != 2) throw DomainError("points must be a 2-d array (atoms x dim)");
  const auto n = static_cast<std::size_t>(points.shape(0));
  const auto d = static_cast<std::size_t>(points.shape(1));
  std::vector<double> pts(points.data(), points.data() + n * d);
  if (!weights) return DiscreteMeasure::uniform(d, std::move(pts));
  if (weights->ndim() != 1 || static_cast<std::size_t>(weights->shape(0)) != n)
    throw DomainError("weights must have one entry per atom");
  return DiscreteMeasure(d, std::move(pts), std::vector<double>(weights->data(), weights->data() + n));
}

GroundMetric metric_of(const std::string& name, std::size_t dim) {
  if (name == "euclidean") return GroundMetric::euclidean();
  if (name == "sum") {
    if (dim % 2 != 0) throw DomainError("sum metric needs phase-space points of even dimension");
    return GroundMetric::sum_of_norms(dim / 2);
  }
  throw DomainError("metric must be 'euclidean' or 'sum'");
}

py::dict moments_table(const Trajectory& traj) {
  const std::size_t k = traj.size();
  const std::size_t d = k ? traj.front().state.dim() : 0;
  Array t({k}), gf({k}), gamma({k}), radius({k}), lambda({k});
  Array v1({k, d}), x1({k, d});
  auto tm = t.mutable_unchecked<1>();
  auto gfm = gf.mutable_unchecked<1>();
  auto gam = gamma.mutable_unchecked<1>();
  auto rm = radius.mutable_unchecked<1>();
  auto lm = lambda.mutable_unchecked<1>();
  auto v1m = v1.mutable_unchecked<2>();
  auto x1m = x1.mutable_unchecked<2>();
  for (std::size_t i = 0; i < k; ++i) {
    const auto& s = traj.snapshots[i];
    tm(i) = s.time();
    gfm(i) = s.moments.Gf;
    gam(i) = s.moments.Gamma;
    rm(i) = s.moments.support_radius;
    lm(i) = s.lambda;
    for (std::size_t c = 0; c < d; ++c) {
      v1m(i, c) = s.moments.V1[c];
      x1m(i, c) = s.moments.X1[c];
    }
  }
  py::dict out;
  out["t"] = t;
  out["Gf"] = gf;
  out["Gamma"] = gamma;
  out["support_radius"] = radius;
  out["Lambda"] = lambda;
  out["V1"] = v1;
  out["X1"] = x1;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Particle flocking with collision avoidance: simulation, transport distances, verification.";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<harness::ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def(
      "w1",
      [](const Array& a, const Array& b, std::optional<Array> wa, std::optional<Array> wb, const std::string& metric) {
        const auto mu = to_measure(a, wa), nu = to_measure(b, wb);
        const auto r = w1(mu, nu, metric_of(metric, mu.dim()));
        std::vector<std::tuple<std::size_t, std::size_t, double>> plan;
        for (const auto& e : r.plan.entries) plan.emplace_back(e.source, e.target, e.mass);
        return py::make_tuple(r.distance, plan);
      },
      py::arg("a"), py::arg("b"), py::arg("weights_a") = py::none(), py::arg("weights_b") = py::none(),
      py::arg("metric") = "euclidean", "Exact Wasserstein-1 distance and optimal plan (source, target, mass).");

  m.def(
      "w1_bruteforce",
      [](const Array& a, const Array& b, std::optional<Array> wa, std::optional<Array> wb, const std::string& metric) {
        const auto mu = to_measure(a, wa), nu = to_measure(b, wb);
        return w1_bruteforce(mu, nu, metric_of(metric, mu.dim()));
      },
      py::arg("a"), py::arg("b"), py::arg("weights_a") = py::none(), py::arg("weights_b") = py::none(),
      py::arg("metric") = "euclidean");

  m.def(
      "bounded_lipschitz",
      [](const Array& a, const Array& b, std::optional<Array> wa, std::optional<Array> wb, const std::string& metric) {
        const auto mu = to_measure(a, wa), nu = to_measure(b, wb);
        return bounded_lipschitz(mu, nu, metric_of(metric, mu.dim()));
      },
      py::arg("a"), py::arg("b"), py::arg("weights_a") = py::none(), py::arg("weights_b") = py::none(),
      py::arg("metric") = "euclidean");

  m.def(
      "simulate",
      [](const std::string& yaml, std::optional<double> t_end) {
        auto cfg = harness::parse_config(yaml, "<python>");
        if (t_end) cfg.integrator.t_end = *t_end;
        Trajectory traj;
        {
          py::gil_scoped_release release;
          traj = integrate(cfg.initial_state(), cfg.model, cfg.integrator);
        }
        return moments_table(traj);
      },
      py::arg("config_yaml"), py::arg("t_end") = py::none(),
      "Integrates the run described by a YAML config; returns the moment series as arrays.");

  m.def(
      "check_assumptions",
      [](const std::string& yaml) {
        const auto cfg = harness::parse_config(yaml, "<python>");
        const auto rep = check_assumptions(cfg.model, cfg.assumption_samples, cfg.checker_radius(), cfg.seed);
        py::dict checks;
        for (const auto& c : rep.checks) checks[py::str(c.name)] = py::make_tuple(c.pass, c.observed, c.bound);
        return py::make_tuple(rep.all_pass(), checks);
      },
      py::arg("config_yaml"));

  m.def(
      "cstar",
      [](const std::string& yaml) { return cstar(harness::parse_config(yaml, "<python>").model); },
      py::arg("config_yaml"));

  m.def(
      "envelope",
      [](double alpha, double cstar, double g0, double t) { return envelope_value({alpha, cstar, g0}, t); },
      py::arg("alpha"), py::arg("cstar"), py::arg("g0"), py::arg("t"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::vector<std::string> full{"flockkin"};
        full.insert(full.end(), args.begin(), args.end());
        std::vector<const char*> argv;
        for (const auto& a : full) argv.push_back(a.c_str());
        std::ostringstream out, err;
        const int code = harness::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line tool in-process; returns (exit code, stdout, stderr).");
}
