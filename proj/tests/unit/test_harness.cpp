#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <set>
#include <unistd.h>
#include <sstream>

#include "flockkin/harness/commands.hpp"
#include "flockkin/harness/config.hpp"
#include "flockkin/harness/snapshot_io.hpp"
#include "oracles.hpp"

using namespace flockkin;
using namespace flockkin::harness;
namespace fs = std::filesystem;

namespace {

const char* equality_yaml = R"(seed: 1
model:
  dimension: 1
  kernel: {preset: constant, level: 1.0}
  coupling: {preset: linear}
  repulsion: {preset: zero}
initial:
  preset: explicit
  x: [[0.0], [1.0]]
  v: [[1.0], [-1.0]]
integrator: {dt: 0.01, t_end: 2.0, error_tol: 1.0e-12}
)";

const char* small_yaml = R"(seed: 4
model:
  dimension: 2
  kernel: {preset: cucker_smale, amplitude: 1.0, beta: 0.5}
  repulsion: {preset: saturated, cap: 0.05, softening: 0.01}
initial: {preset: uniform_ball, n: 24, v_center: [0.5, 0.0], v_radius: 0.5}
integrator: {dt: 0.05, t_end: 1.0, error_tol: 1.0e-9}
)";

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() / ("flockkin_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name, const std::string& text) const {
    const auto p = path / name;
    std::ofstream(p) << text;
    return p.string();
  }
  std::string operator/(const std::string& rel) const { return (path / rel).string(); }
};

struct Cli {
  int code = 0;
  std::string out, err;
};

Cli run(std::vector<std::string> args) {
  args.insert(args.begin(), "flockkin");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Cli r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::vector<std::vector<double>> read_csv(const std::string& path) {
  std::ifstream in(path);
  std::string line;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || std::isalpha(static_cast<unsigned char>(line[0]))) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST_CASE("config parsing") {
  const auto cfg = parse_config(small_yaml);
  CHECK(cfg.seed == 4);
  CHECK(cfg.model.dimension == 2);
  CHECK(cfg.initial.n == 24);
  CHECK(cfg.integrator.dt == 0.05);
  CHECK(cfg.model.f_star == 0.05);
  CHECK(cfg.model.phi_star > 0.0);

  const auto eq = parse_config(equality_yaml);
  REQUIRE(eq.explicit_state.has_value());
  CHECK(eq.initial_state().size() == 2);
  CHECK(eq.initial_state().v(1, 0) == -1.0);

  // Resolved form parses back to the same settings.
  const auto again = parse_config(resolved_yaml(cfg));
  CHECK(again.seed == cfg.seed);
  CHECK(describe(again.model) == describe(cfg.model));
  CHECK(again.initial_state() == cfg.initial_state());

  try {
    parse_config("seed: 1\nmodel:\n  dimension: 2\n  colour: red\n");
    FAIL("unknown key accepted");
  } catch (const ConfigError& e) {
    CHECK(e.line == 4);
  }
  CHECK_THROWS_AS(parse_config("seed: [1, 2]\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("integrator: {dt: -1}\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("model: {coupling: {preset: power, alpha: 1.3}}\n"), ConfigError);
}

TEST_CASE("snapshot round trip is bitwise") {
  auto cfg = parse_config(small_yaml);
  const auto s = cfg.initial_state();
  const auto text = format_snapshot(s, model_hash(cfg.model), 4);
  const auto back = parse_snapshot(text);
  CHECK(back.state == s);
  CHECK(back.header.n == 24);
  CHECK(back.header.model_hash == model_hash(cfg.model));
  CHECK(model_hash(cfg.model).size() == 16);

  auto truncated = text.substr(0, text.rfind('\n', text.size() - 2) + 1);
  CHECK_THROWS_AS(parse_snapshot(truncated), ParseError);
  CHECK_THROWS_AS(parse_snapshot("garbage\n"), ParseError);

  const DiscreteMeasure mu(2, {0.0, 1.0, 0.125, -3.0}, {0.25, 0.75});
  TempDir dir;
  write_measure(dir / "m.csv", mu);
  const auto loaded = read_measure(dir / "m.csv");
  CHECK_FALSE(loaded.from_snapshot);
  CHECK(loaded.measure.weight(1) == 0.75);
  CHECK(loaded.measure.point(1)[1] == -3.0);

  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("simulate command") {
  TempDir dir;
  const auto config = dir.file("eq.yaml", equality_yaml);
  const auto r = run({"simulate", "--config", config, "--out", dir / "run"});
  REQUIRE(r.code == 0);
  const auto rows = read_csv(dir / "run/moments.csv");
  REQUIRE(rows.size() > 10);
  // Columns: t, V1, X1, V2, X2, Gf, ...
  const double gf0 = rows.front()[5];
  for (const auto& row : rows) CHECK(row[5] == doctest::Approx(oracle::two_body_gf(gf0, 1.0, row[0])).epsilon(1e-6));

  for (const char* f : {"config.resolved.yaml", "manifest.json", "snapshots/snap_000000.csv"})
    CHECK(fs::exists(dir / std::string("run/") + f));
  const auto manifest = nlohmann::json::parse(read_text(dir / "run/manifest.json"));
  CHECK(manifest["status"] == "complete");
  for (const auto& f : manifest["files"]) CHECK(sha256_file(dir / ("run/" + f["path"].get<std::string>())) == f["sha256"]);

  // Same config twice gives identical bytes.
  REQUIRE(run({"simulate", "--config", config, "--out", dir / "run2"}).code == 0);
  CHECK(read_text(dir / "run/moments.csv") == read_text(dir / "run2/moments.csv"));

  const auto zero = dir.file("zero.yaml", std::string(equality_yaml) + "output: {snapshot_stride: 1}\n");
  std::string z = read_text(zero);
  z.replace(z.find("t_end: 2.0"), 10, "t_end: 0.0");
  const auto zcfg = dir.file("zero2.yaml", z);
  REQUIRE(run({"simulate", "--config", zcfg, "--out", dir / "zero"}).code == 0);
  CHECK(read_csv(dir / "zero/moments.csv").size() == 1);
  CHECK(fs::exists(dir / "zero/snapshots/snap_000000.csv"));
  CHECK_FALSE(fs::exists(dir / "zero/snapshots/snap_000001.csv"));
}

TEST_CASE("thread count does not change outputs") {
  TempDir dir;
  const auto config = dir.file("small.yaml", small_yaml);
  REQUIRE(run({"simulate", "--config", config, "--out", dir / "a", "--threads", "1"}).code == 0);
  REQUIRE(run({"simulate", "--config", config, "--out", dir / "b", "--threads", "3"}).code == 0);
  CHECK(read_text(dir / "a/moments.csv") == read_text(dir / "b/moments.csv"));
  REQUIRE(run({"simulate", "--config", config, "--out", dir / "c", "--seed", "5"}).code == 0);
  CHECK(read_text(dir / "a/moments.csv") != read_text(dir / "c/moments.csv"));
}

TEST_CASE("w1 command") {
  TempDir dir;
  const auto a = dir.file("a.csv", "weight,p_0\n1,0\n");
  const auto b = dir.file("b.csv", "weight,p_0\n1,3\n");
  auto r = run({"w1", a, b});
  CHECK(r.code == 0);
  CHECK(r.out == "3.000000000000\n");
  r = run({"w1", a, a});
  CHECK(r.out == "0.000000000000\n");

  const DiscreteMeasure mu(2, {0.0, 0.0, 1.0, 2.0, -1.0, 0.5}, {0.2, 0.5, 0.3});
  const DiscreteMeasure nu(2, {0.5, 0.5, 2.0, 0.0, 0.0, -1.0}, {0.4, 0.4, 0.2});
  write_measure(dir / "mu.csv", mu);
  write_measure(dir / "nu.csv", nu);
  for (const char* metric : {"euclidean", "sum"}) {
    r = run({"w1", dir / "mu.csv", dir / "nu.csv", "--metric", metric});
    REQUIRE(r.code == 0);
    const auto g = std::string(metric) == "sum" ? GroundMetric::sum_of_norms(1) : GroundMetric::euclidean();
    CHECK(std::stod(r.out) == doctest::Approx(w1_bruteforce(mu, nu, g)).epsilon(1e-9));
  }

  // Snapshots of a run are valid operands.
  const auto config = dir.file("eq.yaml", equality_yaml);
  REQUIRE(run({"simulate", "--config", config, "--out", dir / "run"}).code == 0);
  r = run({"w1", dir / "run/snapshots/snap_000000.csv", dir / "run/snapshots/snap_000000.csv"});
  CHECK(r.code == 0);
  CHECK(r.out == "0.000000000000\n");

  CHECK(run({"w1", a, dir / "missing.csv"}).code == 2);
  const auto bad = dir.file("bad.csv", "weight,p_0\n0.5,0\n");
  CHECK(run({"w1", a, bad}).code == 2);
  const auto other_dim = dir.file("d2.csv", "weight,p_0,p_1\n1,0,0\n");
  CHECK(run({"w1", a, other_dim}).code == 2);
}

TEST_CASE("verify and check-assumptions commands") {
  TempDir dir;
  const auto eq = dir.file("eq.yaml", equality_yaml);
  auto r = run({"verify", "--config", eq, "--suite", "decay", "--out", dir / "v"});
  CHECK(r.code == 0);
  const auto report = nlohmann::json::parse(read_text(dir / "v/report.json"));
  CHECK(report["pass"] == true);
  CHECK(fs::exists(dir / "v/assumptions.json"));

  const auto bad = dir.file("bad.yaml", std::string(small_yaml) + "output: {dir: unused}\n");
  std::string text = read_text(bad);
  text.replace(text.find("cap: 0.05"), 9, "cap: 3.00");
  const auto adversarial = dir.file("adv.yaml", text);
  r = run({"verify", "--config", adversarial, "--suite", "decay", "--out", dir / "adv"});
  CHECK(r.code == 2);
  CHECK(fs::exists(dir / "adv/assumptions.json"));
  CHECK_FALSE(fs::exists(dir / "adv/snapshots"));
  CHECK(run({"check-assumptions", "--config", adversarial, "--out", dir / "adv2"}).code == 2);
  CHECK(run({"check-assumptions", "--config", eq, "--out", dir / "ok"}).code == 0);

  CHECK(run({"verify", "--config", eq, "--suite", "nonsense"}).code == 2);
  CHECK(run({"verify", "--config", dir / "none.yaml"}).code == 2);
  const auto typo = dir.file("typo.yaml", "seed: 1\nmodle: {}\n");
  r = run({"simulate", "--config", typo});
  CHECK(r.code == 2);
  CHECK(r.err.find("2") != std::string::npos);

  // A step budget that cannot reach t_end is a runtime failure with partial output.
  std::string capped = equality_yaml;
  capped.replace(capped.find("error_tol: 1.0e-12}"), 19, "error_tol: 1.0e-12, max_steps: 5}");
  const auto cap = dir.file("cap.yaml", capped);
  r = run({"simulate", "--config", cap, "--out", dir / "cap"});
  CHECK(r.code == 3);
  const auto manifest = nlohmann::json::parse(read_text(dir / "cap/manifest.json"));
  CHECK(manifest["status"] == "partial");
}

TEST_CASE("verify suites on a small run") {
  TempDir dir;
  std::string text = small_yaml;
  text += R"(studies:
  gamma: {window: 0.25}
  stability: {perturbations: [0.0, 1.0e-3], times: [0, 0.5, 1]}
  meanfield: {n_list: [8, 16, 32], times: [0, 0.5], seeds: 2}
  flocking: {spacing: 0.25}
)";
  const auto config = dir.file("s.yaml", text);
  const auto r = run({"verify", "--config", config, "--suite", "all", "--out", dir / "v"});
  INFO(r.out << r.err);
  CHECK((r.code == 0 || r.code == 1));
  const auto report = nlohmann::json::parse(read_text(dir / "v/report.json"));
  std::set<std::string> names;
  for (const auto& v : report["verdicts"]) names.insert(v["name"].get<std::string>());
  for (const char* n : {"decay", "gamma", "support", "stability-zero", "stability-rate", "flocking-coupling"})
    CHECK(names.count(n) == 1);
  CHECK(fs::exists(dir / "v/series_meanfield.csv"));
}
