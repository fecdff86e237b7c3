#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "gelfand/cli.hpp"
#include "gelfand/errors.hpp"
#include "gelfand/harness.hpp"

using namespace gelfand;

namespace {

RunConfig small_config() {
  RunConfig cfg = default_config();
  cfg.n = 10;
  cfg.pad_factor = 3;
  cfg.seed = 7;
  cfg.sweep.E = {0.5, 1.0};
  cfg.sweep.tau = {0.5, 1.0};
  cfg.sweep.m = {2.0, 4.0};
  cfg.sweep.scale = {1.0};
  cfg.fixtures.resize(2);
  return cfg;
}

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  REQUIRE(is.good());
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

CalibratedConstants loose_constants() {
  CalibratedConstants c;
  c.c1 = 10.0;
  c.A = c.B = 10.0;
  c.A_t = c.B_t = 10.0;
  return c;
}

}  // namespace

TEST_CASE("config round-trip and validation") {
  RunConfig cfg = small_config();
  save_config(cfg, "test_cfg.json");
  RunConfig back = load_config("test_cfg.json");
  CHECK(back.n == cfg.n);
  CHECK(back.half_width == cfg.half_width);
  CHECK(back.seed == cfg.seed);
  CHECK(back.fixtures.size() == cfg.fixtures.size());
  CHECK(back.sweep.E == cfg.sweep.E);
  CHECK(config_digest(back) == config_digest(cfg));
  std::remove("test_cfg.json");

  // unknown keys rejected at both levels
  {
    std::ofstream os("test_bad.json");
    os << R"({"domain": {"half_width": 0.5, "n": 10}, "surprise": 1})";
  }
  CHECK_THROWS_AS(load_config("test_bad.json"), ConfigError);
  {
    std::ofstream os("test_bad.json");
    os << R"({"domain": {"half_width": 0.5, "n": 10, "typo": 2}})";
  }
  CHECK_THROWS_AS(load_config("test_bad.json"), ConfigError);
  {
    std::ofstream os("test_bad.json");
    os << R"({"sweep": {"tau": [0.0]}})";
  }
  CHECK_THROWS_AS(load_config("test_bad.json"), ConfigError);
  std::remove("test_bad.json");
  CHECK_THROWS_AS(load_config("does_not_exist.json"), ConfigError);
}

TEST_CASE("degenerate fixture takes the zero-delta branch") {
  RunConfig cfg = small_config();
  cfg.fixtures.resize(1);
  SweepPoint pt;
  pt.E = 1.0;
  pt.tau = 0.5;
  pt.m = 4.0;
  pt.scale = 0.0;  // v2 == v1
  EstimateReport row = run_experiment(cfg, cfg.fixtures[0], pt, loose_constants());
  CHECK_FALSE(row.skipped());
  CHECK(row.delta == 0.0);
  CHECK(row.err_l2 == 0.0);
  CHECK(row.err_linf == 0.0);
  CHECK(row.pass_l2);
  CHECK(row.pass_linf);
  // rho uses the guarded logarithm at the delta floor
  CHECK(std::isfinite(row.rho));
  CHECK(row.rho > 50.0);
  bool floored = false;
  for (const auto& f : row.flags) floored |= (f == "delta_floored");
  CHECK(floored);
}

TEST_CASE("sweep emits one row per point and is byte-identical on reruns") {
  RunConfig cfg = small_config();
  CalibratedConstants c = loose_constants();
  SweepResult r1 = run_sweep(cfg, c);
  const std::size_t expect = cfg.fixtures.size() * cfg.sweep.scale.size() *
                             cfg.sweep.E.size() * cfg.sweep.tau.size() * cfg.sweep.m.size();
  REQUIRE(r1.rows.size() == expect);
  for (const auto& row : r1.rows) CHECK_FALSE(row.skipped());

  SweepResult r2 = run_sweep(cfg, c);
  write_csv_file(r1.rows, "test_sweep_a.csv");
  write_csv_file(r2.rows, "test_sweep_b.csv");
  CHECK(slurp("test_sweep_a.csv") == slurp("test_sweep_b.csv"));

  // read-back preserves every numeric column
  auto rows = read_csv_file("test_sweep_a.csv");
  REQUIRE(rows.size() == r1.rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].fixture == r1.rows[i].fixture);
    CHECK(rows[i].delta == r1.rows[i].delta);
    CHECK(rows[i].err_l2 == r1.rows[i].err_l2);
    CHECK(rows[i].bound_l2 == r1.rows[i].bound_l2);
    CHECK(rows[i].pass_l2 == r1.rows[i].pass_l2);
  }
  std::remove("test_sweep_a.csv");
  std::remove("test_sweep_b.csv");
}

TEST_CASE("calibration fits witnesses that clear the training set") {
  RunConfig cfg = small_config();
  cfg.sweep.E = {0.5, 1.0, 2.0};  // >= 3 energies
  cfg.fixtures = default_config().fixtures;  // 3 fixtures
  SweepResult training = run_sweep(cfg, loose_constants());
  CalibratedConstants c = calibrate(cfg, training);
  CHECK(c.c1 > 0.0);
  CHECK(c.c3 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(c.A > 0.0);
  CHECK(c.B > 0.0);
  HoldoutSummary hs = evaluate_holdout(training, c);
  CHECK(hs.rows > 0);
  CHECK(hs.pass_l2 == hs.rows);
  CHECK(hs.pass_linf == hs.applicable_linf);
  CHECK(hs.lemma_pass == hs.lemma_rows);
  CHECK(hs.all_pass());
  // provenance recorded
  CHECK(c.provenance.training_rows > 0);
  CHECK(c.provenance.config_digest == config_digest(cfg));

  // constants file round-trip
  save_constants(c, "test_constants.json");
  CalibratedConstants back = load_constants("test_constants.json");
  CHECK(back.c1 == c.c1);
  CHECK(back.A == c.A);
  CHECK(back.beta_t == c.beta_t);
  std::remove("test_constants.json");
}

TEST_CASE("calibration rejects degenerate or thin training sets") {
  RunConfig cfg = small_config();
  SweepResult thin;
  CHECK_THROWS_AS(calibrate(cfg, thin), CalibrationError);

  // all-identical-potentials training: zero deltas and errors everywhere
  RunConfig degen = small_config();
  degen.sweep.E = {0.5, 1.0, 2.0};
  degen.sweep.scale = {0.0};
  degen.fixtures = default_config().fixtures;
  SweepResult dtrain = run_sweep(degen, loose_constants(), false);
  CHECK_THROWS_AS(calibrate(degen, dtrain), CalibrationError);
}

TEST_CASE("max-based constants never decrease when rows are added") {
  RunConfig cfg = small_config();
  cfg.sweep.E = {0.5, 1.0, 2.0};
  cfg.fixtures = default_config().fixtures;
  SweepResult full = run_sweep(cfg, loose_constants());
  SweepResult subset = full;
  subset.rows.resize(full.rows.size() / 2 + 16);
  subset.lemma_samples.resize(full.lemma_samples.size() / 2);
  CalibratedConstants c_small = calibrate(cfg, subset);
  CalibratedConstants c_full = calibrate(cfg, full);
  CHECK(c_full.c1 >= c_small.c1 * (1.0 - 1e-12));
}

TEST_CASE("worker resolution order: cli beats env beats config") {
  RunConfig cfg;
  cfg.workers = 3;
  unsetenv("GELFAND_WORKERS");
  CHECK(effective_workers(cfg, 0) == 3);
  setenv("GELFAND_WORKERS", "5", 1);
  CHECK(effective_workers(cfg, 0) == 5);
  CHECK(effective_workers(cfg, 2) == 2);
  unsetenv("GELFAND_WORKERS");
  RunConfig none;
  none.workers = 0;
  CHECK(effective_workers(none, 0) == 1);
}

TEST_CASE("cli exit codes and determinism") {
  CHECK(run_cli({"sweep", "--config", "missing.json"}) == 2);
  CHECK(run_cli({"definitely-not-a-command"}) == 2);
  CHECK(run_cli({"verify", "--suite", "trivial"}) == 0);

  RunConfig cfg = small_config();
  cfg.fixtures.resize(1);
  cfg.sweep.E = {1.0};
  save_config(cfg, "test_cli_cfg.json");
  CHECK(run_cli({"sweep", "--config", "test_cli_cfg.json", "--seed", "7",
                 "--out", "test_cli_a.csv"}) == 0);
  CHECK(run_cli({"sweep", "--config", "test_cli_cfg.json", "--seed", "7",
                 "--out", "test_cli_b.csv"}) == 0);
  CHECK(slurp("test_cli_a.csv") == slurp("test_cli_b.csv"));

  CHECK(run_cli({"report", "--in", "test_cli_a.csv", "--outdir", "."}) == 0);
  CHECK(std::ifstream("summary.txt").good());
  CHECK(std::ifstream("bound_vs_E.csv").good());
  CHECK(std::ifstream("error_vs_delta.csv").good());

  for (const char* f : {"test_cli_cfg.json", "test_cli_a.csv", "test_cli_b.csv",
                        "test_cli_a.csv.lemmas", "test_cli_b.csv.lemmas",
                        "test_cli_a.csv.timings", "test_cli_b.csv.timings", "summary.txt",
                        "bound_vs_E.csv", "error_vs_delta.csv", "residual_vs_rho.csv"})
    std::remove(f);
}

TEST_CASE("energy is re-seeded away from discrete eigenvalues") {
  RunConfig cfg = small_config();
  cfg.fixtures.resize(1);
  cfg.fixtures[0].base.amplitude = 0.0;  // zero potential: exact degeneracy
  cfg.sweep.scale = {0.0};
  auto dom = build_domain(cfg.half_width, cfg.n);
  // smallest discrete eigenvalue of the zero-potential operator
  const double s = std::sin(M_PI / (2.0 * (cfg.n + 1)));
  const double lam = 3.0 * 4.0 / (dom->h * dom->h) * s * s;
  ComboMeasurement cm = measure_combo(cfg, cfg.fixtures[0], 0.0, lam, dom, false);
  CHECK_FALSE(cm.skipped);
  CHECK(cm.E != lam);  // jittered
  CHECK(std::abs(cm.E - lam) < 0.1 * (1.0 + lam));
}
