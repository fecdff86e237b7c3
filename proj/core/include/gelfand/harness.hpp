#ifndef GELFAND_HARNESS_HPP
#define GELFAND_HARNESS_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gelfand/constants.hpp"
#include "gelfand/estimator.hpp"
#include "gelfand/forward.hpp"
#include "gelfand/potential.hpp"

namespace gelfand {

struct FixtureSpec {
  std::string id;
  PotentialKind base_kind = PotentialKind::GaussianBump;
  GenerateParams base;
  PotentialKind diff_kind = PotentialKind::CosineBump;
  GenerateParams diff;
  std::uint64_t seed_offset = 0;  // combined with the run seed
};

struct SweepAxes {
  std::vector<double> E{0.0, 1.0, 4.0, 16.0};
  std::vector<double> tau{0.3, 0.6, 0.9, 1.0};
  std::vector<double> m{2.0, 3.5, 4.0, 5.0};
  std::vector<double> scale{1.0};
};

struct RunConfig {
  double half_width = 0.5;
  int n = 24;
  int pad_factor = 3;
  std::vector<FixtureSpec> fixtures;
  SweepAxes sweep;
  double delta_floor = 1e-300;
  double rho_cap_times_L = 25.0;
  std::uint64_t seed = 7;
  int workers = 0;  // 0: library default; env GELFAND_WORKERS overrides; CLI wins
  std::string constants_path = "constants.json";
  std::string output_path = "results.csv";
};

RunConfig default_config();
RunConfig load_config(const std::string& path);
void save_config(const RunConfig& cfg, const std::string& path);
std::string config_digest(const RunConfig& cfg);

/// One sweep row. `m` serves both estimate modes; the sup-norm columns are
/// NaN when m <= 3.
struct EstimateReport {
  std::string fixture;
  double E = 0.0;
  double tau = 0.0;
  double m = 0.0;
  double scale = 1.0;
  double N = 0.0;
  double N_Hm = 0.0;
  double N_Wm = 0.0;
  double delta = 0.0;
  double rho = 0.0;
  double r_l2 = 0.0;
  double r_linf = 0.0;
  double err_l2 = 0.0;
  double err_linf = 0.0;
  double bound_l2 = 0.0;          // stability estimate RHS, L2 mode
  double bound_linf = 0.0;        // stability estimate RHS, sup mode
  double intermediate_l2 = 0.0;
  double intermediate_linf = 0.0;
  double residual_identity = 0.0;
  double residual_scattering = 0.0;
  bool pass_l2 = false;
  bool pass_linf = false;
  std::vector<std::string> flags;  // skipped, rho_capped, delta_floored, ...
  double timing_ms = 0.0;          // excluded from the deterministic CSV

  bool skipped() const;
};

struct SweepPoint {
  double E = 0.0;
  double tau = 0.5;
  double m = 4.0;
  double scale = 1.0;
};

/// Scalar samples collected while measuring a fixture/energy combination;
/// inputs to calibration.
struct LemmaSample {
  std::string fixture;
  double E = 0.0, rho = 0.0, xi_norm = 0.0;
  double implied_c1 = 0.0;
  double implied_c6 = 0.0;  // 0 when no scattering residual was computed
  double implied_c5 = 0.0;  // sup|mu| / (1+N)
  double N = 0.0;
};

/// Heavy per-(fixture, scale, E) measurements shared by all (tau, m) rows.
struct ComboMeasurement {
  std::string fixture;
  double scale = 1.0;
  double E_requested = 0.0;
  double E = 0.0;  // after re-seeding jitter
  bool skipped = false;
  std::string skip_reason;
  double delta = 0.0;
  double N = 0.0;
  double err_l2 = 0.0;
  double err_linf = 0.0;
  Potential v1, v2, vdiff;
  std::optional<Spectrum> spectrum_diff;
  std::map<double, double> residual_identity_by_tau;
  std::map<double, double> residual_scattering_by_tau;
  std::map<double, std::vector<std::string>> flags_by_tau;
  std::vector<LemmaSample> lemma_samples;
};

struct SweepResult {
  std::vector<EstimateReport> rows;
  std::vector<LemmaSample> lemma_samples;
};

/// Build (v1, v2) for a fixture at a perturbation scale.
std::pair<Potential, Potential> make_fixture_pair(const RunConfig& cfg, const FixtureSpec& fx,
                                                  double scale, const DomainPtr& dom);

/// Full pipeline for one sweep point (standalone; sweeps share the heavy
/// measurements internally instead).
EstimateReport run_experiment(const RunConfig& cfg, const FixtureSpec& fixture,
                              const SweepPoint& point, const CalibratedConstants& constants);

/// Heavy measurement of one (fixture, scale, E) combination.
ComboMeasurement measure_combo(const RunConfig& cfg, const FixtureSpec& fx, double scale,
                               double E, const DomainPtr& dom, bool with_faddeev = true);

/// Rows for all sweep points, deterministic order.
SweepResult run_sweep(const RunConfig& cfg, const CalibratedConstants& constants,
                      bool with_faddeev = true);

/// Max-implied constants (inflated 1.5x) and a constrained fit of the
/// estimate constants with margin 1.1 on the training rows.
CalibratedConstants calibrate(const RunConfig& cfg, const SweepResult& training);

struct HoldoutSummary {
  int rows = 0;
  int pass_l2 = 0;
  int pass_linf = 0;
  int applicable_linf = 0;
  int lemma_rows = 0;
  int lemma_pass = 0;
  bool all_pass() const;
};

/// Re-evaluate rows and lemma samples against a constants record.
HoldoutSummary evaluate_holdout(const SweepResult& result, const CalibratedConstants& constants);

void write_csv(const std::vector<EstimateReport>& rows, std::ostream& os);
void write_csv_file(const std::vector<EstimateReport>& rows, const std::string& path);
std::vector<EstimateReport> read_csv_file(const std::string& path);

/// lemma-sample side table (inputs to calibration)
void write_lemma_csv_file(const std::vector<LemmaSample>& samples, const std::string& path);
std::vector<LemmaSample> read_lemma_csv_file(const std::string& path);

/// recompute pass flags and bounds of existing rows under new constants
void apply_constants(std::vector<EstimateReport>& rows, const CalibratedConstants& constants);

int effective_workers(const RunConfig& cfg, int cli_override);

}  // namespace gelfand

#endif
