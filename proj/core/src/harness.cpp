#include "gelfand/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "gelfand/errors.hpp"
#include "gelfand/faddeev.hpp"
#include "gelfand/identity.hpp"

namespace gelfand {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

PotentialKind kind_from_string(const std::string& s) {
  if (s == "gaussian_bump") return PotentialKind::GaussianBump;
  if (s == "cosine_bump") return PotentialKind::CosineBump;
  if (s == "random_bandlimited") return PotentialKind::RandomBandlimited;
  throw ConfigError("unknown potential kind '" + s + "'");
}

std::string kind_to_string(PotentialKind k) {
  switch (k) {
    case PotentialKind::GaussianBump: return "gaussian_bump";
    case PotentialKind::CosineBump: return "cosine_bump";
    case PotentialKind::RandomBandlimited: return "random_bandlimited";
  }
  return "?";
}

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError("config: unknown key '" + it.key() + "' in " + where);
}

GenerateParams params_from_json(const json& j, const std::string& where) {
  reject_unknown_keys(j, {"kind", "amplitude", "center", "width", "margin_cells", "max_mode"},
                      where);
  GenerateParams p;
  p.amplitude = j.value("amplitude", 1.0);
  if (j.contains("center")) {
    const auto& c = j.at("center");
    if (!c.is_array() || c.size() != 3)
      throw ConfigError("config: center must be a 3-array in " + where);
    p.center = Eigen::Vector3d(c[0].get<double>(), c[1].get<double>(), c[2].get<double>());
  }
  p.width = j.value("width", 0.2);
  p.margin_cells = j.value("margin_cells", 2);
  p.max_mode = j.value("max_mode", 2);
  return p;
}

json params_to_json(PotentialKind kind, const GenerateParams& p) {
  return json{{"kind", kind_to_string(kind)},
              {"amplitude", p.amplitude},
              {"center", {p.center(0), p.center(1), p.center(2)}},
              {"width", p.width},
              {"margin_cells", p.margin_cells},
              {"max_mode", p.max_mode}};
}

std::string fmt(double v) {
  char buf[40];
  if (std::isnan(v)) return "nan";
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

bool EstimateReport::skipped() const {
  return std::find(flags.begin(), flags.end(), "skipped") != flags.end();
}

bool HoldoutSummary::all_pass() const {
  return rows > 0 && pass_l2 == rows && pass_linf == applicable_linf &&
         (lemma_rows == 0 || lemma_pass == lemma_rows);
}

RunConfig default_config() {
  RunConfig cfg;
  cfg.fixtures.clear();
  FixtureSpec a;
  a.id = "gauss_cos";
  a.base_kind = PotentialKind::GaussianBump;
  a.base.amplitude = 0.6;
  a.base.width = 0.11;
  a.base.center = Eigen::Vector3d(0.08, -0.04, 0.02);
  a.diff_kind = PotentialKind::CosineBump;
  a.diff.amplitude = 0.25;
  a.diff.width = 0.2;
  a.diff.center = Eigen::Vector3d(-0.06, 0.08, -0.04);
  a.seed_offset = 11;
  cfg.fixtures.push_back(a);

  FixtureSpec b;
  b.id = "cos_gauss";
  b.base_kind = PotentialKind::CosineBump;
  b.base.amplitude = -0.5;
  b.base.width = 0.2;
  b.base.center = Eigen::Vector3d(-0.08, 0.0, 0.06);
  b.diff_kind = PotentialKind::GaussianBump;
  b.diff.amplitude = 0.2;
  b.diff.width = 0.1;
  b.diff.center = Eigen::Vector3d(0.1, 0.06, 0.0);
  b.seed_offset = 23;
  cfg.fixtures.push_back(b);

  FixtureSpec c;
  c.id = "rand_band";
  c.base_kind = PotentialKind::RandomBandlimited;
  c.base.amplitude = 0.45;
  c.base.max_mode = 2;
  c.diff_kind = PotentialKind::RandomBandlimited;
  c.diff.amplitude = 0.18;
  c.diff.max_mode = 1;
  c.seed_offset = 37;
  cfg.fixtures.push_back(c);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("load_config: cannot open " + path);
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw ConfigError("load_config: parse error: " + std::string(e.what()));
  }
  reject_unknown_keys(j,
                      {"domain", "pad_factor", "fixtures", "sweep", "delta_floor",
                       "rho_cap_times_L", "seed", "workers", "constants_path", "output_path"},
                      "top level");
  RunConfig cfg;
  cfg.fixtures.clear();
  if (j.contains("domain")) {
    reject_unknown_keys(j["domain"], {"half_width", "n"}, "domain");
    cfg.half_width = j["domain"].value("half_width", cfg.half_width);
    cfg.n = j["domain"].value("n", cfg.n);
  }
  cfg.pad_factor = j.value("pad_factor", cfg.pad_factor);
  cfg.delta_floor = j.value("delta_floor", cfg.delta_floor);
  cfg.rho_cap_times_L = j.value("rho_cap_times_L", cfg.rho_cap_times_L);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.workers = j.value("workers", cfg.workers);
  cfg.constants_path = j.value("constants_path", cfg.constants_path);
  cfg.output_path = j.value("output_path", cfg.output_path);
  if (j.contains("sweep")) {
    reject_unknown_keys(j["sweep"], {"E", "tau", "m", "scale"}, "sweep");
    const auto& s = j["sweep"];
    if (s.contains("E")) cfg.sweep.E = s["E"].get<std::vector<double>>();
    if (s.contains("tau")) cfg.sweep.tau = s["tau"].get<std::vector<double>>();
    if (s.contains("m")) cfg.sweep.m = s["m"].get<std::vector<double>>();
    if (s.contains("scale")) cfg.sweep.scale = s["scale"].get<std::vector<double>>();
  }
  if (j.contains("fixtures")) {
    for (const auto& f : j["fixtures"]) {
      reject_unknown_keys(f, {"id", "base", "diff", "seed_offset"}, "fixture");
      FixtureSpec fx;
      fx.id = f.at("id").get<std::string>();
      fx.base_kind = kind_from_string(f.at("base").at("kind").get<std::string>());
      fx.base = params_from_json(f.at("base"), "fixture " + fx.id + " base");
      fx.diff_kind = kind_from_string(f.at("diff").at("kind").get<std::string>());
      fx.diff = params_from_json(f.at("diff"), "fixture " + fx.id + " diff");
      fx.seed_offset = f.value("seed_offset", std::uint64_t{0});
      cfg.fixtures.push_back(fx);
    }
  } else {
    cfg.fixtures = default_config().fixtures;
  }
  // basic validation against module preconditions
  if (cfg.n < 8) throw ConfigError("config: domain.n must be >= 8");
  if (!(cfg.half_width > 0.0)) throw ConfigError("config: domain.half_width must be positive");
  for (double t : cfg.sweep.tau)
    if (!(t > 0.0) || t > 1.0) throw ConfigError("config: tau values must lie in (0, 1]");
  for (double m : cfg.sweep.m)
    if (!(m > 0.0)) throw ConfigError("config: m values must be positive");
  return cfg;
}

void save_config(const RunConfig& cfg, const std::string& path) {
  json j;
  j["domain"] = {{"half_width", cfg.half_width}, {"n", cfg.n}};
  j["pad_factor"] = cfg.pad_factor;
  j["delta_floor"] = cfg.delta_floor;
  j["rho_cap_times_L"] = cfg.rho_cap_times_L;
  j["seed"] = cfg.seed;
  j["workers"] = cfg.workers;
  j["constants_path"] = cfg.constants_path;
  j["output_path"] = cfg.output_path;
  j["sweep"] = {{"E", cfg.sweep.E}, {"tau", cfg.sweep.tau}, {"m", cfg.sweep.m},
                {"scale", cfg.sweep.scale}};
  j["fixtures"] = json::array();
  for (const auto& fx : cfg.fixtures) {
    json f;
    f["id"] = fx.id;
    f["base"] = params_to_json(fx.base_kind, fx.base);
    f["diff"] = params_to_json(fx.diff_kind, fx.diff);
    f["seed_offset"] = fx.seed_offset;
    j["fixtures"].push_back(f);
  }
  std::ofstream os(path);
  if (!os) throw ConfigError("save_config: cannot open " + path);
  os << j.dump(2) << "\n";
}

std::string config_digest(const RunConfig& cfg) {
  std::ostringstream ss;
  ss << cfg.half_width << "|" << cfg.n << "|" << cfg.pad_factor << "|" << cfg.seed;
  for (const auto& fx : cfg.fixtures) ss << "|" << fx.id << ":" << fx.seed_offset;
  for (double e : cfg.sweep.E) ss << ",E" << e;
  for (double t : cfg.sweep.tau) ss << ",t" << t;
  for (double m : cfg.sweep.m) ss << ",m" << m;
  for (double s : cfg.sweep.scale) ss << ",s" << s;
  // FNV-1a of the canonical string
  std::uint64_t hash = 1469598103934665603ull;
  for (unsigned char ch : ss.str()) {
    hash ^= ch;
    hash *= 1099511628211ull;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

int effective_workers(const RunConfig& cfg, int cli_override) {
  if (cli_override > 0) return cli_override;
  if (const char* env = std::getenv("GELFAND_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) return w;
  }
  if (cfg.workers > 0) return cfg.workers;
  return 1;
}

std::pair<Potential, Potential> make_fixture_pair(const RunConfig& cfg, const FixtureSpec& fx,
                                                  double scale, const DomainPtr& dom) {
  const std::uint64_t s1 = cfg.seed * 1000003ull + fx.seed_offset;
  const std::uint64_t s2 = s1 * 16777619ull + 1ull;
  Potential v1 = generate(dom, fx.base_kind, fx.base, s1);
  GenerateParams dp = fx.diff;
  dp.amplitude *= scale;
  Potential diff = generate(dom, fx.diff_kind, dp, s2);
  Potential v2 = lincomb(1.0, v1, 1.0, diff);
  return {std::move(v1), std::move(v2)};
}

namespace {

/// guard the energy against near-eigenvalues, jittering per the run policy
double guarded_energy(const DomainPtr& dom, const Potential& v1, const Potential& v2, double E,
                      int max_attempts, std::string* fail_reason) {
  double e = E;
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    try {
      check_not_eigenvalue(dom, v1, e);
      check_not_eigenvalue(dom, v2, e);
      return e;
    } catch (const NearEigenvalueError&) {
      e += 1e-3 * (1.0 + std::abs(e));
    }
  }
  if (fail_reason) *fail_reason = "eigenvalue guard failed after jitter attempts";
  return std::numeric_limits<double>::quiet_NaN();
}

Eigen::Vector3d probe_xi(const PaddedLattice& lat, double E, double rho) {
  const double reach = 2.0 * std::sqrt(E + rho * rho);
  const double dxi = lat.freq_spacing();
  if (reach >= dxi * 1.0000001) return {dxi, 0.0, 0.0};
  return Eigen::Vector3d::Zero();
}

}  // namespace

ComboMeasurement measure_combo(const RunConfig& cfg, const FixtureSpec& fx, double scale,
                               double E, const DomainPtr& dom, bool with_faddeev) {
  ComboMeasurement out;
  out.fixture = fx.id;
  out.scale = scale;
  out.E_requested = E;

  auto [v1, v2] = make_fixture_pair(cfg, fx, scale, dom);
  out.v1 = v1;
  out.v2 = v2;
  out.vdiff = lincomb(-1.0, v1, 1.0, v2);
  out.N = std::max(grid_linf(v1), grid_linf(v2));
  out.err_l2 = grid_l2(out.vdiff);
  out.err_linf = grid_linf(out.vdiff);

  std::string guard_fail;
  const double e_used = guarded_energy(dom, v1, v2, E, 5, &guard_fail);
  if (std::isnan(e_used)) {
    out.skipped = true;
    out.skip_reason = guard_fail;
    return out;
  }
  out.E = e_used;

  const bool trivial_diff = out.err_linf == 0.0;
  {
    DirichletSolver s1(dom, v1, e_used);
    DirichletSolver s2(dom, v2, e_used);
    out.delta = trivial_diff ? 0.0 : delta_norm_lowrank(s1, s2, out.vdiff);

    if (!trivial_diff) out.spectrum_diff = fourier_transform(out.vdiff, 2);

    // inexpensive lemma samples: low-frequency bound over a (rho, xi) batch
    if (!trivial_diff) {
      const PaddedLattice lat(dom, 2);
      const std::array<double, 4> rho_set = {1.0, 1.5, 2.25, 3.375};
      for (double rho : rho_set) {
        const double reach = 2.0 * std::sqrt(e_used + rho * rho);
        const double dxi = lat.freq_spacing();
        std::vector<Eigen::Vector3d> xis;
        for (const auto& cand :
             {Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(dxi, 0, 0), Eigen::Vector3d(0, 0, dxi),
              Eigen::Vector3d(dxi, dxi, 0), Eigen::Vector3d(dxi, 0, dxi),
              Eigen::Vector3d(dxi, dxi, dxi), Eigen::Vector3d(2 * dxi, 0, 0),
              Eigen::Vector3d(2 * dxi, dxi, 0)}) {
          if (cand.norm() < reach * 0.999) xis.push_back(cand);
        }
        for (const auto& xi : xis) {
          MomentumPair pair = make_theta_pair(e_used, rho, xi);
          FourierBoundRecord rec = verify_fourier_bound(v1, v2, pair, out.delta, out.N, 1.0);
          LemmaSample ls;
          ls.fixture = fx.id;
          ls.E = e_used;
          ls.rho = rho;
          ls.xi_norm = xi.norm();
          ls.implied_c1 = rec.implied_c1;
          ls.N = out.N;
          out.lemma_samples.push_back(ls);
        }
      }
    }

    // per-tau identity and scattering residuals (Faddeev route)
    if (with_faddeev && !trivial_diff) {
      const double L = dom->L;
      const double rho_cap = cfg.rho_cap_times_L / L;
      for (double tau : cfg.sweep.tau) {
        std::vector<std::string> flags;
        if (tau >= 1.0) {
          out.flags_by_tau[tau] = {"statement_mode"};
          out.residual_identity_by_tau[tau] = kNaN;
          out.residual_scattering_by_tau[tau] = kNaN;
          continue;
        }
        const double delta_eff = std::max(out.delta, cfg.delta_floor);
        if (out.delta < cfg.delta_floor) flags.push_back("delta_floored");
        RhoChoice rc = choose_rho(tau, delta_eff, L);
        double rho = rc.rho;
        if (rho > rho_cap) {
          rho = rho_cap;
          flags.push_back("rho_capped");
        }
        if (!(rho > 0.0)) {
          out.flags_by_tau[tau] = flags;
          out.residual_identity_by_tau[tau] = kNaN;
          out.residual_scattering_by_tau[tau] = kNaN;
          continue;
        }
        try {
          const PaddedLattice lat(dom, cfg.pad_factor);
          const Eigen::Vector3d xi = probe_xi(lat, e_used, rho);
          MomentumPair pair = make_theta_pair(e_used, rho, xi);
          SolveMuOptions mopt;
          mopt.pad_factor = cfg.pad_factor;
          FaddeevState s2k = solve_mu(v2, pair.k, mopt);
          FaddeevState s1k = solve_mu(v1, pair.k, mopt);
          FaddeevState s1ml = solve_mu(v1, -pair.l, mopt);
          IdentityCheck chk = verify_scattering_residual(v1, v2, s1k, s2k, pair);
          const cplx vol = hdiff_volume(v1, v2, s1ml, s2k, pair);
          const cplx bnd = hdiff_boundary(s1, s2, s1ml, s2k, pair, v1);
          out.residual_identity_by_tau[tau] = relative_mismatch(vol, bnd);
          out.residual_scattering_by_tau[tau] = chk.residual_scattering;

          LemmaSample ls;
          ls.fixture = fx.id;
          ls.E = e_used;
          ls.rho = rho;
          ls.xi_norm = pair.xi.norm();
          ls.implied_c1 = 0.0;
          ls.implied_c6 = chk.implied_constant;
          ls.implied_c5 =
              std::max(sup_abs_mu(s1k), std::max(sup_abs_mu(s2k), sup_abs_mu(s1ml))) /
              (1.0 + out.N);
          ls.N = out.N;
          out.lemma_samples.push_back(ls);
        } catch (const NoConvergenceError&) {
          flags.push_back("mu_not_contracting");
          out.residual_identity_by_tau[tau] = kNaN;
          out.residual_scattering_by_tau[tau] = kNaN;
        }
        out.flags_by_tau[tau] = flags;
      }
    }
  }
  return out;
}

namespace {

EstimateReport row_from_combo(const RunConfig& cfg, const ComboMeasurement& cm, double tau,
                              double m, const CalibratedConstants& c) {
  EstimateReport row;
  row.fixture = cm.fixture;
  row.E = cm.skipped ? cm.E_requested : cm.E;
  row.tau = tau;
  row.m = m;
  row.scale = cm.scale;
  if (cm.skipped) {
    row.flags.push_back("skipped");
    row.N_Hm = row.N_Wm = row.delta = row.rho = kNaN;
    row.r_l2 = row.r_linf = row.err_l2 = row.err_linf = kNaN;
    row.bound_l2 = row.bound_linf = row.intermediate_l2 = row.intermediate_linf = kNaN;
    row.residual_identity = row.residual_scattering = kNaN;
    return row;
  }
  const double dom_L = cm.v1.domain->L;
  row.N = cm.N;
  row.delta = cm.delta;
  row.err_l2 = cm.err_l2;
  row.err_linf = cm.err_linf;
  row.N_Hm = cm.spectrum_diff ? spectral_norm(*cm.spectrum_diff, NormKind::Hm, m) : 0.0;
  row.N_Wm = cm.spectrum_diff ? spectral_norm(*cm.spectrum_diff, NormKind::Wm, m) : 0.0;

  const double delta_eff = std::max(cm.delta, cfg.delta_floor);
  if (cm.delta < cfg.delta_floor) row.flags.push_back("delta_floored");
  RhoChoice rc = choose_rho(tau, delta_eff, dom_L);
  row.rho = rc.degenerate ? 0.0 : rc.rho;
  if (rc.degenerate) row.flags.push_back("statement_mode");

  const double s = row.E + row.rho * row.rho;
  if (s > 0.0) {
    row.r_l2 = choose_r_l2(row.N, row.E, row.rho, c.c1).r;
    row.r_linf = choose_r_linf(row.N, row.E, row.rho, c.c1, c.c3).r;
    IntermediateBound ib2 =
        intermediate_l2(row.E, row.rho, delta_eff, row.N, row.N_Hm, m, c.c1, dom_L, c.r_star);
    row.intermediate_l2 = ib2.bound;
    if (!ib2.floor_ok) row.flags.push_back("below_floor");
    if (m > 3.0) {
      row.intermediate_linf = intermediate_linf(row.E, row.rho, delta_eff, row.N, row.N_Wm, m,
                                                c.c1, c.c3, dom_L, c.r_star)
                                  .bound;
    } else {
      row.intermediate_linf = kNaN;
    }
  } else {
    row.r_l2 = row.r_linf = kNaN;
    row.intermediate_l2 = row.intermediate_linf = kNaN;
    row.flags.push_back("no_momentum");
  }

  EstimatorParams p;
  p.tau = tau;
  p.E = row.E;
  p.delta = delta_eff;
  p.N = row.N;
  p.N_Hm = row.N_Hm;
  p.N_Wm = row.N_Wm;
  p.m = m;
  p.L = dom_L;
  p.constants = c;
  row.bound_l2 = stability_bound_l2(p);
  row.pass_l2 = row.err_l2 <= row.bound_l2;
  if (m > 3.0) {
    row.bound_linf = stability_bound_linf(p);
    row.pass_linf = row.err_linf <= row.bound_linf;
  } else {
    row.bound_linf = kNaN;
    row.pass_linf = true;  // not applicable
  }

  auto it = cm.residual_identity_by_tau.find(tau);
  row.residual_identity = (it != cm.residual_identity_by_tau.end()) ? it->second : kNaN;
  auto it2 = cm.residual_scattering_by_tau.find(tau);
  row.residual_scattering = (it2 != cm.residual_scattering_by_tau.end()) ? it2->second : kNaN;
  auto itf = cm.flags_by_tau.find(tau);
  if (itf != cm.flags_by_tau.end())
    for (const auto& f : itf->second)
      if (std::find(row.flags.begin(), row.flags.end(), f) == row.flags.end())
        row.flags.push_back(f);
  return row;
}

}  // namespace

EstimateReport run_experiment(const RunConfig& cfg, const FixtureSpec& fixture,
                              const SweepPoint& point, const CalibratedConstants& constants) {
  const auto t0 = std::chrono::steady_clock::now();
  auto dom = build_domain(cfg.half_width, cfg.n);
  RunConfig local = cfg;
  local.sweep.tau = {point.tau};
  ComboMeasurement cm = measure_combo(local, fixture, point.scale, point.E, dom, true);
  EstimateReport row = row_from_combo(cfg, cm, point.tau, point.m, constants);
  row.timing_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

SweepResult run_sweep(const RunConfig& cfg, const CalibratedConstants& constants,
                      bool with_faddeev) {
  SweepResult result;
  auto dom = build_domain(cfg.half_width, cfg.n);
  for (const auto& fx : cfg.fixtures) {
    for (double scale : cfg.sweep.scale) {
      for (double E : cfg.sweep.E) {
        const auto t0 = std::chrono::steady_clock::now();
        ComboMeasurement cm = measure_combo(cfg, fx, scale, E, dom, with_faddeev);
        const double combo_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                .count();
        for (const auto& ls : cm.lemma_samples) result.lemma_samples.push_back(ls);
        bool first_row = true;
        for (double tau : cfg.sweep.tau)
          for (double m : cfg.sweep.m) {
            EstimateReport row = row_from_combo(cfg, cm, tau, m, constants);
            row.timing_ms = first_row ? combo_ms : 0.0;
            first_row = false;
            result.rows.push_back(std::move(row));
          }
      }
    }
  }
  return result;
}

CalibratedConstants calibrate(const RunConfig& cfg, const SweepResult& training) {
  const auto& rows = training.rows;
  std::set<std::string> fixtures;
  std::set<double> energies;
  int usable = 0;
  bool any_diff = false;
  for (const auto& r : rows) {
    if (r.skipped()) continue;
    ++usable;
    fixtures.insert(r.fixture);
    energies.insert(r.E);
    if (r.err_l2 > 0.0 || r.delta > 0.0) any_diff = true;
  }
  if (usable < 30)
    throw CalibrationError("calibrate: need at least 30 usable training rows, got " +
                           std::to_string(usable));
  if (fixtures.size() < 3 || energies.size() < 3)
    throw CalibrationError("calibrate: training must span >= 3 fixtures and >= 3 energies");
  if (!any_diff)
    throw CalibrationError(
        "calibrate: degenerate training set (all rows have identical potentials)");

  CalibratedConstants c;
  auto dom = build_domain(cfg.half_width, cfg.n);
  c.c3 = dom->volume_sqrt();
  c.c9 = dom->surface_area() / std::pow(2.0 * M_PI, 3);

  double max_c1 = 0.0, max_c5 = 0.0, max_c6 = 0.0;
  double min_floor = std::numeric_limits<double>::max();
  for (const auto& ls : training.lemma_samples) {
    max_c1 = std::max(max_c1, ls.implied_c1);
    max_c5 = std::max(max_c5, ls.implied_c5);
    max_c6 = std::max(max_c6, ls.implied_c6);
    const double s = std::sqrt(ls.E + ls.rho * ls.rho) / (1.0 + ls.N);
    min_floor = std::min(min_floor, s);
  }
  if (!(max_c1 > 0.0))
    throw CalibrationError("calibrate: no usable low-frequency bound samples");
  c.c1 = 1.5 * max_c1;
  c.c5 = (max_c5 > 0.0) ? 1.5 * max_c5 : 1.0;
  c.c6 = (max_c6 > 0.0) ? 1.5 * max_c6 : 1.0;
  c.r_star = (min_floor < std::numeric_limits<double>::max()) ? min_floor : 0.0;

  // constrained fit of (A, B) over a small (alpha, beta) grid, margin 1.1,
  // objective A + B
  struct FitRow {
    double u, w, e;
  };
  const std::array<double, 5> grid = {0.25, 0.5, 1.0, 2.0, 4.0};
  auto fit_pair = [&](bool sup_mode, double& A, double& B, double& alpha, double& beta) {
    double best_obj = std::numeric_limits<double>::max();
    bool feasible_any = false;
    std::string worst_row;
    for (double al : grid)
      for (double be : grid) {
        std::vector<FitRow> fr;
        bool impossible = false;
        for (const auto& r : rows) {
          if (r.skipped()) continue;
          if (sup_mode && !(r.m > 3.0)) continue;
          const double err = sup_mode ? r.err_linf : r.err_l2;
          if (!(err > 0.0)) continue;
          const double delta_eff = std::max(r.delta, cfg.delta_floor);
          const double ln = std::log(3.0 + 1.0 / delta_eff);
          const double lam = al * r.E + be * (1.0 - r.tau) * (1.0 - r.tau) * ln * ln;
          if (!(lam > 0.0)) continue;  // bound is vacuous (infinite) there
          FitRow row;
          row.u = std::sqrt(lam) * std::pow(delta_eff, r.tau);
          row.w = sup_mode ? std::pow(1.0 + r.N, 2.0 * (r.m - 3.0) / 3.0) * r.N_Wm /
                                 (r.m - 3.0) * std::pow(lam, -(r.m - 3.0) / 6.0)
                           : std::pow(1.0 + r.N, 4.0 * r.m / 3.0) * r.N_Hm *
                                 std::pow(lam, -r.m / 3.0);
          row.e = 1.1 * err;
          if (row.u <= 0.0 && row.w <= 0.0) {
            impossible = true;
            worst_row = r.fixture;
            break;
          }
          fr.push_back(row);
        }
        if (impossible || fr.empty()) continue;
        // minimize A + B s.t. A u_i + B w_i >= e_i: ternary search over B
        auto a_required = [&](double b) {
          double need = 0.0;
          for (const auto& row : fr) {
            const double rem = row.e - b * row.w;
            if (rem <= 0.0) continue;
            if (row.u <= 0.0) return std::numeric_limits<double>::infinity();
            need = std::max(need, rem / row.u);
          }
          return need;
        };
        double bmax = 0.0;
        for (const auto& row : fr)
          if (row.w > 0.0) bmax = std::max(bmax, row.e / row.w);
        double lo = 0.0, hi = std::max(bmax, 1e-12);
        for (int it = 0; it < 200; ++it) {
          const double m1 = lo + (hi - lo) / 3.0;
          const double m2 = hi - (hi - lo) / 3.0;
          const double f1 = a_required(m1) + m1;
          const double f2 = a_required(m2) + m2;
          if (f1 <= f2)
            hi = m2;
          else
            lo = m1;
        }
        const double B_fit = 0.5 * (lo + hi);
        const double A_fit = a_required(B_fit);
        if (!std::isfinite(A_fit)) continue;
        feasible_any = true;
        const double obj = A_fit + B_fit;
        if (obj < best_obj) {
          best_obj = obj;
          A = std::max(A_fit, 1e-12);
          B = std::max(B_fit, 1e-12);
          alpha = al;
          beta = be;
        }
      }
    if (!feasible_any)
      throw CalibrationError("calibrate: no constants satisfy the training rows" +
                             (worst_row.empty() ? std::string()
                                                : " (first violating fixture: " + worst_row + ")"));
  };
  fit_pair(false, c.A, c.B, c.alpha, c.beta);
  fit_pair(true, c.A_t, c.B_t, c.alpha_t, c.beta_t);

  c.provenance.config_digest = config_digest(cfg);
  c.provenance.seed = cfg.seed;
  c.provenance.training_rows = usable;
  c.provenance.training_fixtures = static_cast<int>(fixtures.size());
  c.provenance.training_energies = static_cast<int>(energies.size());
  return c;
}

void apply_constants(std::vector<EstimateReport>& rows, const CalibratedConstants& c) {
  for (auto& r : rows) {
    if (r.skipped()) continue;
    EstimatorParams p;
    p.tau = r.tau;
    p.E = r.E;
    p.delta = std::max(r.delta, 1e-300);
    p.N = r.N;
    p.N_Hm = r.N_Hm;
    p.N_Wm = r.N_Wm;
    p.m = r.m;
    p.constants = c;
    r.bound_l2 = stability_bound_l2(p);
    r.pass_l2 = r.err_l2 <= r.bound_l2;
    if (r.m > 3.0) {
      r.bound_linf = stability_bound_linf(p);
      r.pass_linf = r.err_linf <= r.bound_linf;
    } else {
      r.bound_linf = kNaN;
      r.pass_linf = true;
    }
  }
}

HoldoutSummary evaluate_holdout(const SweepResult& result, const CalibratedConstants& c) {
  HoldoutSummary hs;
  std::vector<EstimateReport> rows = result.rows;
  apply_constants(rows, c);
  for (const auto& r : rows) {
    if (r.skipped()) continue;
    ++hs.rows;
    if (r.pass_l2) ++hs.pass_l2;
    if (r.m > 3.0) {
      ++hs.applicable_linf;
      if (r.pass_linf) ++hs.pass_linf;
    }
  }
  for (const auto& ls : result.lemma_samples) {
    const bool has_c1 = ls.implied_c1 > 0.0;
    const bool has_c6 = ls.implied_c6 > 0.0;
    const bool has_c5 = ls.implied_c5 > 0.0;
    if (!has_c1 && !has_c6 && !has_c5) continue;
    ++hs.lemma_rows;
    const bool ok = (!has_c1 || ls.implied_c1 <= c.c1) && (!has_c6 || ls.implied_c6 <= c.c6) &&
                    (!has_c5 || ls.implied_c5 <= c.c5);
    if (ok) ++hs.lemma_pass;
  }
  return hs;
}

namespace {
const char* kCsvHeader =
    "fixture,E,tau,m,scale,N,N_Hm,N_Wm,delta,rho,r_l2,r_linf,err_l2,err_linf,bound_l2,"
    "bound_linf,intermediate_l2,intermediate_linf,residual_identity,residual_scattering,"
    "pass_l2,pass_linf,flags";
}

void write_csv(const std::vector<EstimateReport>& rows, std::ostream& os) {
  os << "# gelfand-results schema=1\n" << kCsvHeader << "\n";
  for (const auto& r : rows) {
    std::string flags;
    for (std::size_t i = 0; i < r.flags.size(); ++i) {
      if (i) flags += ';';
      flags += r.flags[i];
    }
    os << r.fixture << ',' << fmt(r.E) << ',' << fmt(r.tau) << ',' << fmt(r.m) << ','
       << fmt(r.scale) << ',' << fmt(r.N) << ',' << fmt(r.N_Hm) << ',' << fmt(r.N_Wm) << ','
       << fmt(r.delta) << ',' << fmt(r.rho) << ',' << fmt(r.r_l2) << ',' << fmt(r.r_linf) << ','
       << fmt(r.err_l2) << ',' << fmt(r.err_linf) << ',' << fmt(r.bound_l2) << ','
       << fmt(r.bound_linf) << ',' << fmt(r.intermediate_l2) << ',' << fmt(r.intermediate_linf)
       << ',' << fmt(r.residual_identity) << ',' << fmt(r.residual_scattering) << ','
       << (r.pass_l2 ? 1 : 0) << ',' << (r.pass_linf ? 1 : 0) << ',' << flags << "\n";
  }
}

void write_csv_file(const std::vector<EstimateReport>& rows, const std::string& path) {
  std::ofstream os(path, std::ios::binary);  // binary: stable newlines
  if (!os) throw ConfigError("write_csv_file: cannot open " + path);
  write_csv(rows, os);
}

std::vector<EstimateReport> read_csv_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("read_csv_file: cannot open " + path);
  std::string line;
  if (!std::getline(is, line) || line.rfind("# gelfand-results", 0) != 0)
    throw ConfigError("read_csv_file: missing schema comment in " + path);
  if (!std::getline(is, line) || line != kCsvHeader)
    throw ConfigError("read_csv_file: unexpected header in " + path);
  std::vector<EstimateReport> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : line) {
      if (ch == ',') {
        parts.push_back(cur);
        cur.clear();
      } else {
        cur += ch;
      }
    }
    parts.push_back(cur);
    if (parts.size() != 23) throw ConfigError("read_csv_file: malformed row");
    EstimateReport r;
    int i = 0;
    auto num = [&]() { return std::strtod(parts[i++].c_str(), nullptr); };
    r.fixture = parts[i++];
    r.E = num();
    r.tau = num();
    r.m = num();
    r.scale = num();
    r.N = num();
    r.N_Hm = num();
    r.N_Wm = num();
    r.delta = num();
    r.rho = num();
    r.r_l2 = num();
    r.r_linf = num();
    r.err_l2 = num();
    r.err_linf = num();
    r.bound_l2 = num();
    r.bound_linf = num();
    r.intermediate_l2 = num();
    r.intermediate_linf = num();
    r.residual_identity = num();
    r.residual_scattering = num();
    r.pass_l2 = parts[i++] == "1";
    r.pass_linf = parts[i++] == "1";
    std::string flags = parts[i++];
    std::string f;
    for (char ch : flags) {
      if (ch == ';') {
        if (!f.empty()) r.flags.push_back(f);
        f.clear();
      } else {
        f += ch;
      }
    }
    if (!f.empty()) r.flags.push_back(f);
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_lemma_csv_file(const std::vector<LemmaSample>& samples, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("write_lemma_csv_file: cannot open " + path);
  os << "# gelfand-lemmas schema=1\nfixture,E,rho,xi_norm,implied_c1,implied_c6,implied_c5,N\n";
  for (const auto& s : samples)
    os << s.fixture << ',' << fmt(s.E) << ',' << fmt(s.rho) << ',' << fmt(s.xi_norm) << ','
       << fmt(s.implied_c1) << ',' << fmt(s.implied_c6) << ',' << fmt(s.implied_c5) << ','
       << fmt(s.N) << "\n";
}

std::vector<LemmaSample> read_lemma_csv_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("read_lemma_csv_file: cannot open " + path);
  std::string line;
  if (!std::getline(is, line) || line.rfind("# gelfand-lemmas", 0) != 0)
    throw ConfigError("read_lemma_csv_file: missing schema comment");
  std::getline(is, line);  // header
  std::vector<LemmaSample> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : line) {
      if (ch == ',') {
        parts.push_back(cur);
        cur.clear();
      } else {
        cur += ch;
      }
    }
    parts.push_back(cur);
    if (parts.size() != 8) throw ConfigError("read_lemma_csv_file: malformed row");
    LemmaSample s;
    s.fixture = parts[0];
    s.E = std::strtod(parts[1].c_str(), nullptr);
    s.rho = std::strtod(parts[2].c_str(), nullptr);
    s.xi_norm = std::strtod(parts[3].c_str(), nullptr);
    s.implied_c1 = std::strtod(parts[4].c_str(), nullptr);
    s.implied_c6 = std::strtod(parts[5].c_str(), nullptr);
    s.implied_c5 = std::strtod(parts[6].c_str(), nullptr);
    s.N = std::strtod(parts[7].c_str(), nullptr);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace gelfand
