#include "gelfand/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "gelfand/errors.hpp"
#include "gelfand/faddeev.hpp"
#include "gelfand/harness.hpp"
#include "gelfand/identity.hpp"
#include "gelfand/report.hpp"

namespace gelfand {

namespace {

void set_workers(const RunConfig& cfg, int cli_workers) {
  const int w = effective_workers(cfg, cli_workers);
#ifdef _OPENMP
  omp_set_num_threads(w);
#else
  (void)w;
#endif
}

const FixtureSpec& pick_fixture(const RunConfig& cfg, const std::string& id) {
  if (cfg.fixtures.empty()) throw ConfigError("config has no fixtures");
  if (id.empty()) return cfg.fixtures.front();
  for (const auto& fx : cfg.fixtures)
    if (fx.id == id) return fx;
  throw ConfigError("fixture '" + id + "' not found in config");
}

CalibratedConstants constants_or_default(const std::string& path, const RunConfig& cfg) {
  std::ifstream probe(path);
  if (probe.good()) return load_constants(path);
  CalibratedConstants c;
  auto dom = build_domain(cfg.half_width, cfg.n);
  c.c3 = dom->volume_sqrt();
  c.c9 = dom->surface_area() / std::pow(2.0 * M_PI, 3);
  return c;
}

struct CheckRunner {
  int failures = 0;
  int total = 0;
  void run(const std::string& name, const std::function<bool()>& fn) {
    ++total;
    bool ok = false;
    std::string err;
    try {
      ok = fn();
    } catch (const std::exception& e) {
      err = e.what();
    }
    if (ok) {
      std::printf("[ok]   %s\n", name.c_str());
    } else {
      ++failures;
      std::printf("[FAIL] %s%s%s\n", name.c_str(), err.empty() ? "" : " :: ", err.c_str());
    }
  }
};

int suite_trivial(const RunConfig&) {
  CheckRunner cr;
  cr.run("box geometry constants", [] {
    auto d = build_domain(0.5, 16);
    return std::abs(d->L - std::sqrt(3.0) / 2.0) < 1e-15 && std::abs(d->volume - 1.0) < 1e-15 &&
           std::abs(d->volume_sqrt() - 1.0) < 1e-15;
  });
  cr.run("boundary quadrature sums to the surface area", [] {
    auto d = build_domain(0.7, 12);
    double s = 0.0;
    for (const auto& b : d->boundary_nodes) s += b.weight;
    return std::abs(s - d->surface_area()) < 1e-12 * d->surface_area();
  });
  cr.run("momentum reach examples", [] {
    return std::abs(max_xi_radius(0, 1) - 2.0) < 1e-15 &&
           std::abs(max_xi_radius(4, 3) - 2.0 * std::sqrt(13.0)) < 1e-12;
  });
  cr.run("momentum pair invariants", [] {
    auto p = make_theta_pair(2.5, 1.3, Eigen::Vector3d(1.0, 0.7, -0.4));
    const cplx k2 = dot(p.k, p.k), l2 = dot(p.l, p.l);
    return std::abs(k2 - cplx(2.5, 0.0)) < 1e-10 && std::abs(l2 - cplx(2.5, 0.0)) < 1e-10 &&
           (p.k - p.l - p.xi.cast<cplx>()).norm() < 1e-12 &&
           std::abs(p.k.imag().norm() - 1.3) < 1e-12;
  });
  cr.run("zero potential has zero transform and norms", [] {
    auto d = build_domain(0.5, 8);
    auto z = make_potential(d, std::vector<double>(8 * 8 * 8, 0.0));
    auto s = fourier_transform(z);
    double top = 0.0;
    for (auto& c : s.coefficients) top = std::max(top, std::abs(c));
    return top == 0.0 && norm(z, NormKind::L2) == 0.0 && norm(z, NormKind::Hm, 2.0) == 0.0;
  });
  cr.run("flat data has zero normal derivative", [] {
    auto d = build_domain(0.5, 8);
    auto z = make_potential(d, std::vector<double>(8 * 8 * 8, 0.0));
    DirichletSolver sol(d, z, 0.0);
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(d->boundary_count());
    return sol.neumann(ones).cwiseAbs().maxCoeff() < 1e-10 * sol.stencil_scale();
  });
  cr.run("linear data reproduced exactly", [] {
    auto d = build_domain(0.5, 8);
    auto z = make_potential(d, std::vector<double>(8 * 8 * 8, 0.0));
    Eigen::VectorXd g(d->boundary_count());
    for (int b = 0; b < d->boundary_count(); ++b) g(b) = d->boundary_nodes[b].pos(2);
    Eigen::VectorXd nu = DirichletSolver(d, z, 0.0).neumann(g);
    double worst = 0.0;
    for (int b = 0; b < d->boundary_count(); ++b)
      worst = std::max(worst, std::abs(nu(b) - d->boundary_nodes[b].normal(2)));
    return worst < 1e-8;
  });
  cr.run("parameter formulas", [] {
    auto rc = choose_rho(0.5, 0.05, std::sqrt(3.0) / 2.0);
    const double gamma = 0.5 / std::sqrt(3.0);
    if (std::abs(rc.gamma - gamma) > 1e-15) return false;
    if (std::abs(rc.rho - gamma * std::log(23.0)) > 1e-12) return false;
    auto sr = choose_r_l2(0.0, 1.0, 0.0, 1.0);
    return std::abs(sr.r - sr.q) < 1e-15;
  });
  cr.run("split partition is exact", [] {
    auto d = build_domain(0.5, 8);
    GenerateParams gp;
    gp.amplitude = 1.0;
    gp.width = 0.12;
    auto v = generate(d, PotentialKind::GaussianBump, gp, 3);
    auto s = fourier_transform(v);
    auto [lo, hi] = split_error(s, 2.0, SplitMode::L2);
    const double full = spectral_norm(s, NormKind::L2, 0.0) / std::pow(2.0 * M_PI, 1.5);
    return std::abs(lo * lo + hi * hi - full * full) <= 1e-12 * full * full;
  });
  std::printf("trivial suite: %d/%d passed\n", cr.total - cr.failures, cr.total);
  return cr.failures == 0 ? 0 : 1;
}

int suite_lemmas(const RunConfig&) {
  CheckRunner cr;
  auto dom = build_domain(6.5, 24);
  GenerateParams gp;
  gp.amplitude = 1.0;
  gp.width = 1.0;
  auto v = generate(dom, PotentialKind::GaussianBump, gp, 5);
  auto s = fourier_transform(v, 2);
  cr.run("spectral tail within the H^m envelope", [&] {
    const double nh = spectral_norm(s, NormKind::Hm, 2.0);
    const double t = tail_l2(s, 2.0);
    return t <= std::pow(2.0 * M_PI, -1.5) * nh * std::pow(2.0, -2.0) * 1.05;
  });
  cr.run("spectral tail within the W^m envelope", [&] {
    const double nw = spectral_norm(s, NormKind::Wm, 4.0);
    const double t = tail_l1(s, 2.0, 4.0);
    return t <= 4.0 * M_PI * nw * std::pow(2.0, -1.0) * 1.05;
  });
  cr.run("zero potential gives mu = 1 in one iteration", [] {
    auto d = build_domain(0.5, 8);
    auto z = make_potential(d, std::vector<double>(8 * 8 * 8, 0.0));
    auto st = solve_mu(z, Eigen::Vector3cd(cplx(1, 0), cplx(0, 2), cplx(0, 0)));
    return st.converged && st.iterations == 1 && sup_abs_mu_minus_one(st) == 0.0;
  });
  cr.run("mu contraction within the geometric-series budget", [] {
    auto d = build_domain(0.5, 10);
    GenerateParams p;
    p.amplitude = 0.4;
    p.width = 0.1;
    auto v = generate(d, PotentialKind::GaussianBump, p, 4);
    auto pair = make_theta_pair(1.0, 2.0, Eigen::Vector3d::Zero());
    auto st = solve_mu(v, pair.k);
    const double c = st.contraction_estimate;
    return st.converged && c < 1.0 && sup_abs_mu_minus_one(st) <= c / (1.0 - c) + 1e-12;
  });
  std::printf("lemma suite: %d/%d passed\n", cr.total - cr.failures, cr.total);
  return cr.failures == 0 ? 0 : 1;
}

int suite_identity(const RunConfig&) {
  CheckRunner cr;
  cr.run("volume and boundary forms agree at coarse resolution", [] {
    auto d = build_domain(0.5, 12);
    GenerateParams pb, pd;
    pb.amplitude = 0.5;
    pb.width = 0.1;
    pd.amplitude = 0.2;
    pd.width = 0.24;
    auto v1 = generate(d, PotentialKind::GaussianBump, pb, 6);
    auto diff = generate(d, PotentialKind::CosineBump, pd, 7);
    auto v2 = lincomb(1.0, v1, 1.0, diff);
    const double E = 1.0;
    auto pair = make_theta_pair(E, 1.5, Eigen::Vector3d::Zero());
    SolveMuOptions opt;
    opt.pad_factor = 3;
    auto s2k = solve_mu(v2, pair.k, opt);
    auto s1ml = solve_mu(v1, -pair.l, opt);
    DirichletSolver so1(d, v1, E), so2(d, v2, E);
    const cplx vol = hdiff_volume(v1, v2, s1ml, s2k, pair);
    const cplx bnd = hdiff_boundary(so1, so2, s1ml, s2k, pair, v1);
    return relative_mismatch(vol, bnd) < 0.5;
  });
  cr.run("identical potentials give zero difference", [] {
    auto d = build_domain(0.5, 8);
    GenerateParams p;
    p.amplitude = 0.3;
    p.width = 0.1;
    auto v = generate(d, PotentialKind::GaussianBump, p, 8);
    auto pair = make_theta_pair(1.0, 2.0, Eigen::Vector3d::Zero());
    auto sk = solve_mu(v, pair.k);
    auto sml = solve_mu(v, -pair.l);
    return std::abs(hdiff_volume(v, v, sml, sk, pair)) < 1e-14;
  });
  std::printf("identity suite: %d/%d passed\n", cr.total - cr.failures, cr.total);
  return cr.failures == 0 ? 0 : 1;
}

int cmd_forward(const RunConfig& cfg, const std::string& fixture_id, double E, double scale,
                const std::string& out_path) {
  auto dom = build_domain(cfg.half_width, cfg.n);
  const auto& fx = pick_fixture(cfg, fixture_id);
  auto [v1, v2] = make_fixture_pair(cfg, fx, scale, dom);
  const double m1 = check_not_eigenvalue(dom, v1, E);
  const double m2 = check_not_eigenvalue(dom, v2, E);
  std::printf("fixture %s  E=%g\n", fx.id.c_str(), E);
  std::printf("eigenvalue margins: %.6g / %.6g\n", m1, m2);
  DirichletSolver s1(dom, v1, E), s2(dom, v2, E);
  Potential vdiff = lincomb(-1.0, v1, 1.0, v2);
  const double delta = delta_norm_lowrank(s1, s2, vdiff);
  std::printf("delta (boundary operator distance): %.10g\n", delta);
  std::printf("||v2-v1||_L2 = %.10g   ||v2-v1||_sup = %.10g\n", grid_l2(vdiff),
              grid_linf(vdiff));
  if (!out_path.empty()) {
    DtnMap map = dtn_map(dom, v1, E);
    save_dtn(map, out_path);
    std::printf("kernel written: %s\n", out_path.c_str());
  }
  return 0;
}

int cmd_faddeev(const RunConfig& cfg, const std::string& fixture_id, double E, double rho,
                const std::string& xi_str, double scale) {
  auto dom = build_domain(cfg.half_width, cfg.n);
  const auto& fx = pick_fixture(cfg, fixture_id);
  auto [v1, v2] = make_fixture_pair(cfg, fx, scale, dom);
  Eigen::Vector3d xi = Eigen::Vector3d::Zero();
  if (!xi_str.empty()) {
    double a, b, c;
    if (std::sscanf(xi_str.c_str(), "%lf,%lf,%lf", &a, &b, &c) != 3)
      throw ConfigError("faddeev: --xi expects 'x,y,z'");
    xi = Eigen::Vector3d(a, b, c);
  }
  MomentumPair pair = make_theta_pair(E, rho, xi);
  SolveMuOptions opt;
  opt.pad_factor = cfg.pad_factor;
  FaddeevState st = solve_mu(v1, pair.k, opt);
  std::printf("fixture %s  E=%g rho=%g |xi|=%g\n", fx.id.c_str(), E, rho, xi.norm());
  std::printf("iterations=%d contraction=%.4g converged=%d\n", st.iterations,
              st.contraction_estimate, st.converged ? 1 : 0);
  std::printf("sup|mu|=%.6g  sup|mu-1|=%.6g\n", sup_abs_mu(st), sup_abs_mu_minus_one(st));
  const cplx h = scattering_h(v1, st, pair);
  const cplx vh = vhat_diff_at(make_potential(dom, std::vector<double>(v1.values.size(), 0.0)),
                               v1, pair.xi);
  std::printf("h(k,l) = %.8g%+.8gi   vhat(xi) = %.8g%+.8gi   |h-vhat| = %.4g\n", h.real(),
              h.imag(), vh.real(), vh.imag(), std::abs(h - vh));
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"numerical laboratory for boundary-data stability estimates of the "
               "fixed-energy inverse potential problem"};
  app.require_subcommand(1);

  std::string config_path, fixture_id, out_path, xi_str, rows_path, in_path, outdir = ".";
  double E = 1.0, rho = 2.0, scale = 1.0;
  std::uint64_t seed_override = 0;
  bool seed_set = false;
  int workers = 0;
  std::string suite = "trivial";

  auto* fwd = app.add_subcommand("forward", "boundary-operator distance for a fixture");
  fwd->add_option("--config", config_path);
  fwd->add_option("--fixture", fixture_id);
  fwd->add_option("--E", E);
  fwd->add_option("--scale", scale);
  fwd->add_option("--out", out_path)->description("write the assembled kernel");

  auto* fad = app.add_subcommand("faddeev", "mu / scattering diagnostics");
  fad->add_option("--config", config_path);
  fad->add_option("--fixture", fixture_id);
  fad->add_option("--E", E);
  fad->add_option("--rho", rho);
  fad->add_option("--xi", xi_str);
  fad->add_option("--scale", scale);

  auto* ver = app.add_subcommand("verify", "built-in verification suites");
  ver->add_option("--suite", suite)->check(CLI::IsMember({"trivial", "lemmas", "identity", "all"}));
  ver->add_option("--config", config_path);

  auto* swp = app.add_subcommand("sweep", "full verification grid -> CSV");
  swp->add_option("--config", config_path);
  swp->add_option("--out", out_path);
  swp->add_option("--constants", rows_path)->description("constants JSON to evaluate against");
  auto* seed_opt = swp->add_option("--seed", seed_override);
  swp->add_option("--workers", workers);

  auto* cal = app.add_subcommand("calibrate", "fit constants on a training sweep");
  cal->add_option("--config", config_path);
  cal->add_option("--rows", rows_path)->description("training rows CSV (with .lemmas side file)");
  cal->add_option("--out", out_path);
  cal->add_option("--workers", workers);

  auto* rep = app.add_subcommand("report", "summaries and plot data from a results CSV");
  rep->add_option("--in", in_path)->required();
  rep->add_option("--outdir", outdir);

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    std::fprintf(stderr, "%s\n", app.help().c_str());
    return 2;
  }
  seed_set = seed_opt->count() > 0;

  try {
    RunConfig cfg = config_path.empty() ? default_config() : load_config(config_path);
    if (seed_set) cfg.seed = seed_override;
    set_workers(cfg, workers);

    if (app.got_subcommand(fwd)) return cmd_forward(cfg, fixture_id, E, scale, out_path);
    if (app.got_subcommand(fad)) return cmd_faddeev(cfg, fixture_id, E, rho, xi_str, scale);
    if (app.got_subcommand(ver)) {
      int rc = 0;
      if (suite == "trivial" || suite == "all") rc |= suite_trivial(cfg);
      if (suite == "lemmas" || suite == "all") rc |= suite_lemmas(cfg);
      if (suite == "identity" || suite == "all") rc |= suite_identity(cfg);
      return rc == 0 ? 0 : 1;
    }
    if (app.got_subcommand(swp)) {
      CalibratedConstants c = constants_or_default(
          rows_path.empty() ? cfg.constants_path : rows_path, cfg);
      SweepResult res = run_sweep(cfg, c);
      const std::string out = out_path.empty() ? cfg.output_path : out_path;
      write_csv_file(res.rows, out);
      write_lemma_csv_file(res.lemma_samples, out + ".lemmas");
      double total_ms = 0.0;
      for (const auto& r : res.rows) total_ms += r.timing_ms;
      std::ofstream timing(out + ".timings");
      timing << "total_ms " << total_ms << "\n";
      std::printf("wrote %zu rows to %s\n", res.rows.size(), out.c_str());
      return 0;
    }
    if (app.got_subcommand(cal)) {
      SweepResult training;
      if (!rows_path.empty()) {
        training.rows = read_csv_file(rows_path);
        training.lemma_samples = read_lemma_csv_file(rows_path + ".lemmas");
      } else {
        CalibratedConstants c0 = constants_or_default(cfg.constants_path, cfg);
        training = run_sweep(cfg, c0);
      }
      CalibratedConstants c = calibrate(cfg, training);
      const std::string out = out_path.empty() ? cfg.constants_path : out_path;
      save_constants(c, out);
      HoldoutSummary hs = evaluate_holdout(training, c);
      std::printf("constants written: %s\n", out.c_str());
      std::printf("training pass: L2 %d/%d, sup %d/%d\n", hs.pass_l2, hs.rows, hs.pass_linf,
                  hs.applicable_linf);
      return hs.all_pass() ? 0 : 1;
    }
    if (app.got_subcommand(rep)) {
      auto rows = read_csv_file(in_path);
      std::string summary = write_report(rows, outdir);
      std::fputs(summary.c_str(), stdout);
      return 0;
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}

}  // namespace gelfand
