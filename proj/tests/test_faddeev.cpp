#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "gelfand/errors.hpp"
#include "gelfand/faddeev.hpp"
#include "gelfand/identity.hpp"
#include "gelfand/potential.hpp"

using namespace gelfand;

namespace {

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const int n = static_cast<int>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Potential small_bump(const DomainPtr& dom, double amplitude, std::uint64_t seed,
                     double width = 0.1) {
  GenerateParams p;
  p.amplitude = amplitude;
  p.width = width;
  return generate(dom, PotentialKind::GaussianBump, p, seed);
}

}  // namespace

TEST_CASE("closed-form kernel values") {
  // on the transverse shell the exponent vanishes: -1/(2 pi)
  const cplx a = green_reference({0.0, 0.0, 0.5}, 2.0, {0.0, 0.0, 1.0});
  CHECK(a.real() == doctest::Approx(-0.15915494309189535).epsilon(1e-14));
  CHECK(a.imag() == 0.0);
  // parallel to omega: rho-independent -1/(4 pi |x|)
  const cplx b1 = green_reference({0.0, 0.0, 0.25}, 1.0, {0.0, 0.0, 1.0});
  const cplx b2 = green_reference({0.0, 0.0, 0.25}, 6.0, {0.0, 0.0, 1.0});
  CHECK(b1.real() == doctest::Approx(-1.0 / (M_PI)).epsilon(1e-14));
  CHECK(b1.real() == doctest::Approx(b2.real()).epsilon(1e-14));
  // antiparallel: e^{-2 rho |x|} decay
  const cplx c = green_reference({0.0, 0.0, -0.25}, 3.0, {0.0, 0.0, 1.0});
  CHECK(c.real() == doctest::Approx(-std::exp(-1.5) / M_PI).epsilon(1e-12));
  CHECK_THROWS_AS(green_reference({0, 0, 0}, 1.0, {0, 0, 1}), DomainError);
}

TEST_CASE("lattice kernel matches the closed form away from the source") {
  for (double rho : {1.0, 2.0, 4.0}) {
    for (auto omega : {Eigen::Vector3d(0, 0, 1),
                       Eigen::Vector3d(1, 1, 1).normalized()}) {
      auto dom = build_domain(0.5, 16);
      auto lat = std::make_shared<PaddedLattice>(dom, 4);
      Eigen::Vector3cd k;
      for (int d = 0; d < 3; ++d) k(d) = cplx(0.0, rho * omega(d));
      GreenOperator op(lat, k);
      REQUIRE(op.modulated_route());
      auto table = op.kernel_table();
      const int M = lat->size();
      const double h = lat->spacing();
      const double T = op.truncation_radius();
      double worst = 0.0;
      for (int j1 = 0; j1 < M; ++j1)
        for (int j2 = 0; j2 < M; ++j2)
          for (int j3 = 0; j3 < M; ++j3) {
            const Eigen::Vector3d z(h * lat->signed_index(j1), h * lat->signed_index(j2),
                                    h * lat->signed_index(j3));
            const double r = z.norm();
            if (r < 3.0 * h || r > 0.5 * T) continue;
            const cplx got = table[lat->flat(j1, j2, j3)];
            const cplx want = green_reference(z, rho, omega);
            worst = std::max(worst, std::abs(got - want) / std::abs(want));
          }
      CAPTURE(rho);
      CHECK(worst < 0.02);
    }
  }
}

TEST_CASE("lattice kernel converges with order at least one") {
  const double rho = 2.0;
  const Eigen::Vector3d omega = Eigen::Vector3d(1, 1, 1).normalized();
  std::vector<double> hs, errs;
  for (int n : {16, 24, 32}) {
    auto dom = build_domain(0.5, n);
    auto lat = std::make_shared<PaddedLattice>(dom, 4);
    Eigen::Vector3cd k;
    for (int d = 0; d < 3; ++d) k(d) = cplx(0.0, rho * omega(d));
    GreenOperator op(lat, k);
    auto table = op.kernel_table();
    const int M = lat->size();
    const double h = lat->spacing();
    // fixed physical probes in the spectral zone, generic directions
    double worst = 0.0;
    for (int j1 = 0; j1 < M; ++j1)
      for (int j2 = 0; j2 < M; ++j2)
        for (int j3 = 0; j3 < M; ++j3) {
          const Eigen::Vector3d z(h * lat->signed_index(j1), h * lat->signed_index(j2),
                                  h * lat->signed_index(j3));
          const double r = z.norm();
          if (r < 0.50 || r > 0.60) continue;
          const cplx got = table[lat->flat(j1, j2, j3)];
          const cplx want = green_reference(z, rho, omega);
          worst = std::max(worst, std::abs(got - want) / std::abs(want));
        }
    hs.push_back(h);
    errs.push_back(worst);
  }
  CHECK(loglog_slope(hs, errs) >= 1.0);
}

TEST_CASE("symbol requires nonreal momentum and stays finite") {
  auto dom = build_domain(0.5, 8);
  PaddedLattice lat(dom, 2);
  Eigen::Vector3cd real_k;
  real_k << cplx(1.0, 0.0), cplx(0.5, 0.0), cplx(0.0, 0.0);
  CHECK_THROWS_AS(faddeev_symbol(real_k, lat), DomainError);

  auto pair = make_theta_pair(1.0, 1.7, Eigen::Vector3d(0.9, 0.3, -0.2));
  auto lat2 = std::make_shared<PaddedLattice>(dom, 2);
  GreenOperator op(lat2, pair.k);
  CHECK(op.min_denominator() > 0.0);
  double top = 0.0;
  for (const auto& c : op.symbol()) top = std::max(top, std::abs(c));
  CHECK(std::isfinite(top));
  CHECK(top <= 1.0 / op.min_denominator() + 1e-12);
}

TEST_CASE("apply_green is linear and annihilates zero") {
  auto dom = build_domain(0.5, 10);
  auto lat = std::make_shared<PaddedLattice>(dom, 2);
  auto pair = make_theta_pair(2.0, 1.2, Eigen::Vector3d(0.4, -0.3, 0.9));
  GreenOperator op(lat, pair.k);

  std::vector<cplx> zero(lat->total(), cplx(0, 0));
  auto out0 = op.apply(zero);
  double top = 0.0;
  for (auto& c : out0) top = std::max(top, std::abs(c));
  CHECK(top == 0.0);

  auto f1 = lat->embed(small_bump(dom, 0.7, 11).values);
  auto f2 = lat->embed(small_bump(dom, -0.4, 12, 0.14).values);
  const cplx a(0.6, -1.1), b(-0.2, 0.35);
  std::vector<cplx> combo(lat->total());
  for (long i = 0; i < lat->total(); ++i) combo[i] = a * f1[i] + b * f2[i];
  auto g_combo = op.apply(combo);
  auto g1 = op.apply(f1);
  auto g2 = op.apply(f2);
  double worst = 0.0, scale = 0.0;
  for (long i = 0; i < lat->total(); ++i) {
    worst = std::max(worst, std::abs(g_combo[i] - (a * g1[i] + b * g2[i])));
    scale = std::max(scale, std::abs(g_combo[i]));
  }
  CHECK(worst <= 1e-13 * std::max(scale, 1.0));
}

TEST_CASE("apply_green matches direct summation with the closed-form kernel") {
  auto dom = build_domain(0.5, 16);
  auto lat = std::make_shared<PaddedLattice>(dom, 4);
  const double rho = 2.0;
  const Eigen::Vector3d omega = Eigen::Vector3d(0.4, -0.2, 1.0).normalized();
  Eigen::Vector3cd k;
  for (int d = 0; d < 3; ++d) k(d) = cplx(0.0, rho * omega(d));
  GreenOperator op(lat, k);

  Potential bump = small_bump(dom, 1.0, 21, 0.06);
  auto f = lat->embed(bump.values);
  auto out = op.apply(f);

  const int M = lat->size();
  const double h = lat->spacing();
  const double h3 = h * h * h;
  // direct sum over the bump support at probe points >= 3h away from it
  std::vector<std::pair<Eigen::Vector3d, long>> probes;
  for (int m1 = 0; m1 < M; m1 += 5)
    for (int m2 = 0; m2 < M; m2 += 7)
      for (int m3 = 0; m3 < M; m3 += 3) {
        const Eigen::Vector3d x = lat->point(m1, m2, m3);
        if (x.norm() > 0.45 || x.norm() < 0.2) continue;
        probes.push_back({x, lat->flat(m1, m2, m3)});
      }
  REQUIRE(probes.size() > 10);
  const int n = dom->n;
  double worst = 0.0;
  for (const auto& [x, idx] : probes) {
    cplx acc(0, 0);
    bool too_close = false;
    for (int i = 0; i < n && !too_close; ++i)
      for (int j = 0; j < n; ++j)
        for (int kk = 0; kk < n; ++kk) {
          const double vv = bump.values[dom->flat_index(i, j, kk)];
          if (vv == 0.0) continue;
          const Eigen::Vector3d y = dom->node(i, j, kk);
          if ((x - y).norm() < 3.0 * h) {
            too_close = true;
            break;
          }
          acc += green_reference(x - y, rho, omega) * vv;
        }
    if (too_close) continue;
    acc *= h3;
    worst = std::max(worst, std::abs(out[idx] - acc) / std::abs(acc));
  }
  CHECK(worst < 0.02);
}

TEST_CASE("zero potential fixes mu = 1 in one iteration") {
  auto dom = build_domain(0.5, 8);
  auto z = make_potential(dom, std::vector<double>(dom->interior_count(), 0.0));
  Eigen::Vector3cd k;
  k << cplx(0, 0), cplx(0, 1.5), cplx(0, 0);
  auto st = solve_mu(z, k);
  CHECK(st.converged);
  CHECK(st.iterations == 1);
  CHECK(sup_abs_mu_minus_one(st) == 0.0);
  CHECK(st.contraction_estimate < 1.0);
}

TEST_CASE("mu deviation decays like 1/|k| along the energy sphere") {
  // dyadic |Im k| ladders on the fixed-energy sphere; spectrally smooth
  // fixtures keep the ladder inside the asymptotic window where the
  // resonant-shell response of the symbol has already decayed
  auto dom = build_domain(0.5, 16);
  struct Fix {
    double amplitude, width, E;
    std::uint64_t seed;
  };
  for (const Fix& f : {Fix{0.5, 0.2, 1.0, 31}, Fix{-0.35, 0.17, 0.5, 44}}) {
    Potential v = small_bump(dom, f.amplitude, f.seed, f.width);
    std::vector<double> ks, devs;
    for (double rho : {1.5, 3.0, 6.0, 12.0}) {
      auto pair = make_theta_pair(f.E, rho, Eigen::Vector3d(0.5, 0.2, 0.1));
      auto st = solve_mu(v, pair.k);
      REQUIRE(st.converged);
      ks.push_back(std::sqrt(f.E + 2.0 * rho * rho));
      devs.push_back(sup_abs_mu_minus_one(st));
    }
    const double slope = loglog_slope(ks, devs);
    CAPTURE(f.seed);
    CHECK(slope > -1.3);
    CHECK(slope < -0.7);
  }
}

TEST_CASE("contraction estimate scales like 1/|k|") {
  auto dom = build_domain(0.5, 16);
  Potential v = small_bump(dom, 0.6, 32, 0.2);
  std::vector<double> ks, cs;
  for (double rho : {1.5, 3.0, 6.0, 12.0}) {
    auto pair = make_theta_pair(0.5, rho, Eigen::Vector3d::Zero());
    auto st = solve_mu(v, pair.k);
    REQUIRE(st.converged);
    ks.push_back(std::sqrt(0.5 + 2.0 * rho * rho));
    cs.push_back(st.contraction_estimate);
  }
  const double slope = loglog_slope(ks, cs);
  CHECK(slope > -1.3);
  CHECK(slope < -0.7);
}

TEST_CASE("sup|mu| envelope is stable across same-amplitude fixtures") {
  auto dom = build_domain(0.5, 12);
  const double N = 0.5;
  std::vector<double> implied;
  int seed = 101;
  for (auto kind : {PotentialKind::GaussianBump, PotentialKind::CosineBump,
                    PotentialKind::RandomBandlimited}) {
    GenerateParams p;
    p.amplitude = N;
    p.width = (kind == PotentialKind::CosineBump) ? 0.3 : 0.1;
    p.max_mode = 2;
    Potential v = generate(dom, kind, p, seed++);
    auto pair = make_theta_pair(1.0, 2.0, Eigen::Vector3d::Zero());
    auto st = solve_mu(v, pair.k);
    REQUIRE(st.converged);
    implied.push_back(sup_abs_mu(st) / (1.0 + N));
  }
  const double lo = *std::min_element(implied.begin(), implied.end());
  const double hi = *std::max_element(implied.begin(), implied.end());
  CHECK(hi / lo < 1.2);
}

TEST_CASE("geometric-series bound holds at convergence") {
  auto dom = build_domain(0.5, 10);
  Potential v = small_bump(dom, 0.45, 33);
  auto pair = make_theta_pair(1.0, 2.0, Eigen::Vector3d(0.3, 0.0, 0.1));
  auto st = solve_mu(v, pair.k);
  REQUIRE(st.converged);
  const double c = st.contraction_estimate;
  CHECK(c < 1.0);
  // tiny slack for increments below the clean-ratio window
  CHECK(sup_abs_mu_minus_one(st) <= c / (1.0 - c) * (1.0 + 1e-3));
}

TEST_CASE("non-contracting regime reports an error with the measured factor") {
  auto dom = build_domain(0.5, 10);
  Potential v = small_bump(dom, 150.0, 34, 0.18);
  auto pair = make_theta_pair(0.25, 1.0, Eigen::Vector3d::Zero());
  CHECK_THROWS_AS(solve_mu(v, pair.k), NoConvergenceError);
}

TEST_CASE("scattering amplitude of the zero potential vanishes") {
  auto dom = build_domain(0.5, 8);
  auto z = make_potential(dom, std::vector<double>(dom->interior_count(), 0.0));
  auto pair = make_theta_pair(1.0, 2.0, Eigen::Vector3d(0.5, 0, 0));
  auto st = solve_mu(z, pair.k);
  CHECK(std::abs(scattering_h(z, st, pair)) == 0.0);
}

TEST_CASE("scattering amplitude converges to the Fourier coefficient") {
  auto dom = build_domain(0.5, 16);
  Potential v = small_bump(dom, 0.3, 35);
  Potential zero = make_potential(dom, std::vector<double>(dom->interior_count(), 0.0));
  const Eigen::Vector3d xi(0.8, -0.5, 0.3);
  const cplx vhat = vhat_diff_at(zero, v, xi);
  double prev = 1e300;
  double final_rel = 1.0;
  for (double rho : {2.0, 4.0, 8.0}) {
    auto pair = make_theta_pair(0.0, rho, xi);
    auto st = solve_mu(v, pair.k);
    REQUIRE(st.converged);
    const double err = std::abs(scattering_h(v, st, pair) - vhat);
    CHECK(err < prev);
    prev = err;
    final_rel = err / std::abs(vhat);
  }
  CHECK(final_rel < 0.05);
}

TEST_CASE("Born error scales quadratically with the amplitude") {
  auto dom = build_domain(0.5, 12);
  Potential zero = make_potential(dom, std::vector<double>(dom->interior_count(), 0.0));
  const Eigen::Vector3d xi(0.4, 0.2, 0.0);
  auto pair = make_theta_pair(1.0, 2.5, xi);
  std::vector<double> amps, errs;
  for (double amp : {0.1, 0.2, 0.4}) {
    Potential v = small_bump(dom, amp, 36);
    auto st = solve_mu(v, pair.k);
    REQUIRE(st.converged);
    const cplx vhat = vhat_diff_at(zero, v, xi);
    amps.push_back(amp);
    errs.push_back(std::abs(scattering_h(v, st, pair) - vhat));
  }
  const double slope = loglog_slope(amps, errs);
  CHECK(slope > 1.7);
  CHECK(slope < 2.3);
}

TEST_CASE("conjugate-reflected pairs give conjugate amplitudes") {
  auto dom = build_domain(0.5, 12);
  Potential v = small_bump(dom, 0.4, 37);
  const Eigen::Vector3d xi(0.7, 0.1, -0.3);
  auto pair = make_theta_pair(1.5, 2.0, xi);
  auto pair_m = make_theta_pair(1.5, 2.0, -xi);
  // frame construction sends xi -> -xi to exactly the conjugate-reflected pair
  CHECK((pair_m.k + pair.k.conjugate()).norm() < 1e-14);
  auto st = solve_mu(v, pair.k);
  auto st_m = solve_mu(v, pair_m.k);
  const cplx h = scattering_h(v, st, pair);
  const cplx h_m = scattering_h(v, st_m, pair_m);
  CHECK(std::abs(h_m - std::conj(h)) < 1e-6);
}

TEST_CASE("states solved elsewhere are rejected") {
  auto dom = build_domain(0.5, 8);
  Potential v = small_bump(dom, 0.2, 38);
  auto pair = make_theta_pair(1.0, 2.0, Eigen::Vector3d(0.3, 0, 0));
  auto other = make_theta_pair(1.0, 3.0, Eigen::Vector3d(0.3, 0, 0));
  auto st = solve_mu(v, other.k);
  CHECK_THROWS_AS(scattering_h(v, st, pair), InvalidStateError);
}

TEST_CASE("mu field export round-trips on the interior grid") {
  auto dom = build_domain(0.5, 10);
  Potential v = small_bump(dom, 0.3, 91);
  auto pair = make_theta_pair(1.0, 2.0, Eigen::Vector3d::Zero());
  auto st = solve_mu(v, pair.k);
  save_mu_field(st, "test_mu_field.txt");
  auto vals = load_mu_field("test_mu_field.txt", dom->n);
  const auto& lat = *st.lattice;
  const int bs = lat.block_start();
  double worst = 0.0;
  for (int i = 0; i < dom->n; ++i)
    for (int j = 0; j < dom->n; ++j)
      for (int k = 0; k < dom->n; ++k)
        worst = std::max(worst,
                         std::abs(vals[(static_cast<long>(i) * dom->n + j) * dom->n + k] -
                                  st.mu[lat.flat(i + bs, j + bs, k + bs)]));
  CHECK(worst == 0.0);
  CHECK_THROWS_AS(load_mu_field("test_mu_field.txt", 12), ConfigError);
  std::remove("test_mu_field.txt");
}
