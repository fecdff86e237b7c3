#include <doctest.h>

#include <cmath>
#include <cstring>
#include <sstream>

#include "gelfand/errors.hpp"
#include "gelfand/potential.hpp"

using namespace gelfand;

namespace {

/// sigma = 1 Gaussian sampled far from the support cut; the workhorse fixture
Potential gaussian_fixture(double half_width = 11.0, int n = 40, double amplitude = 1.0,
                           std::uint64_t seed = 1) {
  auto dom = build_domain(half_width, n);
  GenerateParams p;
  p.amplitude = amplitude;
  p.width = 1.0;
  return generate(dom, PotentialKind::GaussianBump, p, seed);
}

// closed-form transform of e^{-|x|^2/2} under the (2 pi)^-3 e^{+i xi x} convention
double gaussian_hat(double xi_norm) {
  return std::pow(2.0 * M_PI, -1.5) * std::exp(-0.5 * xi_norm * xi_norm);
}

}  // namespace

TEST_CASE("zero potential transforms to zero") {
  auto dom = build_domain(0.5, 8);
  auto z = make_potential(dom, std::vector<double>(8 * 8 * 8, 0.0));
  auto s = fourier_transform(z);
  double top = 0.0;
  for (const auto& c : s.coefficients) top = std::max(top, std::abs(c));
  CHECK(top == 0.0);
  CHECK(norm(z, NormKind::L2) == 0.0);
  CHECK(norm(z, NormKind::Linf) == 0.0);
  CHECK(norm(z, NormKind::Hm, 3.0) == 0.0);
  CHECK(norm(z, NormKind::Wm, 4.0) == 0.0);
}

TEST_CASE("Gaussian transform matches the closed form") {
  Potential g = gaussian_fixture();
  Spectrum s = fourier_transform(g, 2);
  const auto& lat = *s.lattice;
  const int M = lat.size();
  double worst = 0.0;
  int checked = 0;
  for (int j1 = 0; j1 < M; ++j1)
    for (int j2 = 0; j2 < M; ++j2)
      for (int j3 = 0; j3 < M; ++j3) {
        const double xin = lat.freq(j1, j2, j3).norm();
        if (xin > 4.0) continue;
        const cplx got = s.coefficients[lat.flat(j1, j2, j3)];
        const double want = gaussian_hat(xin);
        worst = std::max(worst, std::abs(got - cplx(want, 0.0)) / want);
        ++checked;
      }
  CHECK(checked > 1000);
  CHECK(worst < 1e-3);
}

TEST_CASE("real fields have Hermitian-symmetric spectra") {
  auto dom = build_domain(0.5, 10);
  GenerateParams p;
  p.amplitude = 0.7;
  p.max_mode = 2;
  Potential v = generate(dom, PotentialKind::RandomBandlimited, p, 42);
  Spectrum s = fourier_transform(v);
  const int M = s.lattice->size();
  double worst = 0.0;
  // Nyquist planes of an even lattice carry -M/2 without its mirror; the
  // symmetry statement applies where both +-xi are lattice points
  for (int j1 = 0; j1 < M; ++j1)
    for (int j2 = 0; j2 < M; ++j2)
      for (int j3 = 0; j3 < M; ++j3) {
        if (j1 == M / 2 || j2 == M / 2 || j3 == M / 2) continue;
        const cplx a = s.at(j1, j2, j3);
        const cplx b = s.at((M - j1) % M, (M - j2) % M, (M - j3) % M);
        worst = std::max(worst, std::abs(a - std::conj(b)));
      }
  CHECK(worst < 1e-12);
}

TEST_CASE("H^0 equals the grid L2 norm") {
  Potential g = gaussian_fixture(11.0, 32, 0.8, 3);
  const double l2 = norm(g, NormKind::L2);
  const double h0 = norm(g, NormKind::Hm, 0.0);
  CHECK(h0 == doctest::Approx(l2).epsilon(1e-8));
}

TEST_CASE("Gaussian norms match closed forms") {
  Potential g = gaussian_fixture();
  // ||e^{-|x|^2/2}||_L2 = pi^{3/4}
  CHECK(norm(g, NormKind::L2) == doctest::Approx(std::pow(M_PI, 0.75)).epsilon(5e-3));
  // H^2 norm: sqrt(31 pi^{3/2} / 4)
  const double h2_exact = std::sqrt(31.0 * std::pow(M_PI, 1.5) / 4.0);
  CHECK(norm(g, NormKind::Hm, 2.0) == doctest::Approx(h2_exact).epsilon(5e-3));
  // W^4 norm: max (1+t^2)^2 (2 pi)^{-3/2} e^{-t^2/2} at t^2 = 3
  const double w4_exact = 16.0 * std::exp(-1.5) * std::pow(2.0 * M_PI, -1.5);
  CHECK(norm(g, NormKind::Wm, 4.0) == doctest::Approx(w4_exact).epsilon(5e-3));
}

TEST_CASE("H^m norm is non-decreasing in m") {
  Potential g = gaussian_fixture(11.0, 32, 1.0, 9);
  Spectrum s = fourier_transform(g);
  double prev = 0.0;
  for (double m : {0.0, 0.7, 1.0, 2.0, 3.5, 5.0}) {
    const double cur = spectral_norm(s, NormKind::Hm, m);
    CHECK(cur >= prev * (1.0 - 1e-12));
    prev = cur;
  }
}

TEST_CASE("negative order is rejected") {
  Potential g = gaussian_fixture(11.0, 32, 1.0, 2);
  CHECK_THROWS_AS(norm(g, NormKind::Hm, -1.0), DomainError);
  Spectrum s = fourier_transform(g);
  CHECK_THROWS_AS(tail_l1(s, 1.0, 2.5), DomainError);
  CHECK_THROWS_AS(tail_l2(s, 0.0), DomainError);
}

TEST_CASE("tails match closed-form radial quadrature") {
  Potential g = gaussian_fixture();
  Spectrum s = fourier_transform(g, 2);
  // int_{|xi|>=2} |ghat|^2 dxi = (2pi)^-3 4pi (e^{-4} + (sqrt(pi)/4) erfc(2))
  const double t2_exact = std::sqrt(std::pow(2.0 * M_PI, -3.0) * 4.0 * M_PI *
                                    (std::exp(-4.0) + 0.25 * std::sqrt(M_PI) * std::erfc(2.0)));
  CHECK(tail_l2(s, 2.0) == doctest::Approx(t2_exact).epsilon(0.01));
  // int_{|xi|>=2} |ghat| dxi = (2pi)^{-3/2} 4pi (2 e^{-2} + sqrt(pi/2) erfc(sqrt 2))
  const double t1_exact =
      std::pow(2.0 * M_PI, -1.5) * 4.0 * M_PI *
      (2.0 * std::exp(-2.0) + std::sqrt(0.5 * M_PI) * std::erfc(std::sqrt(2.0)));
  CHECK(tail_l1(s, 2.0, 4.0) == doctest::Approx(t1_exact).epsilon(0.01));
}

TEST_CASE("band-limited spectra have zero tail beyond their extent") {
  auto dom = build_domain(0.5, 10);
  GenerateParams p;
  p.amplitude = 0.6;
  p.max_mode = 1;
  Potential v = generate(dom, PotentialKind::RandomBandlimited, p, 5);
  Spectrum s = fourier_transform(v);
  const double beyond = s.lattice->nyquist() * 2.0;
  CHECK(tail_l2(s, beyond) == 0.0);
  CHECK(tail_l1(s, beyond, 4.0) == 0.0);
}

TEST_CASE("spectral tail bounds hold with the 1.05 grid budget") {
  struct Fix {
    PotentialKind kind;
    double amplitude, width;
    std::uint64_t seed;
  };
  const Fix fixtures[] = {
      {PotentialKind::GaussianBump, 1.0, 1.0, 1},
      {PotentialKind::GaussianBump, -0.5, 1.4, 2},
      {PotentialKind::CosineBump, 0.8, 4.0, 3},
      {PotentialKind::RandomBandlimited, 0.6, 0.0, 4},
  };
  auto dom = build_domain(9.0, 32);
  for (const auto& f : fixtures) {
    GenerateParams p;
    p.amplitude = f.amplitude;
    p.width = f.width;
    p.max_mode = 2;
    Potential v = generate(dom, f.kind, p, f.seed);
    Spectrum s = fourier_transform(v, 2);
    double prev_t2 = std::numeric_limits<double>::max();
    double prev_t1 = std::numeric_limits<double>::max();
    for (double r : {0.5, 1.0, 2.0, 3.0}) {
      const double t2 = tail_l2(s, r);
      const double t1 = tail_l1(s, r, 4.0);
      CHECK(t2 <= prev_t2 * (1.0 + 1e-12));
      CHECK(t1 <= prev_t1 * (1.0 + 1e-12));
      prev_t2 = t2;
      prev_t1 = t1;
      for (double m : {1.0, 2.0}) {
        const double nh = spectral_norm(s, NormKind::Hm, m);
        CHECK(t2 <= std::pow(2.0 * M_PI, -1.5) * nh * std::pow(r, -m) * 1.05);
      }
      for (double m : {4.0, 5.0}) {
        const double nw = spectral_norm(s, NormKind::Wm, m);
        CHECK(tail_l1(s, r, m) <= 4.0 * M_PI / (m - 3.0) * nw * std::pow(r, 3.0 - m) * 1.05);
      }
    }
  }
}

TEST_CASE("Parseval consistency between grid and lattice") {
  Potential g = gaussian_fixture(11.0, 36, 0.9, 11);
  Spectrum s = fourier_transform(g);
  const double grid = norm(g, NormKind::L2);
  const double lattice = spectral_norm(s, NormKind::Hm, 0.0);
  CHECK(lattice == doctest::Approx(grid).epsilon(5e-3));
}

TEST_CASE("generator determinism and amplitude control") {
  auto dom = build_domain(0.5, 9);
  GenerateParams p;
  p.amplitude = 0.0;
  Potential z = generate(dom, PotentialKind::GaussianBump, p, 7);
  CHECK(grid_linf(z) == 0.0);

  p.amplitude = 1.3;
  p.max_mode = 2;
  Potential a = generate(dom, PotentialKind::RandomBandlimited, p, 7);
  Potential b = generate(dom, PotentialKind::RandomBandlimited, p, 7);
  CHECK(a.values.size() == b.values.size());
  CHECK(std::memcmp(a.values.data(), b.values.data(), sizeof(double) * a.values.size()) == 0);
  CHECK(grid_linf(a) == doctest::Approx(1.3).epsilon(1e-12));

  // centre of an odd grid is a node: the cosine bump peaks there exactly
  GenerateParams c;
  c.amplitude = 0.45;
  c.width = 0.3;
  Potential cb = generate(dom, PotentialKind::CosineBump, c, 1);
  CHECK(grid_linf(cb) == doctest::Approx(0.45).epsilon(1e-12));
}

TEST_CASE("support margin is enforced") {
  auto dom = build_domain(0.5, 12);
  GenerateParams p;
  p.amplitude = 1.0;
  p.width = 0.6;  // cosine radius beyond the usable region
  CHECK_THROWS_AS(generate(dom, PotentialKind::CosineBump, p, 1), ConfigError);
  GenerateParams q;
  q.center = Eigen::Vector3d(0.49, 0.0, 0.0);
  CHECK_THROWS_AS(generate(dom, PotentialKind::GaussianBump, q, 1), ConfigError);

  // direct construction with values at the rim violates the margin
  std::vector<double> vals(12 * 12 * 12, 0.0);
  vals[dom->flat_index(0, 5, 5)] = 1.0;
  CHECK_THROWS_AS(make_potential(dom, vals, 2), ConfigError);
}

TEST_CASE("pad factor below 2 is rejected") {
  Potential g = gaussian_fixture(2.0, 8, 1.0, 1);
  CHECK_THROWS_AS(fourier_transform(g, 1), ConfigError);
}

TEST_CASE("text serialization round-trips") {
  auto dom = build_domain(0.75, 10);
  GenerateParams p;
  p.amplitude = -0.8;
  p.width = 0.12;
  Potential v = generate(dom, PotentialKind::GaussianBump, p, 19);
  std::stringstream ss;
  save_potential(v, ss);
  Potential w = load_potential(ss);
  REQUIRE(w.values.size() == v.values.size());
  CHECK(w.domain->n == v.domain->n);
  CHECK(w.domain->half_width == doctest::Approx(v.domain->half_width).epsilon(1e-16));
  double worst = 0.0;
  for (std::size_t i = 0; i < v.values.size(); ++i)
    worst = std::max(worst, std::abs(v.values[i] - w.values[i]));
  CHECK(worst == 0.0);  // %.17g round-trips doubles exactly
}
