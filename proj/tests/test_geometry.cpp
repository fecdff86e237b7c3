#include <doctest.h>

#include <cstring>
#include <set>

#include "gelfand/errors.hpp"
#include "gelfand/geometry.hpp"
#include "gelfand/rng.hpp"

using namespace gelfand;

TEST_CASE("box constants") {
  auto d = build_domain(0.5, 16);
  CHECK(d->h == doctest::Approx(1.0 / 17.0).epsilon(1e-15));
  // L = w sqrt(3) = 0.8660254037844386
  CHECK(d->L == doctest::Approx(0.8660254037844386).epsilon(1e-15));
  CHECK(d->volume == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(d->volume_sqrt() == doctest::Approx(1.0).epsilon(1e-15));

  auto d2 = build_domain(1.0, 8);
  CHECK(d2->L == doctest::Approx(1.7320508075688772).epsilon(1e-15));
  CHECK(d2->volume == doctest::Approx(8.0).epsilon(1e-15));
}

TEST_CASE("constructor validation") {
  CHECK_THROWS_AS(build_domain(0.0, 16), ConfigError);
  CHECK_THROWS_AS(build_domain(-1.0, 16), ConfigError);
  CHECK_THROWS_AS(build_domain(0.5, 7), ConfigError);
}

TEST_CASE("boundary mesh") {
  for (int n : {8, 13, 16}) {
    auto d = build_domain(0.5, n);
    REQUIRE(d->boundary_count() == 6 * n * n);
    double wsum = 0.0;
    for (const auto& b : d->boundary_nodes) {
      wsum += b.weight;
      CHECK(b.normal.norm() == doctest::Approx(1.0).epsilon(1e-15));
      // node on the boundary: exactly one coordinate at +-w
      int on_face = 0;
      for (int c = 0; c < 3; ++c)
        if (std::abs(std::abs(b.pos(c)) - d->half_width) < 1e-15) ++on_face;
      CHECK(on_face >= 1);
      CHECK(b.pos.cwiseAbs().maxCoeff() <= d->half_width + 1e-15);
    }
    CHECK(std::abs(wsum - d->surface_area()) <= 1e-12 * d->surface_area());
  }
}

TEST_CASE("boundary nodes reach distinct interior neighbours") {
  auto d = build_domain(0.5, 8);
  std::set<std::pair<int, int>> seen;
  for (const auto& b : d->boundary_nodes) {
    CHECK(b.interior1 >= 0);
    CHECK(b.interior1 < d->interior_count());
    CHECK(b.interior2 >= 0);
    CHECK(b.interior2 < d->interior_count());
    CHECK(b.interior1 != b.interior2);
    seen.insert({b.face, b.interior1});
  }
  CHECK(seen.size() == static_cast<std::size_t>(d->boundary_count()));
}

TEST_CASE("max_xi_radius") {
  CHECK(max_xi_radius(0.0, 1.0) == doctest::Approx(2.0).epsilon(1e-15));
  // 2 sqrt(13) = 7.211102550927978
  CHECK(max_xi_radius(4.0, 3.0) == doctest::Approx(7.211102550927978).epsilon(1e-14));
  CHECK_THROWS_AS(max_xi_radius(-1.0, 1.0), DomainError);
}

TEST_CASE("theta pair at xi = 0") {
  auto p = make_theta_pair(0.0, 1.0, Eigen::Vector3d::Zero());
  CHECK(std::abs(dot(p.k, p.k)) < 1e-12);
  CHECK(std::abs(dot(p.l, p.l)) < 1e-12);
  CHECK((p.k - p.l).norm() < 1e-15);
  CHECK(p.k.imag().norm() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(p.k.real().norm() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("theta pair at the reach boundary has no transverse real part") {
  const Eigen::Vector3d xi(2.0, 0.0, 0.0);  // |xi| = 2 sqrt(E + rho^2) at E=0, rho=1
  auto p = make_theta_pair(0.0, 1.0, xi);
  // a = 0: Re k = xi/2
  CHECK((p.k.real() - 0.5 * xi).norm() < 1e-14);
  CHECK(std::abs(dot(p.k, p.k)) < 1e-12);
}

TEST_CASE("theta pair worked example") {
  auto p = make_theta_pair(2.5, 1.3, Eigen::Vector3d(1.0, 0.7, -0.4));
  const cplx E(2.5, 0.0);
  CHECK(std::abs(dot(p.k, p.k) - E) <= 1e-10 * std::abs(E));
  CHECK(std::abs(dot(p.l, p.l) - E) <= 1e-10 * std::abs(E));
  CHECK((p.k.imag() - p.l.imag()).norm() < 1e-12);
  CHECK((p.k - p.l - Eigen::Vector3cd(cplx(1.0, 0), cplx(0.7, 0), cplx(-0.4, 0))).norm() < 1e-12);
  CHECK(std::abs(p.k.imag().norm() - 1.3) < 1e-12);
}

TEST_CASE("theta pair errors") {
  CHECK_THROWS_AS(make_theta_pair(0.0, 1.0, Eigen::Vector3d(2.1, 0, 0)),
                  InfeasibleFrequencyError);
  CHECK_THROWS_AS(make_theta_pair(1.0, 0.0, Eigen::Vector3d::Zero()), DomainError);
  CHECK_THROWS_AS(make_theta_pair(1.0, -1.0, Eigen::Vector3d::Zero()), DomainError);
}

TEST_CASE("theta pair invariants over random feasible samples") {
  Rng rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const double E = rng.uniform(-2.0, 16.0);
    const double rho = rng.uniform(0.05, 5.0);
    if (E + rho * rho <= 1e-6) continue;
    const double reach = 2.0 * std::sqrt(E + rho * rho);
    const Eigen::Vector3d xi = rng.uniform(0.0, reach * 0.999) * rng.unit_vector();
    auto p = make_theta_pair(E, rho, xi);
    const double scale = std::max(1.0, std::abs(E));
    CHECK(std::abs(dot(p.k, p.k) - cplx(E, 0.0)) <= 1e-10 * scale);
    CHECK(std::abs(dot(p.l, p.l) - cplx(E, 0.0)) <= 1e-10 * scale);
    CHECK((p.k.imag() - p.l.imag()).norm() <= 1e-12 * std::max(1.0, rho));
    CHECK(std::abs(p.k.imag().norm() - rho) <= 1e-12 * std::max(1.0, rho));
    CHECK((p.k.real() - p.l.real() - xi).norm() <= 1e-10 * std::max(1.0, xi.norm()));
  }
}

TEST_CASE("theta pair construction is bitwise deterministic") {
  const Eigen::Vector3d xi(0.3, -1.1, 0.55);
  auto p1 = make_theta_pair(3.0, 0.8, xi);
  auto p2 = make_theta_pair(3.0, 0.8, xi);
  CHECK(std::memcmp(p1.k.data(), p2.k.data(), sizeof(cplx) * 3) == 0);
  CHECK(std::memcmp(p1.l.data(), p2.l.data(), sizeof(cplx) * 3) == 0);
}
