#include "gelfand/geometry.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <string>

#include "gelfand/errors.hpp"

namespace gelfand {

namespace {

// 1D boundary-mesh weights on nodes -w+h .. w-h: interior nodes own their
// h-cell, the two end nodes also absorb the half-cell strips touching the
// edges, so the weights sum to the exact edge length 2w.
double line_weight(int j, int n, double h) {
  return (j == 0 || j == n - 1) ? 1.5 * h : h;
}

}  // namespace

DomainPtr build_domain(double half_width, int n) {
  if (!(half_width > 0.0))
    throw ConfigError("build_domain: half_width must be positive, got " +
                      std::to_string(half_width));
  if (n < 8)
    throw ConfigError("build_domain: need n >= 8 grid points per axis, got " +
                      std::to_string(n));

  auto dom = std::make_shared<Domain>();
  dom->half_width = half_width;
  dom->n = n;
  dom->h = 2.0 * half_width / (n + 1);
  dom->L = half_width * std::sqrt(3.0);
  dom->volume = 8.0 * half_width * half_width * half_width;

  const double w = half_width;
  const double h = dom->h;
  dom->boundary_nodes.reserve(static_cast<std::size_t>(6) * n * n);

  // face order: -x,+x,-y,+y,-z,+z ; transverse indices (a,b) follow the
  // remaining two axes in ascending axis order
  for (int face = 0; face < 6; ++face) {
    const int axis = face / 2;
    const int sign = (face % 2 == 0) ? -1 : +1;
    const int ta = (axis == 0) ? 1 : 0;
    const int tb = (axis == 2) ? 1 : 2;
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        BoundaryNode node;
        node.face = face;
        node.a = a;
        node.b = b;
        Eigen::Vector3d p = Eigen::Vector3d::Zero();
        p(axis) = sign * w;
        p(ta) = dom->coord(a);
        p(tb) = dom->coord(b);
        node.pos = p;
        node.normal = Eigen::Vector3d::Zero();
        node.normal(axis) = sign;
        node.weight = line_weight(a, n, h) * line_weight(b, n, h);
        int idx[3];
        idx[ta] = a;
        idx[tb] = b;
        idx[axis] = (sign < 0) ? 0 : n - 1;
        node.interior1 = dom->flat_index(idx[0], idx[1], idx[2]);
        idx[axis] = (sign < 0) ? 1 : n - 2;
        node.interior2 = dom->flat_index(idx[0], idx[1], idx[2]);
        dom->boundary_nodes.push_back(node);
      }
    }
  }
  return dom;
}

double max_xi_radius(double E, double rho) {
  const double s = E + rho * rho;
  if (!(s > 0.0))
    throw DomainError("max_xi_radius: E + rho^2 must be positive, got " +
                      std::to_string(s));
  return 2.0 * std::sqrt(s);
}

MomentumPair make_theta_pair(double E, double rho, const Eigen::Vector3d& xi) {
  if (!(rho > 0.0))
    throw DomainError("make_theta_pair: rho must be positive, got " + std::to_string(rho));
  const double s = E + rho * rho;
  if (!(s > 0.0))
    throw DomainError("make_theta_pair: E + rho^2 must be positive");
  const double xin = xi.norm();
  if (xin > 2.0 * std::sqrt(s) * (1.0 + 1e-14))
    throw InfeasibleFrequencyError(
        "make_theta_pair: |xi| = " + std::to_string(xin) +
        " exceeds the reachable radius 2*sqrt(E+rho^2) = " + std::to_string(2.0 * std::sqrt(s)));

  Eigen::Vector3d e1, e2, e3;
  if (xin == 0.0) {
    // frame convention for the degenerate direction
    e2 = Eigen::Vector3d::UnitX();
    e3 = Eigen::Vector3d::UnitZ();
  } else {
    e1 = xi / xin;
    // standard basis vector least aligned with e1, lowest index on ties
    int best = 0;
    double bestdot = std::abs(e1(0));
    for (int d = 1; d < 3; ++d) {
      if (std::abs(e1(d)) < bestdot) {
        best = d;
        bestdot = std::abs(e1(d));
      }
    }
    Eigen::Vector3d u = Eigen::Vector3d::Zero();
    u(best) = 1.0;
    e2 = e1.cross(u).normalized();
    e3 = e1.cross(e2);
  }

  const double a2 = s - 0.25 * xin * xin;
  const double a = (a2 > 0.0) ? std::sqrt(a2) : 0.0;

  MomentumPair pair;
  pair.E = E;
  pair.rho = rho;
  pair.xi = xi;
  const std::complex<double> I(0.0, 1.0);
  for (int d = 0; d < 3; ++d) {
    pair.k(d) = std::complex<double>(0.5 * xi(d) + a * e2(d), rho * e3(d));
    pair.l(d) = pair.k(d) - std::complex<double>(xi(d), 0.0);
  }
  return pair;
}

}  // namespace gelfand
