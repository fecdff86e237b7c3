#ifndef GELFAND_GEOMETRY_HPP
#define GELFAND_GEOMETRY_HPP

#include <Eigen/Core>
#include <complex>
#include <memory>
#include <vector>

namespace gelfand {

using cplx = std::complex<double>;

/// One sample point of the boundary mesh: position on a box face, outward
/// unit normal, quadrature weight, and the lattice indices needed to reach
/// the first two interior layers along the inward normal.
struct BoundaryNode {
  Eigen::Vector3d pos;
  Eigen::Vector3d normal;
  double weight = 0.0;
  int face = -1;      // 0..5: -x,+x,-y,+y,-z,+z
  int a = -1, b = -1; // transverse lattice indices on the face
  int interior1 = -1; // flat index of the first interior node along -normal
  int interior2 = -1; // second interior node along -normal
};

/// Axis-aligned box [-w, w]^3 with an n^3 interior lattice (spacing
/// h = 2w/(n+1)) and a face-aligned boundary mesh whose quadrature weights
/// sum exactly to the surface area.
struct Domain {
  double half_width = 0.0;
  int n = 0;
  double h = 0.0;
  double L = 0.0;       // max |x| over the boundary
  double volume = 0.0;
  std::vector<BoundaryNode> boundary_nodes;

  int interior_count() const { return n * n * n; }
  int boundary_count() const { return static_cast<int>(boundary_nodes.size()); }

  /// interior lattice coordinate along one axis, i in [0, n)
  double coord(int i) const { return -half_width + (i + 1) * h; }
  int flat_index(int i, int j, int k) const { return (i * n + j) * n + k; }
  Eigen::Vector3d node(int i, int j, int k) const {
    return {coord(i), coord(j), coord(k)};
  }

  double surface_area() const { return 24.0 * half_width * half_width; }
  /// sqrt of the volume; the norm-comparison constant of the box
  double volume_sqrt() const { return std::sqrt(volume); }
};

using DomainPtr = std::shared_ptr<const Domain>;

/// Complex momentum pair (k, l) with k^2 = l^2 = E, Im k = Im l, and real
/// difference xi = k - l.
struct MomentumPair {
  Eigen::Vector3cd k;
  Eigen::Vector3cd l;
  Eigen::Vector3d xi;
  double rho = 0.0;
  double E = 0.0;
};

DomainPtr build_domain(double half_width, int n);

/// Largest reachable |xi| for given energy and imaginary-momentum radius.
double max_xi_radius(double E, double rho);

/// Deterministic construction of a momentum pair realizing the requested xi.
MomentumPair make_theta_pair(double E, double rho, const Eigen::Vector3d& xi);

inline std::complex<double> dot(const Eigen::Vector3cd& a, const Eigen::Vector3cd& b) {
  // bilinear (no conjugation): a.b = sum a_i b_i
  return a(0) * b(0) + a(1) * b(1) + a(2) * b(2);
}

}  // namespace gelfand

#endif
