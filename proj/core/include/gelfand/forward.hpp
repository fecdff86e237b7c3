#ifndef GELFAND_FORWARD_HPP
#define GELFAND_FORWARD_HPP

#include <Eigen/Core>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <memory>
#include <string>
#include <vector>

#include "gelfand/geometry.hpp"
#include "gelfand/potential.hpp"

namespace gelfand {

/// Discrete Dirichlet-to-Neumann operator at energy E. `kernel(i,j)` stores
/// integral-kernel samples K(x_i, x_j): the impulse response of column j
/// divided by the quadrature weight w_j. Applying the operator to boundary
/// data g is  (Phi g)_i = sum_j kernel(i,j) w_j g_j .
struct DtnMap {
  DomainPtr domain;
  double E = 0.0;
  Eigen::MatrixXd kernel;

  Eigen::VectorXcd apply(const Eigen::VectorXcd& g) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& g) const;
};

/// Factored interior operator (-Laplace_h + v - E) for one (v, E); reused
/// across boundary-data solves.
class DirichletSolver {
 public:
  DirichletSolver(const DomainPtr& dom, const Potential& v, double E);

  const DomainPtr& domain() const { return dom_; }
  double energy() const { return E_; }

  /// smallest singular value of the interior operator (inverse power method)
  double smallest_singular_value(int max_iter = 200, double tol = 1e-10) const;

  /// interior solution with Dirichlet data g on the boundary nodes
  Eigen::VectorXd solve(const Eigen::VectorXd& g) const;

  /// outward normal derivative of the solution with data g
  /// (second-order one-sided difference on the boundary nodes)
  Eigen::VectorXd neumann(const Eigen::VectorXd& g) const;
  Eigen::VectorXcd neumann(const Eigen::VectorXcd& g) const;

  /// raw interior solve A x = b
  Eigen::VectorXd solve_interior(const Eigen::VectorXd& b) const;

  double stencil_scale() const { return scale_; }
  double residual(const Eigen::VectorXd& g, const Eigen::VectorXd& u) const;

 private:
  DomainPtr dom_;
  double E_;
  double scale_;
  Eigen::SparseMatrix<double> A_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
  Eigen::VectorXd boundary_to_rhs(const Eigen::VectorXd& g) const;
};

/// Positive margin (smallest singular value); throws NearEigenvalueError when
/// the discrete operator is within 1e-8 * stencil scale of singular.
double check_not_eigenvalue(const DomainPtr& dom, const Potential& v, double E);

/// Interior field solving the Dirichlet problem; residual <= 1e-10 relative.
Eigen::VectorXd solve_dirichlet(const DomainPtr& dom, const Potential& v, double E,
                                const Eigen::VectorXd& g);

/// Dense DtN kernel assembled column-by-column from boundary impulses.
DtnMap dtn_map(const DomainPtr& dom, const Potential& v, double E);

/// L^inf -> L^inf operator distance: max_i sum_j |K2 - K1|(i,j) w_j.
double delta_norm(const DtnMap& phi1, const DtnMap& phi2);

/// Same operator distance without assembling either kernel: the kernel
/// difference factors exactly through the support of v2 - v1,
///   K2 - K1 = C A1^{-1} D (A2^{-1} B)  with D = diag(v2 - v1),
/// which needs one interior solve per support node instead of one per
/// boundary node.
double delta_norm_lowrank(const DirichletSolver& s1, const DirichletSolver& s2,
                          const Potential& vdiff);

/// (Phi2 - Phi1) g through the factored difference, without kernels.
Eigen::VectorXcd dtn_difference_apply(const DirichletSolver& s1, const DirichletSolver& s2,
                                      const Eigen::VectorXcd& g);

/// versioned binary kernel file with checksum
void save_dtn(const DtnMap& map, const std::string& path);
DtnMap load_dtn(const std::string& path);

}  // namespace gelfand

#endif
