#include "gelfand/forward.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <vector>

#include "gelfand/errors.hpp"

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace gelfand {

Eigen::VectorXcd DtnMap::apply(const Eigen::VectorXcd& g) const {
  const int B = static_cast<int>(kernel.rows());
  if (g.size() != B) throw IncompatibilityError("DtnMap::apply: boundary size mismatch");
  Eigen::VectorXcd wg(B);
  for (int j = 0; j < B; ++j) wg(j) = g(j) * domain->boundary_nodes[j].weight;
  return kernel * wg;
}

Eigen::VectorXd DtnMap::apply(const Eigen::VectorXd& g) const {
  const int B = static_cast<int>(kernel.rows());
  if (g.size() != B) throw IncompatibilityError("DtnMap::apply: boundary size mismatch");
  Eigen::VectorXd wg(B);
  for (int j = 0; j < B; ++j) wg(j) = g(j) * domain->boundary_nodes[j].weight;
  return kernel * wg;
}

DirichletSolver::DirichletSolver(const DomainPtr& dom, const Potential& v, double E)
    : dom_(dom), E_(E) {
  if (v.domain != dom)
    throw IncompatibilityError("DirichletSolver: potential lives on a different domain");
  const int n = dom->n;
  const int N = n * n * n;
  const double ih2 = 1.0 / (dom->h * dom->h);

  double vmax = 0.0;
  for (double vv : v.values) vmax = std::max(vmax, std::abs(vv - E));
  scale_ = 6.0 * ih2 + vmax;

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(7) * N);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const int row = dom->flat_index(i, j, k);
        trips.emplace_back(row, row, 6.0 * ih2 + v.values[row] - E);
        if (i > 0) trips.emplace_back(row, dom->flat_index(i - 1, j, k), -ih2);
        if (i < n - 1) trips.emplace_back(row, dom->flat_index(i + 1, j, k), -ih2);
        if (j > 0) trips.emplace_back(row, dom->flat_index(i, j - 1, k), -ih2);
        if (j < n - 1) trips.emplace_back(row, dom->flat_index(i, j + 1, k), -ih2);
        if (k > 0) trips.emplace_back(row, dom->flat_index(i, j, k - 1), -ih2);
        if (k < n - 1) trips.emplace_back(row, dom->flat_index(i, j, k + 1), -ih2);
      }
  A_.resize(N, N);
  A_.setFromTriplets(trips.begin(), trips.end());
  lu_.analyzePattern(A_);
  lu_.factorize(A_);
  if (lu_.info() != Eigen::Success)
    throw SolverError("DirichletSolver: sparse factorization failed (operator singular?)");
}

double DirichletSolver::smallest_singular_value(int max_iter, double tol) const {
  // inverse power iteration on the symmetric operator: converges to the
  // eigenvalue of smallest magnitude
  const int N = static_cast<int>(A_.rows());
  Eigen::VectorXd x(N);
  // deterministic start vector with no special symmetry
  for (int i = 0; i < N; ++i) x(i) = std::sin(0.7 * (i + 1)) + 0.3 * std::cos(1.3 * i);
  x.normalize();
  double lambda = 0.0, lambda_prev = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd y = lu_.solve(x);
    const double ny = y.norm();
    if (!std::isfinite(ny) || ny == 0.0)
      throw SolverError("smallest_singular_value: inverse iteration broke down");
    x = y / ny;
    lambda = 1.0 / ny;  // |A^{-1}| gain -> |lambda_min| estimate
    if (it > 3 && std::abs(lambda - lambda_prev) <= tol * std::abs(lambda)) break;
    lambda_prev = lambda;
  }
  return lambda;
}

Eigen::VectorXd DirichletSolver::boundary_to_rhs(const Eigen::VectorXd& g) const {
  const int N = static_cast<int>(A_.rows());
  const double ih2 = 1.0 / (dom_->h * dom_->h);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(N);
  const auto& nodes = dom_->boundary_nodes;
  for (std::size_t j = 0; j < nodes.size(); ++j)
    b(nodes[j].interior1) += ih2 * g(static_cast<int>(j));
  return b;
}

Eigen::VectorXd DirichletSolver::solve(const Eigen::VectorXd& g) const {
  if (g.size() != dom_->boundary_count())
    throw IncompatibilityError("DirichletSolver::solve: boundary data size mismatch");
  Eigen::VectorXd u = lu_.solve(boundary_to_rhs(g));
  if (!u.allFinite()) throw SolverError("DirichletSolver::solve: non-finite solution");
  return u;
}

double DirichletSolver::residual(const Eigen::VectorXd& g, const Eigen::VectorXd& u) const {
  Eigen::VectorXd r = A_ * u - boundary_to_rhs(g);
  const double denom = std::max(1e-300, boundary_to_rhs(g).norm());
  return r.norm() / denom;
}

Eigen::VectorXd DirichletSolver::solve_interior(const Eigen::VectorXd& b) const {
  Eigen::VectorXd u = lu_.solve(b);
  if (!u.allFinite()) throw SolverError("solve_interior: non-finite solution");
  return u;
}

Eigen::VectorXd DirichletSolver::neumann(const Eigen::VectorXd& g) const {
  Eigen::VectorXd u = solve(g);
  const auto& nodes = dom_->boundary_nodes;
  const double i2h = 1.0 / (2.0 * dom_->h);
  Eigen::VectorXd out(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i)
    out(static_cast<int>(i)) =
        (3.0 * g(static_cast<int>(i)) - 4.0 * u(nodes[i].interior1) + u(nodes[i].interior2)) * i2h;
  return out;
}

Eigen::VectorXcd DirichletSolver::neumann(const Eigen::VectorXcd& g) const {
  Eigen::VectorXd re = neumann(Eigen::VectorXd(g.real()));
  Eigen::VectorXd im = neumann(Eigen::VectorXd(g.imag()));
  Eigen::VectorXcd out(re.size());
  out.real() = re;
  out.imag() = im;
  return out;
}

double check_not_eigenvalue(const DomainPtr& dom, const Potential& v, double E) {
  std::unique_ptr<DirichletSolver> solver_ptr;
  try {
    solver_ptr = std::make_unique<DirichletSolver>(dom, v, E);
  } catch (const SolverError&) {
    throw NearEigenvalueError("check_not_eigenvalue: operator numerically singular; re-seed E",
                              0.0);
  }
  const DirichletSolver& solver = *solver_ptr;
  double margin = 0.0;
  try {
    margin = solver.smallest_singular_value();
  } catch (const SolverError&) {
    throw NearEigenvalueError("check_not_eigenvalue: inverse iteration diverged; re-seed E",
                              0.0);
  }
  const double threshold = 1e-8 * solver.stencil_scale();
  if (margin < threshold)
    throw NearEigenvalueError(
        "check_not_eigenvalue: margin " + std::to_string(margin) +
            " below threshold " + std::to_string(threshold) + "; re-seed E",
        margin);
  return margin;
}

Eigen::VectorXd solve_dirichlet(const DomainPtr& dom, const Potential& v, double E,
                                const Eigen::VectorXd& g) {
  DirichletSolver solver(dom, v, E);
  Eigen::VectorXd u = solver.solve(g);
  const double rel = solver.residual(g, u);
  if (rel > 1e-10 && g.norm() > 0.0)
    throw SolverError("solve_dirichlet: residual " + std::to_string(rel) +
                      " exceeds 1e-10 of the data");
  return u;
}

DtnMap dtn_map(const DomainPtr& dom, const Potential& v, double E) {
  DirichletSolver solver(dom, v, E);
  const int B = dom->boundary_count();
  DtnMap map;
  map.domain = dom;
  map.E = E;
  map.kernel.resize(B, B);
  // columns are independent impulse solves against the shared factorization;
  // each is computed by an identical serial sequence, so the assembly is
  // deterministic under any thread count
#pragma omp parallel for schedule(dynamic, 8)
  for (int j = 0; j < B; ++j) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(B);
    g(j) = 1.0;
    Eigen::VectorXd col = solver.neumann(g);
    map.kernel.col(j) = col / dom->boundary_nodes[j].weight;
  }
  return map;
}

double delta_norm(const DtnMap& phi1, const DtnMap& phi2) {
  if (phi1.domain != phi2.domain)
    throw IncompatibilityError("delta_norm: kernels on different discretizations");
  if (phi1.E != phi2.E)
    throw IncompatibilityError("delta_norm: kernels at different energies");
  const int B = static_cast<int>(phi1.kernel.rows());
  double best = 0.0;
  for (int i = 0; i < B; ++i) {
    double row = 0.0;
    for (int j = 0; j < B; ++j)
      row += std::abs(phi2.kernel(i, j) - phi1.kernel(i, j)) *
             phi1.domain->boundary_nodes[j].weight;
    best = std::max(best, row);
  }
  return best;
}

namespace {

/// boundary evaluation of the one-sided normal difference for an interior
/// field with zero boundary data
Eigen::VectorXd neumann_of_interior(const Domain& dom, const Eigen::VectorXd& u) {
  const auto& nodes = dom.boundary_nodes;
  const double i2h = 1.0 / (2.0 * dom.h);
  Eigen::VectorXd out(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i)
    out(static_cast<int>(i)) = (-4.0 * u(nodes[i].interior1) + u(nodes[i].interior2)) * i2h;
  return out;
}

struct DiffFactors {
  // K2 - K1 = U * diag(d) * Wt  (B x S) (S) (S x B)
  Eigen::MatrixXd U;
  Eigen::VectorXd d;
  Eigen::MatrixXd Wt;
};

DiffFactors build_difference_factors(const DirichletSolver& s1, const DirichletSolver& s2,
                                     const Potential& vdiff) {
  const DomainPtr dom = s1.domain();
  if (s2.domain() != dom || vdiff.domain != dom)
    throw IncompatibilityError("dtn difference: objects on different domains");
  if (s1.energy() != s2.energy())
    throw IncompatibilityError("dtn difference: energies differ");
  const int n = dom->n;
  const int B = dom->boundary_count();
  // values at relative size <= 1e-12 contribute below solver accuracy and
  // would only inflate the factor rank
  double vmax = 0.0;
  for (double vv : vdiff.values) vmax = std::max(vmax, std::abs(vv));
  const double cut = 1e-12 * vmax;
  std::vector<int> support;
  for (int idx = 0; idx < n * n * n; ++idx)
    if (std::abs(vdiff.values[idx]) > cut) support.push_back(idx);

  DiffFactors f;
  const int S = static_cast<int>(support.size());
  f.U.resize(B, S);
  f.Wt.resize(S, B);
  f.d.resize(S);
  const int N = n * n * n;
  const double ih2 = 1.0 / (dom->h * dom->h);

  // columns of C A1^{-1} restricted to the support: solve A1 y = e_s, apply
  // the Neumann evaluation (boundary data of the impulse problem is zero)
#pragma omp parallel for schedule(dynamic, 8)
  for (int s = 0; s < S; ++s) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(N);
    e(support[s]) = 1.0;
    Eigen::VectorXd y = s1.solve_interior(e);
    f.U.col(s) = neumann_of_interior(*dom, y);
    // M2 - M1 = C A1^{-1} (A1 - A2) A2^{-1} B and A1 - A2 = diag(v1 - v2)
    f.d(s) = -vdiff.values[support[s]];
  }
  // rows of A2^{-1} B at the support: B e_j = (1/h^2) e_{interior1(j)}, and
  // A2 is symmetric, so (A2^{-1} B)_{s j} = (1/h^2) (A2^{-1} e_s)_{interior1(j)}
#pragma omp parallel for schedule(dynamic, 8)
  for (int s = 0; s < S; ++s) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(N);
    e(support[s]) = 1.0;
    Eigen::VectorXd y = s2.solve_interior(e);
    for (int j = 0; j < B; ++j)
      f.Wt(s, j) = ih2 * y(dom->boundary_nodes[j].interior1);
  }
  return f;
}

}  // namespace

double delta_norm_lowrank(const DirichletSolver& s1, const DirichletSolver& s2,
                          const Potential& vdiff) {
  DiffFactors f = build_difference_factors(s1, s2, vdiff);
  const DomainPtr dom = s1.domain();
  const int B = dom->boundary_count();
  if (f.d.size() == 0) return 0.0;
  // rows of M2 - M1 materialized in blocks to bound memory; the quadrature
  // weight cancels against the kernel-sample convention, so the operator
  // norm is the plain max absolute row sum of the value-to-value difference
  Eigen::MatrixXd Ud = f.U * f.d.asDiagonal();  // B x S
  double best = 0.0;
  const int block = 256;
  for (int i0 = 0; i0 < B; i0 += block) {
    const int rows = std::min(block, B - i0);
    Eigen::MatrixXd chunk = Ud.middleRows(i0, rows) * f.Wt;  // rows x B
    for (int r = 0; r < rows; ++r) {
      double acc = 0.0;
      for (int j = 0; j < B; ++j) acc += std::abs(chunk(r, j));
      best = std::max(best, acc);
    }
  }
  return best;
}

Eigen::VectorXcd dtn_difference_apply(const DirichletSolver& s1, const DirichletSolver& s2,
                                      const Eigen::VectorXcd& g) {
  // (Phi2 - Phi1) g = Neumann_2(g) - Neumann_1(g), matrix-free
  Eigen::VectorXcd n2 = s2.neumann(g);
  Eigen::VectorXcd n1 = s1.neumann(g);
  return n2 - n1;
}

namespace {

std::uint64_t fnv1a(const unsigned char* data, std::size_t len) {
  std::uint64_t hash = 1469598103934665603ull;
  for (std::size_t i = 0; i < len; ++i) {
    hash ^= data[i];
    hash *= 1099511628211ull;
  }
  return hash;
}

}  // namespace

void save_dtn(const DtnMap& map, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("save_dtn: cannot open " + path);
  const char magic[4] = {'G', 'D', 'T', 'N'};
  const std::uint32_t version = 1;
  const std::uint32_t n = static_cast<std::uint32_t>(map.domain->n);
  const double hw = map.domain->half_width;
  const double E = map.E;
  const std::uint64_t B = static_cast<std::uint64_t>(map.kernel.rows());
  const auto* bytes = reinterpret_cast<const unsigned char*>(map.kernel.data());
  const std::size_t nbytes = sizeof(double) * map.kernel.size();
  const std::uint64_t checksum = fnv1a(bytes, nbytes);
  os.write(magic, 4);
  os.write(reinterpret_cast<const char*>(&version), sizeof version);
  os.write(reinterpret_cast<const char*>(&n), sizeof n);
  os.write(reinterpret_cast<const char*>(&hw), sizeof hw);
  os.write(reinterpret_cast<const char*>(&E), sizeof E);
  os.write(reinterpret_cast<const char*>(&B), sizeof B);
  os.write(reinterpret_cast<const char*>(&checksum), sizeof checksum);
  // row-major on disk
  for (Eigen::Index i = 0; i < map.kernel.rows(); ++i)
    for (Eigen::Index j = 0; j < map.kernel.cols(); ++j) {
      const double v = map.kernel(i, j);
      os.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
  if (!os) throw ConfigError("save_dtn: write failed for " + path);
}

DtnMap load_dtn(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("load_dtn: cannot open " + path);
  char magic[4];
  std::uint32_t version = 0, n = 0;
  double hw = 0.0, E = 0.0;
  std::uint64_t B = 0, checksum = 0;
  is.read(magic, 4);
  if (std::memcmp(magic, "GDTN", 4) != 0) throw ConfigError("load_dtn: bad magic");
  is.read(reinterpret_cast<char*>(&version), sizeof version);
  if (version != 1) throw ConfigError("load_dtn: unsupported version");
  is.read(reinterpret_cast<char*>(&n), sizeof n);
  is.read(reinterpret_cast<char*>(&hw), sizeof hw);
  is.read(reinterpret_cast<char*>(&E), sizeof E);
  is.read(reinterpret_cast<char*>(&B), sizeof B);
  is.read(reinterpret_cast<char*>(&checksum), sizeof checksum);
  DtnMap map;
  map.domain = build_domain(hw, static_cast<int>(n));
  map.E = E;
  if (B != static_cast<std::uint64_t>(map.domain->boundary_count()))
    throw ConfigError("load_dtn: boundary count mismatch");
  map.kernel.resize(static_cast<Eigen::Index>(B), static_cast<Eigen::Index>(B));
  for (Eigen::Index i = 0; i < map.kernel.rows(); ++i)
    for (Eigen::Index j = 0; j < map.kernel.cols(); ++j) {
      double v;
      is.read(reinterpret_cast<char*>(&v), sizeof v);
      map.kernel(i, j) = v;
    }
  if (!is) throw ConfigError("load_dtn: truncated file");
  const auto* bytes = reinterpret_cast<const unsigned char*>(map.kernel.data());
  if (fnv1a(bytes, sizeof(double) * map.kernel.size()) != checksum)
    throw ConfigError("load_dtn: checksum mismatch");
  return map;
}

}  // namespace gelfand
