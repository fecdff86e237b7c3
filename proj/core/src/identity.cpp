#include "gelfand/identity.hpp"

#include <cmath>

#include "gelfand/errors.hpp"

namespace gelfand {

namespace {

void require_states(const FaddeevState& s1, const FaddeevState& s2, const MomentumPair& pair) {
  if (!s1.converged || !s2.converged)
    throw InvalidStateError("identity: states must be converged");
  const Eigen::Vector3cd minus_l = -pair.l;
  if ((s1.k - minus_l).norm() > 1e-12 * (1.0 + minus_l.norm()))
    throw InvalidStateError("identity: first state must be solved at -l");
  if ((s2.k - pair.k).norm() > 1e-12 * (1.0 + pair.k.norm()))
    throw InvalidStateError("identity: second state must be solved at k");
}

}  // namespace

cplx vhat_diff_at(const Potential& v1, const Potential& v2, const Eigen::Vector3d& xi) {
  if (v1.domain != v2.domain)
    throw IncompatibilityError("vhat_diff_at: potentials on different domains");
  const auto& dom = *v1.domain;
  const int n = dom.n;
  const double h3 = std::pow(dom.h, 3);
  cplx acc(0.0, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double dv = v2.values[dom.flat_index(i, j, k)] - v1.values[dom.flat_index(i, j, k)];
        if (dv == 0.0) continue;
        const double ph = xi.dot(dom.node(i, j, k));
        acc += cplx(std::cos(ph), std::sin(ph)) * dv;
      }
  return acc * h3 / std::pow(2.0 * M_PI, 3);
}

cplx hdiff_volume(const Potential& v1, const Potential& v2, const FaddeevState& s1,
                  const FaddeevState& s2, const MomentumPair& pair) {
  if (v1.domain != v2.domain)
    throw IncompatibilityError("hdiff_volume: potentials on different domains");
  require_states(s1, s2, pair);
  const auto& dom = *v1.domain;
  const int n = dom.n;
  const double h3 = std::pow(dom.h, 3);
  const auto& lat1 = *s1.lattice;
  const auto& lat2 = *s2.lattice;
  const int b1 = lat1.block_start();
  const int b2 = lat2.block_start();
  // psi_1(x,-l) psi_2(x,k) = e^{i(k-l)x} mu_1 mu_2 with real k - l = xi
  cplx acc(0.0, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double dv = v2.values[dom.flat_index(i, j, k)] - v1.values[dom.flat_index(i, j, k)];
        if (dv == 0.0) continue;
        const double ph = pair.xi.dot(dom.node(i, j, k));
        const cplx mu1 = s1.mu[lat1.flat(i + b1, j + b1, k + b1)];
        const cplx mu2 = s2.mu[lat2.flat(i + b2, j + b2, k + b2)];
        acc += cplx(std::cos(ph), std::sin(ph)) * dv * mu1 * mu2;
      }
  return acc * h3 / std::pow(2.0 * M_PI, 3);
}

namespace {

cplx boundary_pairing(const Domain& dom, const Eigen::VectorXcd& psi1_trace,
                      const Eigen::VectorXcd& dtn_diff_psi2) {
  cplx acc(0.0, 0.0);
  for (int b = 0; b < dom.boundary_count(); ++b)
    acc += dom.boundary_nodes[b].weight * psi1_trace(b) * dtn_diff_psi2(b);
  return acc / std::pow(2.0 * M_PI, 3);
}

}  // namespace

cplx hdiff_boundary(const DtnMap& phi1, const DtnMap& phi2, const FaddeevState& s1,
                    const FaddeevState& s2, const MomentumPair& pair, const Potential& v_probe) {
  if (phi1.domain != phi2.domain)
    throw IncompatibilityError("hdiff_boundary: kernels on different discretizations");
  if (phi1.E != phi2.E || std::abs(phi1.E - pair.E) > 1e-10 * (1.0 + std::abs(pair.E)))
    throw IncompatibilityError("hdiff_boundary: energy mismatch between kernels and pair");
  require_states(s1, s2, pair);
  const Eigen::VectorXcd t1 = psi_trace(s1, v_probe);
  const Eigen::VectorXcd t2 = psi_trace(s2, v_probe);
  const Eigen::VectorXcd diff = phi2.apply(t2) - phi1.apply(t2);
  return boundary_pairing(*phi1.domain, t1, diff);
}

cplx hdiff_boundary(const DirichletSolver& solver1, const DirichletSolver& solver2,
                    const FaddeevState& s1, const FaddeevState& s2, const MomentumPair& pair,
                    const Potential& v_probe) {
  if (solver1.domain() != solver2.domain())
    throw IncompatibilityError("hdiff_boundary: solvers on different discretizations");
  if (std::abs(solver1.energy() - pair.E) > 1e-10 * (1.0 + std::abs(pair.E)))
    throw IncompatibilityError("hdiff_boundary: energy mismatch between solvers and pair");
  require_states(s1, s2, pair);
  const Eigen::VectorXcd t1 = psi_trace(s1, v_probe);
  const Eigen::VectorXcd t2 = psi_trace(s2, v_probe);
  const Eigen::VectorXcd diff = dtn_difference_apply(solver1, solver2, t2);
  return boundary_pairing(*solver1.domain(), t1, diff);
}

IdentityCheck verify_scattering_residual(const Potential& v1, const Potential& v2,
                                         const FaddeevState& s1k, const FaddeevState& s2k,
                                         const MomentumPair& pair, int /*pad_factor*/) {
  if (!s1k.converged || !s2k.converged)
    throw InvalidStateError("verify_scattering_residual: states must be converged");
  if ((s1k.k - pair.k).norm() > 1e-12 * (1.0 + pair.k.norm()) ||
      (s2k.k - pair.k).norm() > 1e-12 * (1.0 + pair.k.norm()))
    throw InvalidStateError("verify_scattering_residual: both states must be solved at pair.k");

  IdentityCheck rec;
  rec.pair = pair;
  const cplx h1 = scattering_h(v1, s1k, pair);
  const cplx h2 = scattering_h(v2, s2k, pair);
  rec.vhat_diff = vhat_diff_at(v1, v2, pair.xi);
  // |vhat1 - vhat2 - h1 + h2| = |(vhat2 - vhat1) - (h2 - h1)|
  rec.residual_scattering = std::abs(rec.vhat_diff - (h2 - h1));

  const double N = std::max(grid_linf(v1), grid_linf(v2));
  const double l2 = grid_l2(lincomb(1.0, v1, -1.0, v2));
  const double denom = N * (1.0 + N) * l2 / std::sqrt(pair.E + pair.rho * pair.rho);
  rec.implied_constant = (denom > 0.0) ? rec.residual_scattering / denom : 0.0;
  return rec;
}

FourierBoundRecord verify_fourier_bound(const Potential& v1, const Potential& v2,
                                        const MomentumPair& pair, double delta, double N,
                                        double c1, int /*pad_factor*/) {
  const double s = pair.E + pair.rho * pair.rho;
  if (!(s > 0.0)) throw DomainError("verify_fourier_bound: E + rho^2 must be positive");
  if (pair.xi.norm() > 2.0 * std::sqrt(s) * (1.0 + 1e-12))
    throw InfeasibleFrequencyError("verify_fourier_bound: xi outside the reachable ball");
  FourierBoundRecord rec;
  rec.lhs = std::abs(vhat_diff_at(v1, v2, pair.xi));
  const double L = v1.domain->L;
  rec.term_boundary = std::exp(2.0 * pair.rho * L) * delta;
  rec.term_energy = grid_l2(lincomb(1.0, v1, -1.0, v2)) / std::sqrt(s);
  const double envelope = (1.0 + N) * (1.0 + N) * (rec.term_boundary + rec.term_energy);
  rec.implied_c1 = (envelope > 0.0) ? rec.lhs / envelope : 0.0;
  rec.holds = rec.lhs <= c1 * envelope;
  return rec;
}

}  // namespace gelfand
