#ifndef GELFAND_IDENTITY_HPP
#define GELFAND_IDENTITY_HPP

#include <algorithm>
#include <complex>

#include "gelfand/faddeev.hpp"
#include "gelfand/forward.hpp"
#include "gelfand/geometry.hpp"
#include "gelfand/potential.hpp"

namespace gelfand {

/// One cross-validation record for a momentum pair.
struct IdentityCheck {
  MomentumPair pair;
  cplx h_diff_volume{0.0, 0.0};
  cplx h_diff_boundary{0.0, 0.0};
  cplx vhat_diff{0.0, 0.0};
  double residual_scattering = 0.0;  // |vhat1 - vhat2 - h1 + h2|
  double residual_identity = 0.0;    // relative volume-vs-boundary mismatch
  double implied_constant = 0.0;     // residual_scattering scaled by the bound
};

/// Volume form: (2 pi)^-3 int psi_1(x,-l) (v2 - v1) psi_2(x,k) dx.
/// s1 must be solved at -pair.l, s2 at pair.k.
cplx hdiff_volume(const Potential& v1, const Potential& v2, const FaddeevState& s1,
                  const FaddeevState& s2, const MomentumPair& pair);

/// Boundary form: (2 pi)^-3 int_dD psi_1(x,-l) [(Phi2 - Phi1) psi_2(.,k)](x) dx
/// with assembled kernels.
cplx hdiff_boundary(const DtnMap& phi1, const DtnMap& phi2, const FaddeevState& s1,
                    const FaddeevState& s2, const MomentumPair& pair, const Potential& v_probe);

/// Matrix-free boundary form through the factored solvers (identical
/// discretization, no kernel assembly).
cplx hdiff_boundary(const DirichletSolver& solver1, const DirichletSolver& solver2,
                    const FaddeevState& s1, const FaddeevState& s2, const MomentumPair& pair,
                    const Potential& v_probe);

/// Residual of the scattering/Fourier comparison at xi = k - l:
/// |vhat1(xi) - vhat2(xi) - h1(k,l) + h2(k,l)| and its ratio against
/// N (1+N) ||v1 - v2||_L2 / sqrt(E + rho^2).
IdentityCheck verify_scattering_residual(const Potential& v1, const Potential& v2,
                                         const FaddeevState& s1k, const FaddeevState& s2k,
                                         const MomentumPair& pair, int pad_factor = 2);

struct FourierBoundRecord {
  double lhs = 0.0;          // |vhat2(xi) - vhat1(xi)|
  double term_boundary = 0.0;  // e^{2 rho L} delta
  double term_energy = 0.0;    // ||v1 - v2||_L2 / sqrt(E + rho^2)
  double implied_c1 = 0.0;     // lhs / ((1+N)^2 (term_boundary + term_energy))
  bool holds = false;          // with the supplied c1
};

/// Low-frequency bound check: |vhat2 - vhat1|(xi) against
/// c1 (1+N)^2 (e^{2 rho L} delta + ||v1-v2||_L2 / sqrt(E+rho^2)).
FourierBoundRecord verify_fourier_bound(const Potential& v1, const Potential& v2,
                                        const MomentumPair& pair, double delta, double N,
                                        double c1, int pad_factor = 2);

/// vhat2 - vhat1 at an arbitrary real frequency (direct grid quadrature).
cplx vhat_diff_at(const Potential& v1, const Potential& v2, const Eigen::Vector3d& xi);

/// |a - b| / max(|a|, |b|, eps_floor); the floor guards the zero fixture
inline double relative_mismatch(cplx a, cplx b, double eps_floor = 1e-14) {
  const double denom = std::max({std::abs(a), std::abs(b), eps_floor});
  return std::abs(a - b) / denom;
}

}  // namespace gelfand

#endif
