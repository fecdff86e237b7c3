#ifndef GELFAND_ESTIMATOR_HPP
#define GELFAND_ESTIMATOR_HPP

#include <map>
#include <optional>
#include <vector>

#include "gelfand/constants.hpp"
#include "gelfand/geometry.hpp"
#include "gelfand/potential.hpp"

namespace gelfand {

struct EstimatorParams {
  double tau = 0.5;
  double E = 0.0;
  double delta = 0.0;
  double N = 0.0;      // sup-norm budget of the potentials
  double N_Hm = 0.0;   // H^m budget of the difference
  double N_Wm = 0.0;   // W^m budget of the difference
  double m = 2.0;
  double L = 0.0;      // max |x| over the boundary
  CalibratedConstants constants;
};

struct RhoChoice {
  double gamma = 0.0;
  double rho = 0.0;
  bool degenerate = false;  // tau == 1: no imaginary-momentum prescription
};

/// gamma = (1 - tau)/(2L), rho = gamma ln(3 + 1/delta).
RhoChoice choose_rho(double tau, double delta, double L);

struct SplitRadius {
  double r = 0.0;
  double q = 0.0;
};

/// L2-mode splitting radius r = q (1+N)^{-4/3} (E + rho^2)^{1/3},
/// q = (1/(2 pi)) (16 pi c1^2 / 3)^{-1/3}.
SplitRadius choose_r_l2(double N, double E, double rho, double c1);

/// sup-mode splitting radius r = q~ (1+N)^{-2/3} (E + rho^2)^{1/6},
/// q~ = (8 pi c1 c3 / 3)^{-1/3}.
SplitRadius choose_r_linf(double N, double E, double rho, double c1, double c3);

enum class SplitMode { L2, L1 };

/// Exact partition of the lattice norm into |xi| <= r and |xi| > r parts:
/// L2 mode returns (I1, I2) with I1^2 + I2^2 the full squared lattice norm,
/// L1 mode returns parts summing to the full ell^1 norm.
std::pair<double, double> split_error(const Spectrum& spectrum_diff, double r, SplitMode mode);

/// Right-hand side of the L2 stability estimate
///   A Lam^{1/2} delta^tau + B (1+N)^{4m/3} N_Hm Lam^{-m/3},
///   Lam = alpha E + beta (1-tau)^2 ln^2(3 + 1/delta).
/// Returns +inf when Lam == 0 (the bound is vacuous there);
/// throws on infeasible (tau, E) combinations.
double stability_bound_l2(const EstimatorParams& p);

/// Right-hand side of the sup-norm stability estimate (m > 3 required).
double stability_bound_linf(const EstimatorParams& p);

struct IntermediateBound {
  double bound = 0.0;
  bool floor_ok = true;  // E + rho^2 above the calibrated feasibility floor
};

/// Free-rho L2 error bound
///   2 [ sqrt(E+rho^2) e^{2 rho L} delta / 2
///       + (1+N)^{4m/3} N_Hm q^{-m} (E+rho^2)^{-m/3} ].
IntermediateBound intermediate_l2(double E, double rho, double delta, double N, double N_Hm,
                                  double m, double c1, double L, double floor_r);

/// Free-rho sup-norm bound
///   2 [ sqrt(E+rho^2) e^{2 rho L} delta / (2 c3)
///       + 4 pi (1+N)^{2(m-3)/3} N_Wm q~^{3-m} / (m-3) (E+rho^2)^{-(m-3)/6} ].
IntermediateBound intermediate_linf(double E, double rho, double delta, double N, double N_Wm,
                                    double m, double c1, double c3, double L, double floor_r);

/// overflow-guarded b * e^a (log-space product)
double exp_mul(double log_factor, double value);

struct Reconstruction {
  Potential field;          // real part of the truncated inverse transform
  double imag_residue = 0.0;  // lattice L2 norm of the imaginary part
  int modes_used = 0;
};

/// Inverse lattice transform of low-frequency samples, zero beyond |xi| <= r.
/// Samples are keyed by the signed lattice index triple.
Reconstruction reconstruct_diff_lowfreq(
    const std::map<std::array<int, 3>, cplx>& samples, double r, const PaddedLattice& lattice);

/// Signed index triples of lattice frequencies inside the ball |xi| <= r.
std::vector<std::array<int, 3>> lattice_ball(const PaddedLattice& lattice, double r);

}  // namespace gelfand

#endif
