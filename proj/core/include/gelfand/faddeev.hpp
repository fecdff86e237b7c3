#ifndef GELFAND_FADDEEV_HPP
#define GELFAND_FADDEEV_HPP

#include <complex>
#include <memory>
#include <string>
#include <vector>

#include "gelfand/geometry.hpp"
#include "gelfand/lattice.hpp"
#include "gelfand/potential.hpp"

namespace gelfand {

/// Closed form of the zero-real-part kernel g(x, i rho omega):
///   -exp(rho (omega.x - |x|)) / (4 pi |x|).
cplx green_reference(const Eigen::Vector3d& x, double rho, const Eigen::Vector3d& omega);

/// Discrete convolution with the momentum-space kernel -1/(xi^2 + 2 k.xi).
///
/// Purely imaginary k = i rho omega: the kernel is a modulated Yukawa kernel;
/// it is built from the closed-form symbol of the radially truncated Yukawa
/// kernel, with exact cell averages substituted near the source and along the
/// lattice axes where the plain lattice sum is least accurate.
///
/// General k: plain lattice symbol on a frequency lattice shifted along Im k
/// (offset chosen to maximize the minimal denominator), with a cell-average
/// filter. Exactness of the modulation keeps the shifted transform a plain
/// FFT multiply.
class GreenOperator {
 public:
  GreenOperator(std::shared_ptr<const PaddedLattice> lattice, const Eigen::Vector3cd& k);

  const Eigen::Vector3cd& momentum() const { return k_; }
  const std::shared_ptr<const PaddedLattice>& lattice() const { return lat_; }

  /// convolution g * f on the padded lattice
  std::vector<cplx> apply(const std::vector<cplx>& f) const;

  /// effective symbol table (DFT bin order); approx -filter/(xi^2 + 2 k.xi)
  const std::vector<cplx>& symbol() const { return symbol_; }
  /// frequency offset used by the shifted lattice (zero when Re k = 0)
  const Eigen::Vector3d& offset() const { return offset_; }
  /// smallest |xi^2 + 2 k.xi| over the (shifted) lattice
  double min_denominator() const { return min_denom_; }
  bool modulated_route() const { return yukawa_route_; }
  /// kernel truncation radius of the modulated route (0 otherwise)
  double truncation_radius() const { return trunc_T_; }

  /// kernel values g(z) on displacement vectors z of the lattice (the
  /// discrete convolution table), for oracle comparisons
  std::vector<cplx> kernel_table() const;

 private:
  std::shared_ptr<const PaddedLattice> lat_;
  Eigen::Vector3cd k_;
  bool yukawa_route_ = false;
  Eigen::Vector3d offset_ = Eigen::Vector3d::Zero();
  double min_denom_ = 0.0;
  double trunc_T_ = 0.0;
  std::vector<cplx> symbol_;   // S_eff: out = (1/M^3) IFFT[S_eff . FFT(mod_in f)] . mod_out
  std::vector<cplx> mod_in_;   // e^{-i zeta x}
  std::vector<cplx> mod_out_;  // e^{+i zeta x}
  std::shared_ptr<const Fft3> fft_;

  void build_yukawa_route(double rho, const Eigen::Vector3d& omega);
  void build_shifted_route();
};

/// Raw symbol field used by the operator (see GreenOperator::symbol()).
std::vector<cplx> faddeev_symbol(const Eigen::Vector3cd& k, const PaddedLattice& lattice);

/// g * f for f supported in the domain block of the lattice.
std::vector<cplx> apply_green(const Eigen::Vector3cd& k, const std::vector<cplx>& f,
                              std::shared_ptr<const PaddedLattice> lattice);

struct FaddeevState {
  Eigen::Vector3cd k;
  std::shared_ptr<const PaddedLattice> lattice;
  std::vector<cplx> mu;          // padded field
  int iterations = 0;
  double contraction_estimate = 0.0;
  bool converged = false;
  double final_increment = 0.0;  // relative l2 of the last update

  cplx mu_at(int i1, int i2, int i3) const { return mu[lattice->flat(i1, i2, i3)]; }
};

struct SolveMuOptions {
  int pad_factor = 3;
  int max_iterations = 200;
  double tolerance = 1e-8;
};

/// Fixed-point iteration mu = 1 + G_k(v mu) from mu = 1.
FaddeevState solve_mu(const Potential& v, const Eigen::Vector3cd& k,
                      const SolveMuOptions& opt = {});

/// Generalized scattering amplitude h(k, l) = (2 pi)^-3 int e^{i xi x} v mu dx
/// with xi = k - l real.
cplx scattering_h(const Potential& v, const FaddeevState& state, const MomentumPair& pair);

/// e^{i k x} mu(x) evaluated on the boundary nodes of the potential's domain.
Eigen::VectorXcd psi_trace(const FaddeevState& state, const Potential& v);

/// sup |mu| and sup |mu - 1| over the domain block
double sup_abs_mu(const FaddeevState& state);
double sup_abs_mu_minus_one(const FaddeevState& state);

/// mu on the interior grid in the potential text format extended by
/// re/im value pairs
void save_mu_field(const FaddeevState& state, const std::string& path);
std::vector<cplx> load_mu_field(const std::string& path, int expected_n);

}  // namespace gelfand

#endif
