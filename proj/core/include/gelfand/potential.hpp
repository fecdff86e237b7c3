#ifndef GELFAND_POTENTIAL_HPP
#define GELFAND_POTENTIAL_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "gelfand/geometry.hpp"
#include "gelfand/lattice.hpp"
#include "gelfand/rng.hpp"

namespace gelfand {

/// Real potential sampled on the interior grid, zero outside the box and
/// within `support_margin` of the boundary.
struct Potential {
  DomainPtr domain;
  std::vector<double> values;   // n^3, row-major (i,j,k)
  double linf_norm = 0.0;
  double support_margin = 0.0;  // distance from support to the boundary

  double at(int i, int j, int k) const { return values[domain->flat_index(i, j, k)]; }
};

/// Forward lattice transform of a potential under the (2 pi)^-3 e^{+i xi x}
/// convention, sampled on the dual lattice of a PaddedLattice.
struct Spectrum {
  std::shared_ptr<const PaddedLattice> lattice;
  std::vector<cplx> coefficients;  // M^3, DFT bin order

  cplx at(int j1, int j2, int j3) const {
    return coefficients[lattice->flat(j1, j2, j3)];
  }
};

enum class NormKind { Linf, L2, Hm, Wm };

Potential make_potential(const DomainPtr& dom, std::vector<double> values,
                         int margin_cells = 2);

/// a*v1 + b*v2 on a shared domain
Potential lincomb(double a, const Potential& v1, double b, const Potential& v2);

/// (2 pi)^-3 int e^{i xi x} w(x) dx on the dual lattice, via FFT with
/// zero-padding to pad_factor times the box extent.
Spectrum fourier_transform(const Potential& w, int pad_factor = 2);

/// Linf / L2 / H^m / W^m norms. `m` is ignored for Linf and L2.
/// H^m and W^m are evaluated on the spectral lattice with real-power weights.
double norm(const Potential& w, NormKind kind, double m = 0.0, int pad_factor = 2);

/// Norms evaluated on an existing spectrum (saves the transform).
double spectral_norm(const Spectrum& s, NormKind kind, double m);

/// ell^2 tail sqrt( sum_{|xi| >= r} |F w|^2 dxi^3 )
double tail_l2(const Spectrum& s, double r);

/// ell^1 tail  sum_{|xi| >= r} |F w| dxi^3 ; requires m > 3 in callers that
/// compare against the W^m bound (m only checked, not used in the sum).
double tail_l1(const Spectrum& s, double r, double m);

enum class PotentialKind { GaussianBump, CosineBump, RandomBandlimited };

struct GenerateParams {
  double amplitude = 1.0;
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  double width = 0.2;      // Gaussian sigma or bump radius, in box units
  int margin_cells = 2;    // zero layer adjacent to the boundary
  int max_mode = 2;        // random_bandlimited: modes per axis in [-max, max]
};

Potential generate(const DomainPtr& dom, PotentialKind kind,
                   const GenerateParams& params, std::uint64_t seed);

/// Plain-text grid format: header (n, half_width, margin) + row-major values.
void save_potential(const Potential& w, std::ostream& os);
Potential load_potential(std::istream& is);
void save_potential_file(const Potential& w, const std::string& path);
Potential load_potential_file(const std::string& path);

/// grid L2 norm of a difference without building a Potential
double grid_l2(const Potential& a);
double grid_linf(const Potential& a);

}  // namespace gelfand

#endif
