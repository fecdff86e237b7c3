#ifndef GELFAND_CONSTANTS_HPP
#define GELFAND_CONSTANTS_HPP

#include <cstdint>
#include <string>

namespace gelfand {

/// Numerical witnesses for the domain-dependent constants of the stability
/// theory, produced by calibration and consumed by the bound evaluations.
struct CalibratedConstants {
  // low-frequency bound constant and scattering-residual constant
  double c1 = 1.0;
  double c3 = 1.0;  // sqrt of the domain volume
  double c5 = 1.0;  // sup |mu| envelope
  double c6 = 1.0;
  double c9 = 0.0;  // (2 pi)^-3 * boundary area
  double r_star = 0.0;  // empirical feasibility floor for sqrt(E+rho^2)/(1+N)

  // L2-estimate constants
  double A = 1.0, B = 1.0, alpha = 1.0, beta = 1.0;
  // sup-norm-estimate constants
  double A_t = 1.0, B_t = 1.0, alpha_t = 1.0, beta_t = 1.0;

  struct Provenance {
    std::string config_digest;
    std::uint64_t seed = 0;
    int training_rows = 0;
    int training_fixtures = 0;
    int training_energies = 0;
  } provenance;
};

void save_constants(const CalibratedConstants& c, const std::string& path);
CalibratedConstants load_constants(const std::string& path);

}  // namespace gelfand

#endif
