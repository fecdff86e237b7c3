#ifndef GELFAND_RNG_HPP
#define GELFAND_RNG_HPP

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <random>

namespace gelfand {

/// mt19937_64 with explicit value mappings, so streams are reproducible
/// independent of the standard library's distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  /// uniform in [0, 1)
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// uniform integer in [0, n)
  std::uint64_t index(std::uint64_t n) { return eng_() % n; }

  /// Marsaglia polar, fixed evaluation order
  double gaussian() {
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    return u * std::sqrt(-2.0 * std::log(s) / s);
  }

  Eigen::Vector3d unit_vector() {
    // rejection from the cube keeps the stream layout simple
    while (true) {
      Eigen::Vector3d v(2.0 * uniform() - 1.0, 2.0 * uniform() - 1.0, 2.0 * uniform() - 1.0);
      double n = v.norm();
      if (n > 1e-3 && n <= 1.0) return v / n;
    }
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace gelfand

#endif
