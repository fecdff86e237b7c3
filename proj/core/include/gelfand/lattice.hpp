#ifndef GELFAND_LATTICE_HPP
#define GELFAND_LATTICE_HPP

#include <Eigen/Core>
#include <complex>
#include <memory>
#include <vector>

#include "gelfand/geometry.hpp"

namespace gelfand {

/// Cubic periodic lattice of M^3 points with spacing h, aligned so that the
/// interior grid of `dom` is a sub-block. Carries the dual frequency lattice
/// xi_j = (2 pi / (M h)) * s(j), s(j) the signed DFT index.
class PaddedLattice {
 public:
  PaddedLattice(const DomainPtr& dom, int pad_factor);

  int size() const { return m_; }              // points per axis
  long total() const { return static_cast<long>(m_) * m_ * m_; }
  double spacing() const { return h_; }
  double period() const { return m_ * h_; }
  double freq_spacing() const { return 2.0 * M_PI / period(); }
  double nyquist() const { return M_PI / h_; }
  const DomainPtr& domain() const { return dom_; }
  int pad_factor() const { return pad_; }

  /// signed index of DFT bin j
  int signed_index(int j) const { return (j <= m_ / 2 - 1) ? j : j - m_; }
  double freq1(int j) const { return freq_spacing() * signed_index(j); }
  /// x-coordinate of lattice point m along one axis
  double coord1(int m) const { return x0_ + m * h_; }
  /// offset such that interior index i maps to lattice index i + block_start
  int block_start() const { return block_start_; }

  long flat(int i, int j, int k) const { return (static_cast<long>(i) * m_ + j) * m_ + k; }

  Eigen::Vector3d freq(int j1, int j2, int j3) const {
    return {freq1(j1), freq1(j2), freq1(j3)};
  }
  Eigen::Vector3d point(int m1, int m2, int m3) const {
    return {coord1(m1), coord1(m2), coord1(m3)};
  }

  /// Embed an interior-grid scalar field into the padded cube (zeros outside).
  std::vector<cplx> embed(const std::vector<double>& interior) const;
  /// Read back the interior block of a padded field.
  std::vector<cplx> restrict_interior(const std::vector<cplx>& padded) const;

 private:
  DomainPtr dom_;
  int pad_ = 0;
  int m_ = 0;
  double h_ = 0.0;
  double x0_ = 0.0;
  int block_start_ = 0;
};

/// Unnormalized c2c 3D transforms (FFTW, FFTW_ESTIMATE plans; deterministic).
/// forward:  F_j = sum_m f_m exp(-i 2 pi j.m / M)
/// backward: f_m = sum_j F_j exp(+i 2 pi j.m / M)
class Fft3 {
 public:
  explicit Fft3(int m);
  ~Fft3();
  Fft3(const Fft3&) = delete;
  Fft3& operator=(const Fft3&) = delete;

  void forward(std::vector<cplx>& data) const;
  void backward(std::vector<cplx>& data) const;
  int size() const { return m_; }

 private:
  int m_;
  void* plan_fwd_;
  void* plan_bwd_;
};

/// Shared plan per lattice size.
std::shared_ptr<const Fft3> fft_for(int m);

}  // namespace gelfand

#endif
