#include "gelfand/lattice.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <string>

#include "gelfand/errors.hpp"

namespace gelfand {

PaddedLattice::PaddedLattice(const DomainPtr& dom, int pad_factor)
    : dom_(dom), pad_(pad_factor) {
  if (pad_factor < 2)
    throw ConfigError("PaddedLattice: pad_factor must be >= 2 to keep the "
                      "convolution period at least twice the domain extent");
  h_ = dom->h;
  m_ = pad_factor * (dom->n + 1);
  // centre the interior block; coordinates tied to the interior grid
  block_start_ = (m_ - dom->n) / 2;
  x0_ = dom->coord(0) - block_start_ * h_;
}

std::vector<cplx> PaddedLattice::embed(const std::vector<double>& interior) const {
  const int n = dom_->n;
  if (static_cast<int>(interior.size()) != n * n * n)
    throw IncompatibilityError("embed: field size does not match the domain grid");
  std::vector<cplx> out(total(), cplx(0.0, 0.0));
  const int s = block_start_;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        out[flat(i + s, j + s, k + s)] = interior[(static_cast<long>(i) * n + j) * n + k];
  return out;
}

std::vector<cplx> PaddedLattice::restrict_interior(const std::vector<cplx>& padded) const {
  const int n = dom_->n;
  if (static_cast<long>(padded.size()) != total())
    throw IncompatibilityError("restrict_interior: field size does not match the lattice");
  std::vector<cplx> out(static_cast<long>(n) * n * n);
  const int s = block_start_;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        out[(static_cast<long>(i) * n + j) * n + k] = padded[flat(i + s, j + s, k + s)];
  return out;
}

namespace {
std::mutex plan_mutex;
}

Fft3::Fft3(int m) : m_(m) {
  std::lock_guard<std::mutex> lock(plan_mutex);
  fftw_complex* buf = fftw_alloc_complex(static_cast<std::size_t>(m) * m * m);
  if (!buf) throw SolverError("Fft3: allocation failed for size " + std::to_string(m));
  // FFTW_UNALIGNED: plans are executed on ordinary vector storage via the
  // new-array interface; FFTW_ESTIMATE keeps plan selection deterministic.
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  plan_fwd_ = fftw_plan_dft_3d(m, m, m, buf, buf, FFTW_FORWARD, flags);
  plan_bwd_ = fftw_plan_dft_3d(m, m, m, buf, buf, FFTW_BACKWARD, flags);
  fftw_free(buf);
  if (!plan_fwd_ || !plan_bwd_) throw SolverError("Fft3: plan creation failed");
}

Fft3::~Fft3() {
  std::lock_guard<std::mutex> lock(plan_mutex);
  fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
}

void Fft3::forward(std::vector<cplx>& data) const {
  if (static_cast<long>(data.size()) != static_cast<long>(m_) * m_ * m_)
    throw IncompatibilityError("Fft3::forward: size mismatch");
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(static_cast<fftw_plan>(plan_fwd_), p, p);
}

void Fft3::backward(std::vector<cplx>& data) const {
  if (static_cast<long>(data.size()) != static_cast<long>(m_) * m_ * m_)
    throw IncompatibilityError("Fft3::backward: size mismatch");
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(static_cast<fftw_plan>(plan_bwd_), p, p);
}

std::shared_ptr<const Fft3> fft_for(int m) {
  static std::mutex cache_mutex;
  static std::map<int, std::weak_ptr<const Fft3>> cache;
  std::lock_guard<std::mutex> lock(cache_mutex);
  auto it = cache.find(m);
  if (it != cache.end()) {
    if (auto p = it->second.lock()) return p;
  }
  auto p = std::make_shared<const Fft3>(m);
  cache[m] = p;
  return p;
}

}  // namespace gelfand
