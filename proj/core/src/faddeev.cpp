#include "gelfand/faddeev.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "gelfand/errors.hpp"

namespace gelfand {

namespace {

constexpr int kCorrectionBall = 8;  // exact cell averages within this many cells of 0
constexpr int kAxisTube = 2;        // ... and within this many cells of a lattice axis

/// per-axis extent of the lags the solver reads: outputs on the box plus a
/// two-cell halo against inputs supported in the box
double needed_lag_extent(const PaddedLattice& lat) {
  return 2.0 * lat.domain()->half_width + 4.0 * lat.spacing();
}

/// truncation radius of the modulated kernel route; must cover all needed
/// radial lags while staying clear of the periodic images
double yukawa_truncation_radius(const PaddedLattice& lat) {
  const double X = needed_lag_extent(lat);
  const double T = 1.05 * std::sqrt(3.0) * X;
  const double wrap_free = 0.98 * (lat.period() - X);
  if (T > wrap_free)
    throw ConfigError(
        "GreenOperator: pad_factor too small for the modulated kernel route "
        "(truncation radius " + std::to_string(T) + " exceeds the wrap-free bound " +
        std::to_string(wrap_free) + ")");
  return T;
}

double sinc(double t) { return (std::abs(t) < 1e-8) ? 1.0 - t * t / 6.0 : std::sin(t) / t; }

/// plain Fourier transform of the radially truncated Yukawa kernel
/// -e^{-rho r}/(4 pi r) 1_{r<=T}:  -(1/s) Im[(e^{(-rho+is)T} - 1)/(-rho+is)]
double trunc_yukawa_symbol(double s, double rho, double T) {
  if (s < 1e-12) return -(1.0 - (1.0 + rho * T) * std::exp(-rho * T)) / (rho * rho);
  const cplx z(-rho, s);
  const cplx I = (std::exp(z * T) - 1.0) / z;
  return -I.imag() / s;
}

/// cell average of -e^{-rho r}/(4 pi r) over the h-cell centred at z
double cell_avg_yukawa(const Eigen::Vector3d& z, double h, double rho) {
  // tensor Gauss-Legendre, 6 points per axis
  static const std::array<double, 6> gx = {-0.9324695142031521, -0.6612093864662645,
                                           -0.2386191860831969, 0.2386191860831969,
                                           0.6612093864662645,  0.9324695142031521};
  static const std::array<double, 6> gw = {0.1713244923791704, 0.3607615730481386,
                                           0.4679139345726910, 0.4679139345726910,
                                           0.3607615730481386, 0.1713244923791704};
  double acc = 0.0;
  for (int a = 0; a < 6; ++a)
    for (int b = 0; b < 6; ++b)
      for (int c = 0; c < 6; ++c) {
        const double x = z(0) + 0.5 * h * gx[a];
        const double y = z(1) + 0.5 * h * gx[b];
        const double w = z(2) + 0.5 * h * gx[c];
        const double r = std::sqrt(x * x + y * y + w * w);
        acc += gw[a] * gw[b] * gw[c] * std::exp(-rho * r) / r;
      }
  return -acc * 0.125 / (4.0 * M_PI);
}

/// cell average over the singular centre cell: analytic ball + midpoint rest
double center_cell_avg_yukawa(double h, double rho) {
  const double rin = 0.49 * h;
  const double inner = (1.0 - (1.0 + rho * rin) * std::exp(-rho * rin)) / (rho * rho);
  const int ng = 32;
  double rem = 0.0;
  for (int a = 0; a < ng; ++a)
    for (int b = 0; b < ng; ++b)
      for (int c = 0; c < ng; ++c) {
        const double x = ((a + 0.5) / ng - 0.5) * h;
        const double y = ((b + 0.5) / ng - 0.5) * h;
        const double w = ((c + 0.5) / ng - 0.5) * h;
        const double r = std::sqrt(x * x + y * y + w * w);
        if (r > rin) rem += std::exp(-rho * r) / (4.0 * M_PI * r);
      }
  rem *= std::pow(h / ng, 3);
  return -(inner + rem) / (h * h * h);
}

}  // namespace

cplx green_reference(const Eigen::Vector3d& x, double rho, const Eigen::Vector3d& omega) {
  const double r = x.norm();
  if (!(r > 0.0)) throw DomainError("green_reference: x must be nonzero");
  if (!(rho > 0.0)) throw DomainError("green_reference: rho must be positive");
  const double expo = rho * (omega.dot(x) - r);
  return cplx(-std::exp(expo) / (4.0 * M_PI * r), 0.0);
}

GreenOperator::GreenOperator(std::shared_ptr<const PaddedLattice> lattice,
                             const Eigen::Vector3cd& k)
    : lat_(std::move(lattice)), k_(k) {
  const double imn = k.imag().norm();
  if (!(imn > 0.0))
    throw DomainError("GreenOperator: Im k must be nonzero (symbol undefined on real momenta)");
  fft_ = fft_for(lat_->size());
  const double ren = k.real().norm();
  yukawa_route_ = ren <= 1e-12 * (imn + ren);
  if (yukawa_route_)
    build_yukawa_route(imn, k.imag().normalized());
  else
    build_shifted_route();
}

void GreenOperator::build_yukawa_route(double rho, const Eigen::Vector3d& omega) {
  const int M = lat_->size();
  const double h = lat_->spacing();
  const double T = yukawa_truncation_radius(*lat_);
  trunc_T_ = T;

  // spectral construction of the truncated kernel, then exact cell averages
  // where the plain lattice sum is weakest
  std::vector<cplx> field(lat_->total());
  for (int j1 = 0; j1 < M; ++j1)
    for (int j2 = 0; j2 < M; ++j2)
      for (int j3 = 0; j3 < M; ++j3) {
        const Eigen::Vector3d xi = lat_->freq(j1, j2, j3);
        double v = trunc_yukawa_symbol(xi.norm(), rho, T);
        v *= sinc(0.5 * xi(0) * h) * sinc(0.5 * xi(1) * h) * sinc(0.5 * xi(2) * h);
        field[lat_->flat(j1, j2, j3)] = cplx(v, 0.0);
      }
  fft_->backward(field);
  const double inv_vol = 1.0 / (lat_->period() * lat_->period() * lat_->period());
  for (auto& c : field) c *= inv_vol;  // now the x-space kernel table

  auto signed_of = [&](int j) { return lat_->signed_index(j); };
  const int corr_extent = static_cast<int>(std::floor(0.75 * T / h));
  for (int j1 = 0; j1 < M; ++j1)
    for (int j2 = 0; j2 < M; ++j2)
      for (int j3 = 0; j3 < M; ++j3) {
        const int s1 = signed_of(j1), s2 = signed_of(j2), s3 = signed_of(j3);
        const int a1 = std::abs(s1), a2 = std::abs(s2), a3 = std::abs(s3);
        const int rmax = std::max({a1, a2, a3});
        if (rmax > corr_extent) continue;
        const double r2 = double(s1) * s1 + double(s2) * s2 + double(s3) * s3;
        const bool near_source = r2 <= double(kCorrectionBall) * kCorrectionBall;
        // distance to the nearest coordinate axis, in cells
        const int t12 = std::max(a1, a2), t13 = std::max(a1, a3), t23 = std::max(a2, a3);
        const bool near_axis = std::min({t12, t13, t23}) <= kAxisTube;
        if (!near_source && !near_axis) continue;
        const Eigen::Vector3d z(h * s1, h * s2, h * s3);
        const long idx = lat_->flat(j1, j2, j3);
        if (s1 == 0 && s2 == 0 && s3 == 0)
          field[idx] = cplx(center_cell_avg_yukawa(h, rho), 0.0);
        else
          field[idx] = cplx(cell_avg_yukawa(z, h, rho), 0.0);
      }

  // effective symbol of the corrected table
  symbol_ = field;
  fft_->forward(symbol_);
  const double h3 = h * h * h;
  for (auto& c : symbol_) c *= h3;

  // modulations e^{+-rho omega.x}
  mod_in_.resize(lat_->total());
  mod_out_.resize(lat_->total());
  for (int m1 = 0; m1 < M; ++m1)
    for (int m2 = 0; m2 < M; ++m2)
      for (int m3 = 0; m3 < M; ++m3) {
        const double e = rho * omega.dot(lat_->point(m1, m2, m3));
        const long idx = lat_->flat(m1, m2, m3);
        mod_in_[idx] = cplx(std::exp(-e), 0.0);
        mod_out_[idx] = cplx(std::exp(e), 0.0);
      }

  // diagnostic minimum of |xi^2 + 2 k.xi| over nonzero lattice points
  double mind = std::numeric_limits<double>::max();
  for (int j1 = 0; j1 < M; ++j1)
    for (int j2 = 0; j2 < M; ++j2)
      for (int j3 = 0; j3 < M; ++j3) {
        if (j1 == 0 && j2 == 0 && j3 == 0) continue;
        const Eigen::Vector3d xi = lat_->freq(j1, j2, j3);
        Eigen::Vector3cd xic = xi.cast<cplx>();
        const cplx den = dot(xic, xic) + 2.0 * dot(k_, xic);
        mind = std::min(mind, std::abs(den));
      }
  min_denom_ = mind;
}

void GreenOperator::build_shifted_route() {
  const int M = lat_->size();
  const double h = lat_->spacing();
  const double dxi = lat_->freq_spacing();
  const Eigen::Vector3d ehat = k_.imag().normalized();

  // deterministic offset along Im k. The unshifted lattice keeps the discrete
  // operator exactly conjugate-symmetric under (k, xi) -> (-conj k, -xi), so
  // it is preferred whenever its minimal denominator is already safe; the
  // shift is the escape hatch for unlucky alignments with the singular set.
  const double rho = k_.imag().norm();
  auto min_denom_for = [&](const Eigen::Vector3d& off) {
    double mind = std::numeric_limits<double>::max();
    for (int j1 = 0; j1 < M; ++j1)
      for (int j2 = 0; j2 < M; ++j2)
        for (int j3 = 0; j3 < M; ++j3) {
          const Eigen::Vector3d xi = lat_->freq(j1, j2, j3) + off;
          Eigen::Vector3cd xic = xi.cast<cplx>();
          const cplx den = dot(xic, xic) + 2.0 * dot(k_, xic);
          const double a = std::abs(den);
          if (a < mind) mind = a;
        }
    return mind;
  };
  const double min0 = min_denom_for(Eigen::Vector3d::Zero());
  if (min0 >= 0.2 * rho * dxi) {
    offset_ = Eigen::Vector3d::Zero();
    min_denom_ = min0;
  } else {
    static const std::array<double, 8> fractions = {0.0,   0.5,   0.25,  0.75,
                                                    0.125, 0.375, 0.625, 0.875};
    double best_min = -1.0;
    Eigen::Vector3d best_off = Eigen::Vector3d::Zero();
    for (double frac : fractions) {
      const Eigen::Vector3d off = frac * dxi * ehat;
      const double mind = min_denom_for(off);
      if (mind > best_min) {
        best_min = mind;
        best_off = off;
      }
    }
    offset_ = best_off;
    min_denom_ = best_min;
  }
  if (!(min_denom_ > 0.0))
    throw SolverError("GreenOperator: singular symbol on every candidate lattice shift");

  symbol_.resize(lat_->total());
  for (int j1 = 0; j1 < M; ++j1)
    for (int j2 = 0; j2 < M; ++j2)
      for (int j3 = 0; j3 < M; ++j3) {
        const Eigen::Vector3d xi = lat_->freq(j1, j2, j3) + offset_;
        Eigen::Vector3cd xic = xi.cast<cplx>();
        const cplx den = dot(xic, xic) + 2.0 * dot(k_, xic);
        const double filt =
            sinc(0.5 * xi(0) * h) * sinc(0.5 * xi(1) * h) * sinc(0.5 * xi(2) * h);
        symbol_[lat_->flat(j1, j2, j3)] = -filt / den;
      }

  mod_in_.resize(lat_->total());
  mod_out_.resize(lat_->total());
  for (int m1 = 0; m1 < M; ++m1)
    for (int m2 = 0; m2 < M; ++m2)
      for (int m3 = 0; m3 < M; ++m3) {
        const double ph = offset_.dot(lat_->point(m1, m2, m3));
        const long idx = lat_->flat(m1, m2, m3);
        mod_in_[idx] = cplx(std::cos(ph), -std::sin(ph));
        mod_out_[idx] = cplx(std::cos(ph), std::sin(ph));
      }
}

std::vector<cplx> GreenOperator::apply(const std::vector<cplx>& f) const {
  if (static_cast<long>(f.size()) != lat_->total())
    throw IncompatibilityError("GreenOperator::apply: field size mismatch");
  std::vector<cplx> work(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) work[i] = mod_in_[i] * f[i];
  fft_->forward(work);
  for (std::size_t i = 0; i < work.size(); ++i) work[i] *= symbol_[i];
  fft_->backward(work);
  const double scale = 1.0 / static_cast<double>(lat_->total());
  for (std::size_t i = 0; i < work.size(); ++i) work[i] *= scale * mod_out_[i];
  return work;
}

std::vector<cplx> GreenOperator::kernel_table() const {
  // IFFT of the effective symbol, modulated back: table(z) = mod_out(z) K(z)
  // with the x0-anchored displacement phases cancelling as in apply()
  std::vector<cplx> table = symbol_;
  fft_->backward(table);
  const int M = lat_->size();
  const double h = lat_->spacing();
  const double scale = 1.0 / (lat_->period() * lat_->period() * lat_->period());
  // displacement-space modulation uses z = h * signed index, not lattice coords
  std::vector<cplx> out(table.size());
  for (int j1 = 0; j1 < M; ++j1)
    for (int j2 = 0; j2 < M; ++j2)
      for (int j3 = 0; j3 < M; ++j3) {
        const Eigen::Vector3d z(h * lat_->signed_index(j1), h * lat_->signed_index(j2),
                                h * lat_->signed_index(j3));
        cplx mod;
        if (yukawa_route_) {
          mod = cplx(std::exp(k_.imag().normalized().dot(z) * k_.imag().norm()), 0.0);
        } else {
          const double ph = offset_.dot(z);
          mod = cplx(std::cos(ph), std::sin(ph));
        }
        out[lat_->flat(j1, j2, j3)] = scale * mod * table[lat_->flat(j1, j2, j3)];
      }
  return out;
}

std::vector<cplx> faddeev_symbol(const Eigen::Vector3cd& k, const PaddedLattice& lattice) {
  auto lat = std::make_shared<PaddedLattice>(lattice);
  GreenOperator op(lat, k);
  return op.symbol();
}

std::vector<cplx> apply_green(const Eigen::Vector3cd& k, const std::vector<cplx>& f,
                              std::shared_ptr<const PaddedLattice> lattice) {
  GreenOperator op(std::move(lattice), k);
  return op.apply(f);
}

FaddeevState solve_mu(const Potential& v, const Eigen::Vector3cd& k, const SolveMuOptions& opt) {
  // the modulated route needs enough padding for its truncation radius;
  // bump deterministically rather than failing
  int pad = opt.pad_factor;
  const double imn = k.imag().norm();
  const double ren = k.real().norm();
  if (imn > 0.0 && ren <= 1e-12 * (imn + ren)) {
    for (; pad <= 8; ++pad) {
      const PaddedLattice probe(v.domain, pad);
      const double X = needed_lag_extent(probe);
      if (1.05 * std::sqrt(3.0) * X <= 0.98 * (probe.period() - X)) break;
    }
  }
  auto lat = std::make_shared<PaddedLattice>(v.domain, pad);
  GreenOperator green(lat, k);

  const long total = lat->total();
  std::vector<cplx> vfield = lat->embed(v.values);  // complex copy of v

  // Consumers read mu on the box and its boundary. Further out the modulated
  // kernel route amplifies roundoff by the exponential weight, so norms,
  // stopping tests and the stored field are restricted to a box-plus-halo
  // window.
  const int M = lat->size();
  std::vector<char> window(total, 0);
  {
    const double wlim = v.domain->half_width + 2.0 * lat->spacing() + 1e-12;
    for (int m1 = 0; m1 < M; ++m1)
      for (int m2 = 0; m2 < M; ++m2)
        for (int m3 = 0; m3 < M; ++m3) {
          const Eigen::Vector3d x = lat->point(m1, m2, m3);
          if (std::abs(x(0)) <= wlim && std::abs(x(1)) <= wlim && std::abs(x(2)) <= wlim)
            window[lat->flat(m1, m2, m3)] = 1;
        }
  }

  FaddeevState st;
  st.k = k;
  st.lattice = lat;
  st.mu.assign(total, cplx(1.0, 0.0));

  // contraction = max of sup-norm increment ratios while increments are still
  // at least 1e-4 of the first one; ratios measured close to the stopping
  // tolerance are roundoff-dominated and would only add noise
  double prev_sup = 0.0;
  double first_sup = 0.0;
  double contraction = 0.0;
  std::vector<cplx> rhs(total);
  for (int it = 1; it <= opt.max_iterations; ++it) {
    for (long i = 0; i < total; ++i) rhs[i] = vfield[i] * st.mu[i];
    std::vector<cplx> gk = green.apply(rhs);
    double inc2 = 0.0, mu2 = 0.0, sup = 0.0;
    for (long i = 0; i < total; ++i) {
      const cplx next = cplx(1.0, 0.0) + gk[i];
      if (!window[i]) {
        st.mu[i] = next;
        continue;
      }
      const cplx d = next - st.mu[i];
      inc2 += std::norm(d);
      mu2 += std::norm(next);
      sup = std::max(sup, std::abs(d));
      st.mu[i] = next;
    }
    const double inc = std::sqrt(inc2);
    const double rel = inc / std::max(1e-300, std::sqrt(mu2));
    st.iterations = it;
    st.final_increment = rel;
    if (it == 1) {
      first_sup = sup;
      contraction = sup;  // ||G v 1||_sup over ||mu_0||_sup = 1
    } else if (prev_sup >= 1e-4 * first_sup && prev_sup > 0.0) {
      contraction = std::max(contraction, sup / prev_sup);
    }
    prev_sup = sup;
    st.contraction_estimate = contraction;
    if (rel <= opt.tolerance) {
      st.converged = true;
      break;
    }
    if (it >= 4 && (contraction >= 1.0 || !std::isfinite(sup)))
      throw NoConvergenceError(
          "solve_mu: fixed-point iteration not contracting (estimate " +
              std::to_string(contraction) + "); increase |k| relative to the potential",
          contraction);
  }
  if (!st.converged && (st.contraction_estimate >= 1.0 || !std::isfinite(prev_sup)))
    throw NoConvergenceError("solve_mu: no convergence after " +
                                 std::to_string(opt.max_iterations) + " iterations",
                             st.contraction_estimate);
  // the field outside the window is not part of the approximation
  for (long i = 0; i < total; ++i)
    if (!window[i]) st.mu[i] = cplx(1.0, 0.0);
  return st;
}

cplx scattering_h(const Potential& v, const FaddeevState& state, const MomentumPair& pair) {
  if (!state.converged)
    throw InvalidStateError("scattering_h: state not converged");
  if ((state.k - pair.k).norm() > 1e-12 * (1.0 + pair.k.norm()))
    throw InvalidStateError("scattering_h: state solved at a different k than the pair");
  const auto& lat = *state.lattice;
  const auto& dom = *v.domain;
  const int n = dom.n;
  const int s = lat.block_start();
  const double h3 = std::pow(dom.h, 3);
  cplx acc(0.0, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int kk = 0; kk < n; ++kk) {
        const double vv = v.values[dom.flat_index(i, j, kk)];
        if (vv == 0.0) continue;
        const Eigen::Vector3d x = dom.node(i, j, kk);
        const double ph = pair.xi.dot(x);
        acc += cplx(std::cos(ph), std::sin(ph)) * vv * state.mu[lat.flat(i + s, j + s, kk + s)];
      }
  return acc * h3 / std::pow(2.0 * M_PI, 3);
}

Eigen::VectorXcd psi_trace(const FaddeevState& state, const Potential& v) {
  const auto& lat = *state.lattice;
  const auto& dom = *v.domain;
  const auto& nodes = dom.boundary_nodes;
  Eigen::VectorXcd out(nodes.size());
  const double h = dom.h;
  const int bs = lat.block_start();
  for (std::size_t b = 0; b < nodes.size(); ++b) {
    const Eigen::Vector3d& x = nodes[b].pos;
    // boundary nodes sit on the padded lattice: domain coord(i) maps to
    // lattice index i + bs, faces at -w -> bs - 1 and +w -> bs + n
    std::array<int, 3> mi;
    for (int d = 0; d < 3; ++d) {
      const double fi = (x(d) - dom.coord(0)) / h;
      const int i = static_cast<int>(std::lround(fi));
      mi[d] = i + bs;
    }
    const cplx mu = state.mu[lat.flat(mi[0], mi[1], mi[2])];
    const cplx ikx = cplx(0.0, 1.0) * dot(state.k.cast<cplx>(), x.cast<cplx>());
    out(static_cast<Eigen::Index>(b)) = std::exp(ikx) * mu;
  }
  return out;
}

double sup_abs_mu(const FaddeevState& state) {
  double top = 0.0;
  for (const auto& c : state.mu) top = std::max(top, std::abs(c));
  return top;
}

double sup_abs_mu_minus_one(const FaddeevState& state) {
  double top = 0.0;
  for (const auto& c : state.mu) top = std::max(top, std::abs(c - cplx(1.0, 0.0)));
  return top;
}



void save_mu_field(const FaddeevState& state, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("save_mu_field: cannot open " + path);
  const auto& lat = *state.lattice;
  const auto dom = lat.domain();
  const int n = dom->n;
  const int bs = lat.block_start();
  char buf[96];
  os << "gelfand-potential 1 complex\n";
  os << "n " << n << "\n";
  std::snprintf(buf, sizeof buf, "%.17g", dom->half_width);
  os << "half_width " << buf << "\n";
  os << "margin 0\n";
  os << "values\n";
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const cplx c = state.mu[lat.flat(i + bs, j + bs, k + bs)];
        std::snprintf(buf, sizeof buf, "%.17g %.17g\n", c.real(), c.imag());
        os << buf;
      }
}

std::vector<cplx> load_mu_field(const std::string& path, int expected_n) {
  std::ifstream is(path);
  if (!is) throw ConfigError("load_mu_field: cannot open " + path);
  std::string magic, kind;
  int version = 0;
  is >> magic >> version >> kind;
  if (magic != "gelfand-potential" || version != 1 || kind != "complex")
    throw ConfigError("load_mu_field: bad header");
  std::string key;
  int n = 0;
  double hw = 0.0, margin = 0.0;
  is >> key >> n >> key >> hw >> key >> margin >> key;
  if (n != expected_n)
    throw ConfigError("load_mu_field: grid size mismatch");
  std::vector<cplx> out(static_cast<std::size_t>(n) * n * n);
  for (auto& c : out) {
    double re, im;
    if (!(is >> re >> im)) throw ConfigError("load_mu_field: truncated value table");
    c = cplx(re, im);
  }
  return out;
}

}  // namespace gelfand
