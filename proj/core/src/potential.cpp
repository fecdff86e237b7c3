#include "gelfand/potential.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "gelfand/errors.hpp"

namespace gelfand {

namespace {

double margin_distance(const Domain& dom, int margin_cells) {
  return margin_cells * dom.h;
}

/// distance from an interior node to the boundary of the box
double dist_to_boundary(const Domain& dom, int i, int j, int k) {
  const double w = dom.half_width;
  const Eigen::Vector3d p = dom.node(i, j, k);
  double d = w - std::abs(p(0));
  d = std::min(d, w - std::abs(p(1)));
  d = std::min(d, w - std::abs(p(2)));
  return d;
}

}  // namespace

Potential make_potential(const DomainPtr& dom, std::vector<double> values, int margin_cells) {
  const int n = dom->n;
  if (static_cast<int>(values.size()) != n * n * n)
    throw ConfigError("make_potential: value count does not match the grid");
  const double need = margin_distance(*dom, margin_cells);
  double linf = 0.0;
  double support_dist = dom->half_width;  // distance of the support to the boundary
  bool any = false;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double v = values[dom->flat_index(i, j, k)];
        if (!std::isfinite(v))
          throw ConfigError("make_potential: non-finite value on the grid");
        if (v != 0.0) {
          any = true;
          linf = std::max(linf, std::abs(v));
          support_dist = std::min(support_dist, dist_to_boundary(*dom, i, j, k));
        }
      }
  if (any && support_dist < need - 1e-12 * dom->h)
    throw ConfigError("make_potential: support violates the boundary margin (" +
                      std::to_string(support_dist) + " < " + std::to_string(need) + ")");
  Potential w;
  w.domain = dom;
  w.values = std::move(values);
  w.linf_norm = linf;
  w.support_margin = any ? support_dist : dom->half_width;
  return w;
}

Potential lincomb(double a, const Potential& v1, double b, const Potential& v2) {
  if (v1.domain != v2.domain)
    throw IncompatibilityError("lincomb: potentials live on different domains");
  std::vector<double> vals(v1.values.size());
  for (std::size_t i = 0; i < vals.size(); ++i)
    vals[i] = a * v1.values[i] + b * v2.values[i];
  return make_potential(v1.domain, std::move(vals), 0);
}

Spectrum fourier_transform(const Potential& w, int pad_factor) {
  auto lat = std::make_shared<PaddedLattice>(w.domain, pad_factor);
  const int m = lat->size();
  if (lat->nyquist() <= 0.0)
    throw ConfigError("fourier_transform: degenerate lattice");
  auto fft = fft_for(m);
  std::vector<cplx> data = lat->embed(w.values);

  // (2 pi)^-3 h^3 sum_m e^{+i xi x_m} w_m
  //   = (2 pi)^-3 h^3 e^{+i xi_j x0} Backward-DFT[w]_j
  fft->backward(data);
  const double h = lat->spacing();
  const double scale = std::pow(h, 3) / std::pow(2.0 * M_PI, 3);
  const double x0 = lat->coord1(0);
  std::vector<cplx> phase(m);
  for (int j = 0; j < m; ++j) {
    const double f = lat->freq1(j) * x0;
    phase[j] = cplx(std::cos(f), std::sin(f));
  }
  Spectrum s;
  s.lattice = lat;
  s.coefficients.resize(lat->total());
  for (int j1 = 0; j1 < m; ++j1)
    for (int j2 = 0; j2 < m; ++j2)
      for (int j3 = 0; j3 < m; ++j3) {
        const long idx = lat->flat(j1, j2, j3);
        s.coefficients[idx] = scale * phase[j1] * phase[j2] * phase[j3] * data[idx];
      }
  return s;
}

double spectral_norm(const Spectrum& s, NormKind kind, double m) {
  const auto& lat = *s.lattice;
  const int M = lat.size();
  const double dxi3 = std::pow(lat.freq_spacing(), 3);
  if (kind == NormKind::Hm || kind == NormKind::Wm) {
    if (m < 0.0) throw DomainError("spectral_norm: order m must be >= 0");
  }
  double acc = 0.0;
  double top = 0.0;
  for (int j1 = 0; j1 < M; ++j1)
    for (int j2 = 0; j2 < M; ++j2)
      for (int j3 = 0; j3 < M; ++j3) {
        const double xi2 = lat.freq(j1, j2, j3).squaredNorm();
        const double a = std::abs(s.coefficients[lat.flat(j1, j2, j3)]);
        switch (kind) {
          case NormKind::L2:
            acc += a * a;
            break;
          case NormKind::Hm:
            acc += std::pow(1.0 + xi2, m) * a * a;
            break;
          case NormKind::Wm:
            top = std::max(top, std::pow(1.0 + xi2, 0.5 * m) * a);
            break;
          case NormKind::Linf:
            throw DomainError("spectral_norm: Linf is a grid norm");
        }
      }
  if (kind == NormKind::Wm) return top;
  // Parseval scaling: ||w||_{L2} = (2 pi)^{3/2} || F w ||_{L2(dxi)}
  return std::pow(2.0 * M_PI, 1.5) * std::sqrt(acc * dxi3);
}

double norm(const Potential& w, NormKind kind, double m, int pad_factor) {
  switch (kind) {
    case NormKind::Linf:
      return w.linf_norm;
    case NormKind::L2:
      return grid_l2(w);
    case NormKind::Hm:
    case NormKind::Wm: {
      if (m < 0.0) throw DomainError("norm: order m must be >= 0");
      Spectrum s = fourier_transform(w, pad_factor);
      return spectral_norm(s, kind, m);
    }
  }
  throw DomainError("norm: unknown kind");
}

double grid_l2(const Potential& a) {
  const double h3 = std::pow(a.domain->h, 3);
  double acc = 0.0;
  for (double v : a.values) acc += v * v;
  return std::sqrt(acc * h3);
}

double grid_linf(const Potential& a) {
  double top = 0.0;
  for (double v : a.values) top = std::max(top, std::abs(v));
  return top;
}

double tail_l2(const Spectrum& s, double r) {
  if (!(r > 0.0)) throw DomainError("tail_l2: radius must be positive");
  const auto& lat = *s.lattice;
  const int M = lat.size();
  const double dxi3 = std::pow(lat.freq_spacing(), 3);
  double acc = 0.0;
  for (int j1 = 0; j1 < M; ++j1)
    for (int j2 = 0; j2 < M; ++j2)
      for (int j3 = 0; j3 < M; ++j3) {
        if (lat.freq(j1, j2, j3).norm() >= r) {
          const double a = std::abs(s.coefficients[lat.flat(j1, j2, j3)]);
          acc += a * a;
        }
      }
  return std::sqrt(acc * dxi3);
}

double tail_l1(const Spectrum& s, double r, double m) {
  if (!(r > 0.0)) throw DomainError("tail_l1: radius must be positive");
  if (!(m > 3.0)) throw DomainError("tail_l1: needs order m > 3, got " + std::to_string(m));
  const auto& lat = *s.lattice;
  const int M = lat.size();
  const double dxi3 = std::pow(lat.freq_spacing(), 3);
  double acc = 0.0;
  for (int j1 = 0; j1 < M; ++j1)
    for (int j2 = 0; j2 < M; ++j2)
      for (int j3 = 0; j3 < M; ++j3) {
        if (lat.freq(j1, j2, j3).norm() >= r)
          acc += std::abs(s.coefficients[lat.flat(j1, j2, j3)]);
      }
  return acc * dxi3;
}

namespace {

/// flat-top radial envelope: 1 on [0, t0*R], smooth essential decay to 0 at R
double flat_top(double r, double R, double t0 = 0.6) {
  if (r >= R) return 0.0;
  const double t = r / R;
  if (t <= t0) return 1.0;
  const double u = (t - t0) / (1.0 - t0);
  return std::exp(-u * u / (1.0 - u * u));
}

}  // namespace

Potential generate(const DomainPtr& dom, PotentialKind kind,
                   const GenerateParams& p, std::uint64_t seed) {
  const int n = dom->n;
  const double margin = p.margin_cells * dom->h;
  const double reach = dom->half_width - margin;
  // support radius available around the requested centre
  double avail = reach;
  for (int d = 0; d < 3; ++d) avail = std::min(avail, reach - std::abs(p.center(d)));
  if (avail <= 0.0)
    throw ConfigError("generate: centre too close to the boundary for the margin");

  std::vector<double> vals(static_cast<std::size_t>(n) * n * n, 0.0);
  Rng rng(seed);

  // random_bandlimited draws its mode table before touching the grid
  struct Mode {
    Eigen::Vector3d kvec;
    double amp, phase;
  };
  std::vector<Mode> modes;
  if (kind == PotentialKind::RandomBandlimited) {
    const double base = M_PI / dom->half_width;
    for (int a = -p.max_mode; a <= p.max_mode; ++a)
      for (int b = -p.max_mode; b <= p.max_mode; ++b)
        for (int c = -p.max_mode; c <= p.max_mode; ++c) {
          Mode mo;
          mo.kvec = base * Eigen::Vector3d(a, b, c);
          mo.amp = 2.0 * rng.uniform() - 1.0;
          mo.phase = 2.0 * M_PI * rng.uniform();
          modes.push_back(mo);
        }
  }

  const double R = (kind == PotentialKind::CosineBump) ? std::min(avail, p.width) : avail;
  if (kind == PotentialKind::CosineBump && p.width > avail + 1e-12)
    throw ConfigError("generate: cosine bump radius exceeds the usable region");

  double raw_peak = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const Eigen::Vector3d x = dom->node(i, j, k);
        const Eigen::Vector3d d = x - p.center;
        const double r = d.norm();
        double v = 0.0;
        switch (kind) {
          case PotentialKind::GaussianBump:
            v = std::exp(-0.5 * r * r / (p.width * p.width)) * flat_top(r, R);
            break;
          case PotentialKind::CosineBump: {
            if (r < R) {
              const double c = std::cos(0.5 * M_PI * r / R);
              v = c * c * c * c;
            }
            break;
          }
          case PotentialKind::RandomBandlimited: {
            double acc = 0.0;
            for (const auto& mo : modes)
              acc += mo.amp * std::cos(mo.kvec.dot(d) + mo.phase);
            v = acc * flat_top(r, R);
            break;
          }
        }
        vals[dom->flat_index(i, j, k)] = v;
        raw_peak = std::max(raw_peak, std::abs(v));
      }

  // bump profiles peak at 1 by construction; the random field is normalised
  // to unit peak so the amplitude is the sup-norm in all cases
  double scale = p.amplitude;
  if (kind == PotentialKind::RandomBandlimited && raw_peak > 0.0) scale /= raw_peak;
  if (p.amplitude == 0.0) scale = 0.0;
  for (double& v : vals) v *= scale;
  return make_potential(dom, std::move(vals), p.margin_cells);
}

void save_potential(const Potential& w, std::ostream& os) {
  const int n = w.domain->n;
  os << "gelfand-potential 1\n";
  os << "n " << n << "\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", w.domain->half_width);
  os << "half_width " << buf << "\n";
  std::snprintf(buf, sizeof buf, "%.17g", w.support_margin);
  os << "margin " << buf << "\n";
  os << "values\n";
  for (std::size_t i = 0; i < w.values.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", w.values[i]);
    os << buf << (((i + 1) % 8 == 0) ? '\n' : ' ');
  }
  if (w.values.size() % 8 != 0) os << '\n';
}

Potential load_potential(std::istream& is) {
  std::string magic;
  int version = 0;
  is >> magic >> version;
  if (magic != "gelfand-potential" || version != 1)
    throw ConfigError("load_potential: bad header");
  std::string key;
  int n = 0;
  double half_width = 0.0, margin = 0.0;
  is >> key >> n;
  if (key != "n") throw ConfigError("load_potential: expected n");
  is >> key >> half_width;
  if (key != "half_width") throw ConfigError("load_potential: expected half_width");
  is >> key >> margin;
  if (key != "margin") throw ConfigError("load_potential: expected margin");
  is >> key;
  if (key != "values") throw ConfigError("load_potential: expected values");
  auto dom = build_domain(half_width, n);
  std::vector<double> vals(static_cast<std::size_t>(n) * n * n);
  for (auto& v : vals)
    if (!(is >> v)) throw ConfigError("load_potential: truncated value table");
  return make_potential(dom, std::move(vals), 0);
}

void save_potential_file(const Potential& w, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("save_potential_file: cannot open " + path);
  save_potential(w, os);
}

Potential load_potential_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("load_potential_file: cannot open " + path);
  return load_potential(is);
}

}  // namespace gelfand
