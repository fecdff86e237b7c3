#include "gelfand/estimator.hpp"

#include <cmath>
#include <limits>

#include "gelfand/errors.hpp"

namespace gelfand {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double exp_mul(double log_factor, double value) {
  if (value == 0.0) return 0.0;
  const double lg = log_factor + std::log(std::abs(value));
  if (lg > 690.0) return (value > 0.0) ? kInf : -kInf;
  return (value > 0.0 ? 1.0 : -1.0) * std::exp(lg);
}

RhoChoice choose_rho(double tau, double delta, double L) {
  if (!(tau > 0.0) || tau > 1.0) throw DomainError("choose_rho: tau must be in (0, 1]");
  if (!(L > 0.0)) throw DomainError("choose_rho: L must be positive");
  RhoChoice out;
  if (tau == 1.0) {
    out.degenerate = true;
    return out;
  }
  if (!(delta > 0.0)) throw DomainError("choose_rho: delta must be positive");
  out.gamma = (1.0 - tau) / (2.0 * L);
  out.rho = out.gamma * std::log(3.0 + 1.0 / delta);
  return out;
}

SplitRadius choose_r_l2(double N, double E, double rho, double c1) {
  const double s = E + rho * rho;
  if (!(s > 0.0)) throw DomainError("choose_r_l2: E + rho^2 must be positive");
  if (!(c1 > 0.0)) throw DomainError("choose_r_l2: c1 must be positive");
  SplitRadius out;
  out.q = (1.0 / (2.0 * M_PI)) * std::pow(16.0 * M_PI * c1 * c1 / 3.0, -1.0 / 3.0);
  out.r = out.q * std::pow(1.0 + N, -4.0 / 3.0) * std::cbrt(s);
  return out;
}

SplitRadius choose_r_linf(double N, double E, double rho, double c1, double c3) {
  const double s = E + rho * rho;
  if (!(s > 0.0)) throw DomainError("choose_r_linf: E + rho^2 must be positive");
  if (!(c1 > 0.0) || !(c3 > 0.0))
    throw DomainError("choose_r_linf: constants must be positive");
  SplitRadius out;
  out.q = std::pow(8.0 * M_PI * c1 * c3 / 3.0, -1.0 / 3.0);
  out.r = out.q * std::pow(1.0 + N, -2.0 / 3.0) * std::pow(s, 1.0 / 6.0);
  return out;
}

std::pair<double, double> split_error(const Spectrum& s, double r, SplitMode mode) {
  if (!(r > 0.0)) throw DomainError("split_error: radius must be positive");
  const auto& lat = *s.lattice;
  const int M = lat.size();
  const double dxi3 = std::pow(lat.freq_spacing(), 3);
  double low = 0.0, high = 0.0;
  for (int j1 = 0; j1 < M; ++j1)
    for (int j2 = 0; j2 < M; ++j2)
      for (int j3 = 0; j3 < M; ++j3) {
        const double a = std::abs(s.coefficients[lat.flat(j1, j2, j3)]);
        const bool inside = lat.freq(j1, j2, j3).norm() <= r;
        if (mode == SplitMode::L2) {
          (inside ? low : high) += a * a;
        } else {
          (inside ? low : high) += a;
        }
      }
  if (mode == SplitMode::L2)
    return {std::sqrt(low * dxi3), std::sqrt(high * dxi3)};
  return {low * dxi3, high * dxi3};
}

namespace {

/// Lam = alpha E + beta (1-tau)^2 ln^2(3 + 1/delta); throws on infeasible
/// parameter combinations per the estimate's statement.
double lambda_term(double tau, double E, double delta, double alpha, double beta) {
  if (!(tau > 0.0) || tau > 1.0)
    throw DomainError("stability bound: tau must be in (0, 1]");
  const double ln = std::log(3.0 + 1.0 / std::max(delta, 1e-300));
  const double lam = alpha * E + beta * (1.0 - tau) * (1.0 - tau) * ln * ln;
  if (E < 0.0) {
    if (tau >= 1.0)
      throw ConfigError("stability bound: E < 0 requires tau < 1");
    if (!(lam > 0.0))
      throw ConfigError("stability bound: side condition alpha E + beta (1-tau)^2 ln^2 > 0 violated");
  }
  return lam;
}

}  // namespace

double stability_bound_l2(const EstimatorParams& p) {
  if (!(p.m > 0.0)) throw DomainError("stability_bound_l2: m must be positive");
  const auto& c = p.constants;
  const double lam = lambda_term(p.tau, p.E, p.delta, c.alpha, c.beta);
  const double dtau = std::pow(std::max(p.delta, 0.0), p.tau);
  const double first = c.A * std::sqrt(std::max(lam, 0.0)) * dtau;
  if (lam == 0.0) return (p.N_Hm > 0.0 && c.B > 0.0) ? kInf : first;
  const double second =
      c.B * std::pow(1.0 + p.N, 4.0 * p.m / 3.0) * p.N_Hm * std::pow(lam, -p.m / 3.0);
  return first + second;
}

double stability_bound_linf(const EstimatorParams& p) {
  if (!(p.m > 3.0))
    throw DomainError("stability_bound_linf: needs m > 3, got " + std::to_string(p.m));
  const auto& c = p.constants;
  const double lam = lambda_term(p.tau, p.E, p.delta, c.alpha_t, c.beta_t);
  const double dtau = std::pow(std::max(p.delta, 0.0), p.tau);
  const double first = c.A_t * std::sqrt(std::max(lam, 0.0)) * dtau;
  if (lam == 0.0) return (p.N_Wm > 0.0 && c.B_t > 0.0) ? kInf : first;
  const double second = c.B_t * std::pow(1.0 + p.N, 2.0 * (p.m - 3.0) / 3.0) * p.N_Wm /
                        (p.m - 3.0) * std::pow(lam, -(p.m - 3.0) / 6.0);
  return first + second;
}

IntermediateBound intermediate_l2(double E, double rho, double delta, double N, double N_Hm,
                                  double m, double c1, double L, double floor_r) {
  const double s = E + rho * rho;
  if (!(s > 0.0)) throw DomainError("intermediate_l2: E + rho^2 must be positive");
  IntermediateBound out;
  out.floor_ok = s >= floor_r * floor_r * (1.0 + N) * (1.0 + N);
  const double q = choose_r_l2(N, E, rho, c1).q;
  const double boundary = 0.5 * std::sqrt(s) * exp_mul(2.0 * rho * L, delta);
  const double tail = std::pow(1.0 + N, 4.0 * m / 3.0) * N_Hm * std::pow(q, -m) *
                      std::pow(s, -m / 3.0);
  out.bound = 2.0 * (boundary + tail);
  return out;
}

IntermediateBound intermediate_linf(double E, double rho, double delta, double N, double N_Wm,
                                    double m, double c1, double c3, double L, double floor_r) {
  if (!(m > 3.0)) throw DomainError("intermediate_linf: needs m > 3");
  const double s = E + rho * rho;
  if (!(s > 0.0)) throw DomainError("intermediate_linf: E + rho^2 must be positive");
  IntermediateBound out;
  out.floor_ok = s >= floor_r * floor_r * (1.0 + N) * (1.0 + N);
  const double qt = choose_r_linf(N, E, rho, c1, c3).q;
  const double boundary = 0.5 / c3 * std::sqrt(s) * exp_mul(2.0 * rho * L, delta);
  const double tail = 4.0 * M_PI * std::pow(1.0 + N, 2.0 * (m - 3.0) / 3.0) * N_Wm *
                      std::pow(qt, 3.0 - m) / (m - 3.0) * std::pow(s, -(m - 3.0) / 6.0);
  out.bound = 2.0 * (boundary + tail);
  return out;
}

std::vector<std::array<int, 3>> lattice_ball(const PaddedLattice& lat, double r) {
  std::vector<std::array<int, 3>> out;
  const int jmax = std::min(lat.size() / 2, static_cast<int>(std::floor(r / lat.freq_spacing())) + 1);
  for (int a = -jmax; a <= jmax; ++a)
    for (int b = -jmax; b <= jmax; ++b)
      for (int c = -jmax; c <= jmax; ++c) {
        const Eigen::Vector3d xi = lat.freq_spacing() * Eigen::Vector3d(a, b, c);
        if (xi.norm() <= r) out.push_back({a, b, c});
      }
  return out;
}

Reconstruction reconstruct_diff_lowfreq(const std::map<std::array<int, 3>, cplx>& samples,
                                        double r, const PaddedLattice& lat) {
  const auto ball = lattice_ball(lat, r);
  for (const auto& idx : ball) {
    if (samples.find(idx) == samples.end())
      throw ConfigError("reconstruct_diff_lowfreq: missing sample at lattice index (" +
                        std::to_string(idx[0]) + "," + std::to_string(idx[1]) + "," +
                        std::to_string(idx[2]) + ")");
  }
  const auto dom = lat.domain();
  const int n = dom->n;
  const double dxi3 = std::pow(lat.freq_spacing(), 3);
  std::vector<double> vals(static_cast<std::size_t>(n) * n * n, 0.0);
  double imag2 = 0.0;
  // w(x) = sum_{|xi| <= r} s(xi) e^{-i xi x} dxi^3 (inverse-transform convention)
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const Eigen::Vector3d x = dom->node(i, j, k);
        cplx acc(0.0, 0.0);
        for (const auto& idx : ball) {
          const Eigen::Vector3d xi = lat.freq_spacing() * Eigen::Vector3d(idx[0], idx[1], idx[2]);
          const double ph = -xi.dot(x);
          acc += samples.at(idx) * cplx(std::cos(ph), std::sin(ph));
        }
        acc *= dxi3;
        vals[dom->flat_index(i, j, k)] = acc.real();
        imag2 += acc.imag() * acc.imag();
      }
  Reconstruction rec;
  rec.field = make_potential(dom, std::move(vals), 0);
  rec.imag_residue = std::sqrt(imag2 * std::pow(dom->h, 3));
  rec.modes_used = static_cast<int>(ball.size());
  return rec;
}

}  // namespace gelfand
