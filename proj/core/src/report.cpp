#include "gelfand/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "gelfand/errors.hpp"

namespace gelfand {

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void write_two_column(const std::string& path, const std::string& header,
                      const std::vector<std::pair<double, double>>& pts) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("report: cannot open " + path);
  os << header << "\n";
  char buf[96];
  for (const auto& [x, y] : pts) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", x, y);
    os << buf;
  }
}

}  // namespace

std::string write_report(const std::vector<EstimateReport>& rows, const std::string& outdir) {
  std::map<double, std::vector<double>> bound_by_E;
  std::map<double, std::vector<double>> resid_by_rho;
  std::vector<std::pair<double, double>> err_vs_delta;
  int total = 0, skipped = 0, pass_l2 = 0, pass_linf = 0, linf_rows = 0;
  for (const auto& r : rows) {
    ++total;
    if (r.skipped()) {
      ++skipped;
      continue;
    }
    if (std::isfinite(r.bound_l2)) bound_by_E[r.E].push_back(r.bound_l2);
    if (std::isfinite(r.residual_scattering) && r.rho > 0.0)
      resid_by_rho[r.rho].push_back(r.residual_scattering);
    if (r.delta > 0.0) err_vs_delta.push_back({r.delta, r.err_l2});
    if (r.pass_l2) ++pass_l2;
    if (r.m > 3.0) {
      ++linf_rows;
      if (r.pass_linf) ++pass_linf;
    }
  }

  std::vector<std::pair<double, double>> bE;
  for (auto& [e, v] : bound_by_E) bE.push_back({e, median(v)});
  std::vector<std::pair<double, double>> rr;
  for (auto& [rho, v] : resid_by_rho) rr.push_back({rho, median(v)});
  std::sort(err_vs_delta.begin(), err_vs_delta.end());

  write_two_column(outdir + "/bound_vs_E.csv", "E,median_bound_l2", bE);
  write_two_column(outdir + "/error_vs_delta.csv", "delta,err_l2", err_vs_delta);
  write_two_column(outdir + "/residual_vs_rho.csv", "rho,median_residual_scattering", rr);

  std::ostringstream ss;
  ss << "rows: " << total << " (skipped " << skipped << ")\n";
  const int usable = total - skipped;
  ss << "L2 estimate pass: " << pass_l2 << "/" << usable << "\n";
  ss << "sup estimate pass: " << pass_linf << "/" << linf_rows << "\n";
  ss << "bound medians by energy:\n";
  for (const auto& [e, b] : bE) ss << "  E=" << e << "  bound_l2=" << b << "\n";
  std::ofstream os(outdir + "/summary.txt", std::ios::binary);
  if (!os) throw ConfigError("report: cannot open " + outdir + "/summary.txt");
  os << ss.str();
  return ss.str();
}

}  // namespace gelfand
