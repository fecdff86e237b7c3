#ifndef GELFAND_REPORT_HPP
#define GELFAND_REPORT_HPP

#include <string>
#include <vector>

#include "gelfand/harness.hpp"

namespace gelfand {

/// Summary tables and two-column plot-data files derived from a results CSV.
/// Writes summary.txt, bound_vs_E.csv, error_vs_delta.csv, residual_vs_rho.csv
/// into outdir. Returns the summary text.
std::string write_report(const std::vector<EstimateReport>& rows, const std::string& outdir);

}  // namespace gelfand

#endif
