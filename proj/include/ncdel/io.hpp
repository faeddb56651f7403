#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "ncdel/del.hpp"
#include "ncdel/linearize.hpp"
#include "ncdel/rmt.hpp"

namespace ncdel {

using Json = nlohmann::json;

/// Complex numbers are [re, im] pairs and matrices are row-major arrays of rows. Doubles are
/// written in shortest round-trip form, so a read after a write reproduces every bit.
Json to_json(cplx c);
Json to_json(const CMatrix& A);
cplx complex_from_json(const Json& j);
CMatrix matrix_from_json(const Json& j);

Json linearization_to_json(const Linearization& L);
Linearization linearization_from_json(const Json& j);
void save_linearization(const std::string& path, const Linearization& L);
Linearization load_linearization(const std::string& path);

/// Energies shift by `energy_shift` on output, mapping internal 1 - q coordinates to those of p.
Json stability_report_to_json(const StabilityReport& r, double energy_shift = 0.0);
Json experiment_report_to_json(const ExperimentReport& r);

/// "%.17g" formatting used by every CSV writer.
std::string format_double(double x);

/// Header "E,rho,eta,residual".
void write_dos_csv(std::ostream& os, const std::vector<double>& E, const std::vector<double>& rho, double eta,
                   const std::vector<double>& residual);
/// Header "k,moment".
void write_moments_csv(std::ostream& os, const std::map<int, double>& moments);
/// Per-replica rows. Columns N,eta,rep,max_err,avg_err come first when present, other keys follow sorted.
void write_raw_csv(std::ostream& os, const ExperimentReport& r);

}  // namespace ncdel
