#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sorbfit/errors_est.hpp"
#include "sorbfit/regress.hpp"
#include "sorbfit/simkit.hpp"
#include "sorbfit/weights.hpp"

namespace sorbfit::io {

/// Full-precision formatting for CSV values (round-trips doubles).
std::string format_full(double value);
/// Six significant digits for human-readable reports.
std::string format_sig6(double value);

// ---------------------------------------------------------------------------
// Isotherm CSV, long form: one row per replicate.
//   level,expected_ci,measured_ci,replicate,ce
// expected_ci may be empty (it is only needed to estimate gamma_i).
// ---------------------------------------------------------------------------

IsothermDataset read_isotherm_csv(std::istream& in, double r, double c_ref = 1.0);
IsothermDataset read_isotherm_csv_file(const std::string& path, double r,
                                       double c_ref = 1.0);
void write_isotherm_csv(std::ostream& out, const IsothermDataset& dataset);
void write_isotherm_csv_file(const std::string& path, const IsothermDataset& dataset);

// ---------------------------------------------------------------------------
// Plot-data CSV schemas.
// ---------------------------------------------------------------------------

std::string sweep_csv_header();
std::string sweep_csv_row(const SystemPopulation& pop);

std::string surface_csv_header();
std::string surface_csv_row(const WeightSurfaceRow& row);

std::string chisq_csv_header();
std::string chisq_csv_row(const ChisqValidationRow& row);

// ---------------------------------------------------------------------------
// The batch fit pipeline behind the `fit` command.
// ---------------------------------------------------------------------------

enum class FitMethodChoice { kWlsApriori, kWlsEstimated, kUls, kWlsRelative };

FitMethodChoice fit_method_from_string(const std::string& name);
std::string to_string(FitMethodChoice method);

struct FitRequest {
  FitMethodChoice method = FitMethodChoice::kWlsEstimated;
  std::optional<double> gamma_i;  // required for wls-apriori and wls-relative
  std::optional<double> gamma_e;
};

struct LevelDiagnostics {
  int level = 0;
  double c_e_avg = 0.0;
  double x = 0.0;
  double y = 0.0;
  double delta = 0.0;   // measured fractional decrease
  double sigma = 0.0;   // weight model sigma (1 for ULS)
  double residual = 0.0;  // y - a - n*x, unweighted
};

struct FitReport {
  FitResult fit;
  ErrorModel error_model;  // the weights used and where they came from
  std::vector<LevelDiagnostics> levels;
  std::vector<std::string> warnings;
};

/// Two-step fit of a measured dataset: an unweighted first fit supplies
/// the exponent for the weight model, then the requested method's fit.
FitReport fit_dataset(const IsothermDataset& dataset, const FitRequest& request);

std::string render_report(const FitReport& report);

}  // namespace sorbfit::io
