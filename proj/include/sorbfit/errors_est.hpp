#pragma once

#include <limits>
#include <vector>

#include <Eigen/Core>

#include "sorbfit/errors.hpp"

namespace sorbfit {

/// One concentration level of a measured or simulated isotherm: the
/// design (expected) initial concentration, the single measured initial
/// concentration, and the replicate equilibrium concentrations. An
/// unknown expected concentration is stored as NaN.
struct IsothermLevel {
  double expected_c_i = std::numeric_limits<double>::quiet_NaN();
  double measured_c_i = 0.0;
  Eigen::ArrayXd replicate_c_e;
};

struct IsothermDataset {
  std::vector<IsothermLevel> levels;
  double r = 1.0;      // sorbent-liquid ratio, kg/L
  double c_ref = 1.0;  // mg/L

  int replicate_count() const;
  void validate() const;
};

/// Error-model parameters recovered from one isotherm's own data.
struct EstimatedErrorParams {
  Eigen::ArrayXd delta_per_level;
  double gamma_e = 0.0;
  double gamma_i = 0.0;
};

/// Average over replicates of the measured fractional decrease
/// (measured_c_i - c_e_u) / measured_c_i. May be negative; consumers of
/// the weight model must reject such levels themselves.
double estimate_delta(const IsothermLevel& level);

/// CV of the equilibrium concentration from replicate scatter: per level
/// the sample variance (divisor u-1) around the replicate mean, divided
/// by the squared mean; then the square root of the level average.
double estimate_gamma_e(const IsothermDataset& dataset);

/// CV of the initial concentration from the measured/expected quotients:
/// the quotients are first normalized by their own mean (removing any
/// common bias), then their sample standard deviation (divisor L-1) is
/// returned.
double estimate_gamma_i(const IsothermDataset& dataset);

EstimatedErrorParams estimate_error_params(const IsothermDataset& dataset);

}  // namespace sorbfit
