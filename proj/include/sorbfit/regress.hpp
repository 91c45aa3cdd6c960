#pragma once

#include <string>

#include <Eigen/Core>

#include "sorbfit/errors.hpp"

namespace sorbfit {

enum class FitMethod {
  kUlsPosterior,
  kWlsAprioriTrue,
  kWlsAprioriEstimated,
  kWlsRelativePosterior,
};

std::string to_string(FitMethod method);

/// Straight-line fit of y = a + n*x on log-log transformed sorption data,
/// with the back-transformed Freundlich parameters and their standard
/// deviations. sigma_kf = ln10 * k_f * sigma_a, so cv_kf = ln10 * sigma_a.
struct FitResult {
  double a = 0.0;        // intercept, log10(k_f * c_ref)
  double n = 0.0;        // slope, Freundlich exponent
  double k_f = 0.0;      // 10^a / c_ref
  double sigma_a = 0.0;
  double sigma_n = 0.0;
  double sigma_kf = 0.0;
  double cv_kf = 0.0;
  double cv_n = 0.0;
  double chi2 = 0.0;         // merit value at the minimizer
  int dof = 0;               // levels - 2
  double scale_factor = 1.0; // a-posteriori variance multiplier (1 when a priori)
  FitMethod method = FitMethod::kWlsAprioriTrue;
};

/// Weighted least squares with a-priori variances: weights 1/sigma^2,
/// parameter variances from the weights alone (no residual information).
FitResult fit_line(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y,
                   const Eigen::ArrayXd& sigma, double c_ref = 1.0,
                   FitMethod method = FitMethod::kWlsAprioriTrue);

/// Unweighted fit (all sigma = 1) with the parameter variances scaled a
/// posteriori by the reduced residual sum of squares.
FitResult fit_uls_posterior(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y,
                            double c_ref = 1.0);

/// Weighted fit where the sigmas are trusted only in a relative sense:
/// the a-priori variances are rescaled by the reduced weighted residual
/// sum of squares, which absorbs any common factor in sigma.
FitResult fit_relative_posterior(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y,
                                 const Eigen::ArrayXd& sigma, double c_ref = 1.0);

/// Weighted sum of squared residuals at arbitrary (a, n).
double chi2_merit(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y,
                  const Eigen::ArrayXd& sigma, double a, double n);

}  // namespace sorbfit
