#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sorbfit/errors.hpp"

namespace sorbfit {

/// Inputs of the analytical error model for one concentration level:
/// fractional decrease delta, Freundlich exponent n, measurement CVs,
/// and replicate count u.
struct ErrorInputs {
  double delta = 0.5;
  double n = 1.0;
  double gamma_i = 0.0;
  double gamma_e = 0.0;
  int u = 1;

  void validate() const;
};

/// Where a set of per-level sigmas came from.
enum class WeightSource { kTrueParameters, kEstimatedFromData, kUnit, kRelativeScaled };

std::string to_string(WeightSource source);

/// Per-level standard deviations of the log-log residual (log10 units),
/// together with the inputs they were computed from.
struct ErrorModel {
  Eigen::ArrayXd sigma_eps;
  Eigen::ArrayXd delta;
  double n = 1.0;
  double gamma_i = 0.0;
  double gamma_e = 0.0;
  int u = 1;
  WeightSource source = WeightSource::kUnit;
};

/// Evaluates sigma_eps over per-level deltas and keeps the provenance.
ErrorModel build_error_model(const Eigen::ArrayXd& delta, double n, double gamma_i,
                             double gamma_e, int u, WeightSource source);

/// Standard deviation of the log-log regression residual at one level:
///   sigma = (1 / (delta ln10)) * sqrt(gamma_i^2 + gamma_e^2 [1 - delta(1-n)]^2 / u).
/// Diverges as delta -> 0; callers must exclude non-sorbing points.
double sigma_eps(const ErrorInputs& inp);

/// The same quantity via the effective-variance route,
///   sigma^2 = (1/ln10)^2 [ (1/delta)^2 gamma_i^2 + (|delta-1|/delta + n)^2 gamma_e^2 / u ],
/// kept as an independently coded cross-check of sigma_eps.
double sigma_eps_effective(const ErrorInputs& inp);

/// Vectorized sigma_eps over per-level deltas.
Eigen::ArrayXd sigma_eps_levels(const Eigen::ArrayXd& delta, double n, double gamma_i,
                                double gamma_e, int u);

/// [1 - delta(1-n)]^2, the factor controlling how much gamma_e
/// contributes to sigma_eps. Lies in [0, 1] for delta, n in [0, 1].
double curvature_term(double delta, double n);

/// Coefficient of variation of the sorbed amount derived from the
/// concentration decrease: (1/delta) sqrt(gamma_i^2 + gamma_e^2 (1-delta)^2).
double cv_of_x(double delta, double gamma_i, double gamma_e);

/// First-order standard deviation of log10 of a variable with CV gamma:
/// gamma / ln10. Accurate for CVs up to about 0.10.
double log_cv(double gamma);

/// Coefficient of variation of a fractional decrease estimated from u
/// replicates: ((1-delta)/delta) sqrt(gamma_i^2 + gamma_e^2 / u).
double gamma_delta(double delta, double gamma_i, double gamma_e, int u);

struct WeightSurfaceRow {
  double delta;
  double n;
  double curvature;
  double sigma_ratio;  // sigma_eps / gamma_e
};

/// Tabulates curvature_term and sigma_eps/gamma_e over a (delta, n) grid.
/// The sigma ratio depends only on gamma_i/gamma_e and u.
std::vector<WeightSurfaceRow> weight_surface(const Eigen::ArrayXd& delta_grid,
                                             const Eigen::ArrayXd& n_grid, double gamma_i,
                                             double gamma_e, int u);

/// Advisory check: the log-CV approximation is derived for CVs up to
/// 0.10. Larger values degrade gracefully, so they warn instead of fail.
std::optional<std::string> cv_range_warning(double gamma, const std::string& name);

}  // namespace sorbfit
