#include "sorbfit/regress.hpp"

#include <cmath>

namespace sorbfit {

namespace {
const double kLn10 = std::log(10.0);

void check_design(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y,
                  const Eigen::ArrayXd& sigma) {
  if (x.size() != y.size() || x.size() != sigma.size())
    throw invalid_input("fit: x, y, sigma must have equal length");
  if (x.size() < 3)
    throw insufficient_data("fit: at least 3 points required (dof >= 1)");
  if ((sigma <= 0.0).any()) throw invalid_input("fit: sigma must be positive");
  if (!(x.maxCoeff() > x.minCoeff()))
    throw degenerate_design("fit: at least two distinct x values required");
  if (!x.isFinite().all() || !y.isFinite().all())
    throw invalid_input("fit: non-finite coordinates");
}

}  // namespace

std::string to_string(FitMethod method) {
  switch (method) {
    case FitMethod::kUlsPosterior: return "ULS-posterior";
    case FitMethod::kWlsAprioriTrue: return "WLS-a-priori-true";
    case FitMethod::kWlsAprioriEstimated: return "WLS-a-priori-estimated";
    case FitMethod::kWlsRelativePosterior: return "WLS-relative-posterior";
  }
  return "unknown";
}

FitResult fit_line(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y,
                   const Eigen::ArrayXd& sigma, double c_ref, FitMethod method) {
  check_design(x, y, sigma);

  const Eigen::ArrayXd w = sigma.square().inverse();
  const double s = w.sum();
  const double x_m = (w * x).sum() / s;
  // Centered on the weighted mean abscissa to avoid cancellation.
  const Eigen::ArrayXd t = x - x_m;
  const double s_tt = (w * t.square()).sum();

  FitResult fit;
  fit.method = method;
  fit.n = (w * t * y).sum() / s_tt;
  fit.a = (w * y).sum() / s - fit.n * x_m;
  fit.sigma_n = std::sqrt(1.0 / s_tt);
  fit.sigma_a = std::sqrt(1.0 / s + x_m * x_m / s_tt);
  fit.chi2 = (w * (y - fit.a - fit.n * x).square()).sum();
  fit.dof = static_cast<int>(x.size()) - 2;
  fit.scale_factor = 1.0;
  fit.k_f = std::pow(10.0, fit.a) / c_ref;
  fit.sigma_kf = kLn10 * fit.k_f * fit.sigma_a;
  fit.cv_kf = fit.sigma_kf / fit.k_f;
  fit.cv_n = fit.sigma_n / fit.n;
  return fit;
}

namespace {

FitResult apply_posterior_scale(FitResult fit, double factor, FitMethod method) {
  const double scale = std::sqrt(factor);
  fit.scale_factor = factor;
  fit.method = method;
  fit.sigma_a *= scale;
  fit.sigma_n *= scale;
  fit.sigma_kf *= scale;
  fit.cv_kf *= scale;
  fit.cv_n *= scale;
  return fit;
}

}  // namespace

FitResult fit_uls_posterior(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y,
                            double c_ref) {
  const Eigen::ArrayXd unit = Eigen::ArrayXd::Ones(x.size());
  FitResult fit = fit_line(x, y, unit, c_ref, FitMethod::kUlsPosterior);
  if (fit.dof < 1) throw insufficient_data("fit_uls_posterior: zero degrees of freedom");
  return apply_posterior_scale(fit, fit.chi2 / fit.dof, FitMethod::kUlsPosterior);
}

FitResult fit_relative_posterior(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y,
                                 const Eigen::ArrayXd& sigma, double c_ref) {
  FitResult fit = fit_line(x, y, sigma, c_ref, FitMethod::kWlsRelativePosterior);
  if (fit.dof < 1)
    throw insufficient_data("fit_relative_posterior: zero degrees of freedom");
  return apply_posterior_scale(fit, fit.chi2 / fit.dof,
                               FitMethod::kWlsRelativePosterior);
}

double chi2_merit(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y,
                  const Eigen::ArrayXd& sigma, double a, double n) {
  if (x.size() == 0) throw invalid_input("chi2_merit: empty input");
  if (x.size() != y.size() || x.size() != sigma.size())
    throw invalid_input("chi2_merit: x, y, sigma must have equal length");
  return ((y - a - n * x) / sigma).square().sum();
}

}  // namespace sorbfit
