#include "sorbfit/weights.hpp"

#include <cmath>

namespace sorbfit {

namespace {
const double kLn10 = std::log(10.0);
}

void ErrorInputs::validate() const {
  if (!(delta > 0.0))
    throw invalid_input("ErrorInputs: delta must be positive (sigma_eps diverges at 0)");
  if (delta > 1.0) throw invalid_input("ErrorInputs: delta cannot exceed 1");
  if (gamma_i < 0.0 || gamma_e < 0.0)
    throw invalid_input("ErrorInputs: CVs must be nonnegative");
  if (u < 1) throw invalid_input("ErrorInputs: replicate count must be at least 1");
}

double sigma_eps(const ErrorInputs& inp) {
  inp.validate();
  const double bracket = 1.0 - inp.delta * (1.0 - inp.n);
  const double var = inp.gamma_i * inp.gamma_i +
                     inp.gamma_e * inp.gamma_e * bracket * bracket / inp.u;
  return std::sqrt(var) / (inp.delta * kLn10);
}

double sigma_eps_effective(const ErrorInputs& inp) {
  inp.validate();
  const double slope_sum = std::abs(inp.delta - 1.0) / inp.delta + inp.n;
  const double var = (1.0 / (inp.delta * inp.delta)) * inp.gamma_i * inp.gamma_i +
                     slope_sum * slope_sum * inp.gamma_e * inp.gamma_e / inp.u;
  return std::sqrt(var) / kLn10;
}

Eigen::ArrayXd sigma_eps_levels(const Eigen::ArrayXd& delta, double n, double gamma_i,
                                double gamma_e, int u) {
  Eigen::ArrayXd out(delta.size());
  for (Eigen::Index i = 0; i < delta.size(); ++i)
    out[i] = sigma_eps({delta[i], n, gamma_i, gamma_e, u});
  return out;
}

std::string to_string(WeightSource source) {
  switch (source) {
    case WeightSource::kTrueParameters: return "true-parameters";
    case WeightSource::kEstimatedFromData: return "estimated-from-data";
    case WeightSource::kUnit: return "unit";
    case WeightSource::kRelativeScaled: return "relative-scaled";
  }
  return "unknown";
}

ErrorModel build_error_model(const Eigen::ArrayXd& delta, double n, double gamma_i,
                             double gamma_e, int u, WeightSource source) {
  ErrorModel model;
  model.sigma_eps = source == WeightSource::kUnit
                        ? Eigen::ArrayXd::Ones(delta.size()).eval()
                        : sigma_eps_levels(delta, n, gamma_i, gamma_e, u);
  model.delta = delta;
  model.n = n;
  model.gamma_i = gamma_i;
  model.gamma_e = gamma_e;
  model.u = u;
  model.source = source;
  return model;
}

double curvature_term(double delta, double n) {
  const double bracket = 1.0 - delta * (1.0 - n);
  return bracket * bracket;
}

double cv_of_x(double delta, double gamma_i, double gamma_e) {
  if (!(delta > 0.0)) throw invalid_input("cv_of_x: delta must be positive");
  const double one_minus = 1.0 - delta;
  return std::sqrt(gamma_i * gamma_i + gamma_e * gamma_e * one_minus * one_minus) / delta;
}

double log_cv(double gamma) { return gamma / kLn10; }

double gamma_delta(double delta, double gamma_i, double gamma_e, int u) {
  if (!(delta > 0.0 && delta < 1.0))
    throw invalid_input("gamma_delta: delta must lie in (0, 1)");
  if (u < 1) throw invalid_input("gamma_delta: replicate count must be at least 1");
  return ((1.0 - delta) / delta) *
         std::sqrt(gamma_i * gamma_i + gamma_e * gamma_e / u);
}

std::vector<WeightSurfaceRow> weight_surface(const Eigen::ArrayXd& delta_grid,
                                             const Eigen::ArrayXd& n_grid, double gamma_i,
                                             double gamma_e, int u) {
  if (!(gamma_e > 0.0)) throw invalid_input("weight_surface: gamma_e must be positive");
  std::vector<WeightSurfaceRow> rows;
  rows.reserve(static_cast<std::size_t>(delta_grid.size() * n_grid.size()));
  for (double d : delta_grid)
    for (double n : n_grid)
      rows.push_back({d, n, curvature_term(d, n),
                      sigma_eps({d, n, gamma_i, gamma_e, u}) / gamma_e});
  return rows;
}

std::optional<std::string> cv_range_warning(double gamma, const std::string& name) {
  if (gamma > 0.10)
    return name + " = " + std::to_string(gamma) +
           " exceeds 0.10, outside the validity range of the log-CV approximation";
  return std::nullopt;
}

}  // namespace sorbfit
