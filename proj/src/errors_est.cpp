#include "sorbfit/errors_est.hpp"

#include <cmath>
#include <string>

namespace sorbfit {

int IsothermDataset::replicate_count() const {
  return levels.empty() ? 0 : static_cast<int>(levels.front().replicate_c_e.size());
}

void IsothermDataset::validate() const {
  if (levels.empty()) throw invalid_input("IsothermDataset: no levels");
  if (!(r > 0.0)) throw invalid_input("IsothermDataset: r must be positive");
  if (!(c_ref > 0.0)) throw invalid_input("IsothermDataset: c_ref must be positive");
  const Eigen::Index u = levels.front().replicate_c_e.size();
  if (u < 1) throw invalid_input("IsothermDataset: at least one replicate required");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const auto& level = levels[i];
    const std::string tag = "IsothermDataset: level " + std::to_string(i + 1);
    if (level.replicate_c_e.size() != u)
      throw invalid_input(tag + ": replicate count differs from other levels");
    if (!(level.measured_c_i > 0.0))
      throw invalid_input(tag + ": measured c_i must be positive");
    if ((level.replicate_c_e <= 0.0).any())
      throw invalid_input(tag + ": replicate c_e values must be positive");
  }
}

double estimate_delta(const IsothermLevel& level) {
  if (level.replicate_c_e.size() == 0)
    throw invalid_input("estimate_delta: no replicates");
  if (!(level.measured_c_i > 0.0))
    throw invalid_input("estimate_delta: measured c_i must be positive");
  return ((level.measured_c_i - level.replicate_c_e) / level.measured_c_i).mean();
}

double estimate_gamma_e(const IsothermDataset& dataset) {
  dataset.validate();
  const int u = dataset.replicate_count();
  if (u < 2)
    throw insufficient_data("estimate_gamma_e: at least 2 replicates per level required");
  double sum_cv2 = 0.0;
  for (const auto& level : dataset.levels) {
    const double mean = level.replicate_c_e.mean();
    const double s2 = (level.replicate_c_e - mean).square().sum() / (u - 1);
    sum_cv2 += s2 / (mean * mean);
  }
  return std::sqrt(sum_cv2 / static_cast<double>(dataset.levels.size()));
}

double estimate_gamma_i(const IsothermDataset& dataset) {
  dataset.validate();
  const auto count = static_cast<Eigen::Index>(dataset.levels.size());
  if (count < 2)
    throw insufficient_data("estimate_gamma_i: at least 2 concentration levels required");
  Eigen::ArrayXd quotients(count);
  for (Eigen::Index i = 0; i < count; ++i) {
    const auto& level = dataset.levels[i];
    if (!(level.expected_c_i > 0.0))
      throw invalid_input("estimate_gamma_i: expected c_i missing or nonpositive at level " +
                          std::to_string(i + 1));
    quotients[i] = level.measured_c_i / level.expected_c_i;
  }
  const Eigen::ArrayXd revised = quotients / quotients.mean();
  return std::sqrt((revised - revised.mean()).square().sum() /
                   static_cast<double>(count - 1));
}

EstimatedErrorParams estimate_error_params(const IsothermDataset& dataset) {
  EstimatedErrorParams out;
  out.delta_per_level.resize(static_cast<Eigen::Index>(dataset.levels.size()));
  for (std::size_t i = 0; i < dataset.levels.size(); ++i)
    out.delta_per_level[static_cast<Eigen::Index>(i)] = estimate_delta(dataset.levels[i]);
  out.gamma_e = estimate_gamma_e(dataset);
  out.gamma_i = estimate_gamma_i(dataset);
  return out;
}

}  // namespace sorbfit
