#include "sorbfit/isotherm.hpp"

#include <cmath>
#include <limits>

#include "sorbfit/numerics.hpp"

namespace sorbfit {

void FreundlichParams::validate() const {
  if (!(k_f > 0.0)) throw invalid_input("FreundlichParams: k_f must be positive");
  if (!(n > 0.0)) throw invalid_input("FreundlichParams: n must be positive");
  if (!(c_ref > 0.0)) throw invalid_input("FreundlichParams: c_ref must be positive");
}

void SorptionSystem::validate() const {
  params.validate();
  if (!(r > 0.0)) throw invalid_input("SorptionSystem: r must be positive");
  if (c_i_levels.size() == 0) throw invalid_input("SorptionSystem: no concentration levels");
  for (Eigen::Index i = 0; i < c_i_levels.size(); ++i) {
    if (!(c_i_levels[i] > 0.0))
      throw invalid_input("SorptionSystem: concentration levels must be positive");
    if (i > 0 && !(c_i_levels[i] > c_i_levels[i - 1]))
      throw invalid_input("SorptionSystem: concentration levels must be strictly increasing");
  }
  if (u < 1) throw invalid_input("SorptionSystem: replicate count must be at least 1");
  if (gamma_i < 0.0 || gamma_i > 0.10 || gamma_e < 0.0 || gamma_e > 0.10)
    throw invalid_input(
        "SorptionSystem: gamma_i and gamma_e must lie in [0, 0.10] "
        "(validity bound of the log-CV approximation)");
}

double sorbed_freundlich(const FreundlichParams& params, double c_e) {
  if (c_e < 0.0) throw invalid_input("sorbed_freundlich: c_e must be nonnegative");
  if (c_e == 0.0) return 0.0;
  return params.k_f * params.c_ref * std::pow(c_e / params.c_ref, params.n);
}

double sorbed_from_decrease(double r, double c_i, double c_e) {
  if (!(r > 0.0)) throw invalid_input("sorbed_from_decrease: r must be positive");
  if (!(c_i > 0.0)) throw invalid_input("sorbed_from_decrease: c_i must be positive");
  if (c_e < 0.0) throw invalid_input("sorbed_from_decrease: c_e must be nonnegative");
  return (c_i - c_e) / r;
}

double fractional_decrease(double c_i, double c_e) {
  if (!(c_i > 0.0)) throw invalid_input("fractional_decrease: c_i must be positive");
  return (c_i - c_e) / c_i;
}

double delta_of_system(const FreundlichParams& params, double r, double c_e) {
  if (r < 0.0) throw invalid_input("delta_of_system: r must be nonnegative");
  if (!(c_e > 0.0)) throw invalid_input("delta_of_system: c_e must be positive");
  if (r == 0.0) return 0.0;
  const double c = c_e / params.c_ref;
  const double sorbed = r * params.k_f * std::pow(c, params.n);
  return sorbed / (c + sorbed);
}

double solve_equilibrium(const FreundlichParams& params, double r, double c_i,
                         double rel_tol) {
  if (!(params.n > 0.0)) throw invalid_input("solve_equilibrium: n must be positive");
  if (!(params.c_ref > 0.0)) throw invalid_input("solve_equilibrium: c_ref must be positive");
  if (params.k_f < 0.0 || r < 0.0)
    throw invalid_input("solve_equilibrium: k_f and r must be nonnegative");
  if (!(c_i > 0.0)) throw invalid_input("solve_equilibrium: c_i must be positive");
  if (r == 0.0 || params.k_f == 0.0) return c_i;  // no sorbent, no decrease

  const auto mass_balance = [&](double c_e) {
    return c_e + r * params.k_f * params.c_ref * std::pow(c_e / params.c_ref, params.n) - c_i;
  };
  // mass_balance(c_i) > 0 and -> -c_i as c_e -> 0+, so the root is bracketed.
  const double lo = c_i * std::numeric_limits<double>::min();
  return solve_scalar(mass_balance, lo, c_i, rel_tol);
}

}  // namespace sorbfit
