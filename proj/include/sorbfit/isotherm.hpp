#pragma once

#include <Eigen/Core>

#include "sorbfit/errors.hpp"

namespace sorbfit {

/// Freundlich isotherm X = k_f * c_ref * (c_e / c_ref)^n.
///
/// Units: k_f in L/kg, concentrations in mg/L, X in mg/kg. The reference
/// concentration keeps the unit of k_f independent of n and is commonly
/// 1 mg/L.
struct FreundlichParams {
  double k_f = 1.0;
  double n = 1.0;
  double c_ref = 1.0;

  void validate() const;
};

/// Design of a batch sorption experiment: sorbent-liquid ratio r (kg/L),
/// initial concentration levels (mg/L, strictly increasing), replicate
/// count per level, and the measurement CVs of the initial and
/// equilibrium concentrations.
struct SorptionSystem {
  FreundlichParams params;
  double r = 1.0;
  Eigen::ArrayXd c_i_levels;
  int u = 3;
  double gamma_i = 0.0;
  double gamma_e = 0.0;

  void validate() const;
};

/// Sorbed amount from the isotherm at equilibrium concentration c_e.
double sorbed_freundlich(const FreundlichParams& params, double c_e);

/// Sorbed amount from the concentration decrease: X = (c_i - c_e) / r.
/// Negative results are allowed (measured c_e can exceed c_i).
double sorbed_from_decrease(double r, double c_i, double c_e);

/// Fractional decrease of the solution concentration: (c_i - c_e) / c_i.
double fractional_decrease(double c_i, double c_e);

/// Fractional decrease implied by the isotherm and the ratio r at
/// equilibrium concentration c_e:
///   delta = r*k_f*C^n / (C + r*k_f*C^n),  C = c_e / c_ref.
/// Tends to 0 as r -> 0 and to 1 as r -> infinity.
double delta_of_system(const FreundlichParams& params, double r, double c_e);

/// The unique equilibrium concentration in (0, c_i) satisfying the mass
/// balance c_e + r*k_f*c_ref*(c_e/c_ref)^n = c_i. The left side is
/// strictly increasing in c_e for n > 0, so bisection on (0, c_i] always
/// brackets the root.
double solve_equilibrium(const FreundlichParams& params, double r, double c_i,
                         double rel_tol = 1e-12);

}  // namespace sorbfit
