#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "sorbfit/errors_est.hpp"
#include "sorbfit/isotherm.hpp"
#include "sorbfit/numerics.hpp"
#include "sorbfit/regress.hpp"

namespace sorbfit {

/// The four fitting pipelines compared by the simulation study. Every
/// case starts from the same unweighted first fit (sigma = 1), which
/// supplies the exponent for the weight formula.
///   I   - weights from the true delta, gamma_i, gamma_e
///   II  - weights from delta, gamma_i, gamma_e estimated from the data
///   III - unweighted fit with a-posteriori variance scaling
///   IV  - case-I weights scaled by 0.1, treated as relative only
enum class SimCase { kI, kII, kIII, kIV };

std::string to_string(SimCase c);
SimCase sim_case_from_string(const std::string& name);

/// Draws one synthetic isotherm: per level a single measured c_i (CV
/// gamma_i around the design value) and u replicate c_e values (CV
/// gamma_e around the true equilibrium concentration). An isotherm with
/// any nonpositive c_e or sorbed amount is redrawn whole, keeping the
/// fixed design the variance formulas assume; more than 1000 redraws
/// raise a degenerate-system error.
IsothermDataset generate_isotherm(const SorptionSystem& system, RandomStream& stream,
                                  long* redraw_count = nullptr);

/// Per-level averaged log coordinates of the replicates.
struct LevelPoints {
  Eigen::ArrayXd x;  // mean of log10(c_e / c_ref)
  Eigen::ArrayXd y;  // mean of log10(X)
};

LevelPoints prepare_points(const IsothermDataset& dataset);

/// fit_line that tolerates the noise-free limit: when every sigma is
/// exactly zero the coefficients come from a unit-weight fit and the
/// parameter uncertainties collapse to zero.
FitResult fit_line_or_exact(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y,
                            const Eigen::ArrayXd& sigma, double c_ref, FitMethod method);

/// Runs one case's two-step pipeline on one dataset. Returns nullopt
/// when case II rejects the isotherm (a nonpositive estimated delta,
/// which the weight formula cannot accept).
std::optional<FitResult> run_case(SimCase sim_case, const SorptionSystem& system,
                                  const IsothermDataset& dataset);

/// Population statistics over many simulated isotherms of one system.
/// true_cv_* are the population std/mean of the fitted parameters; the
/// ratio percentiles compare each replicate's estimated CV against the
/// case-I population CV (the cross-case yardstick).
struct SystemPopulation {
  SimCase sim_case = SimCase::kI;
  int kf_index = 0;
  int n_index = 0;
  double k_f = 0.0;  // true parameters
  double n = 0.0;
  double r_kf = 0.0;

  Eigen::ArrayXd fitted_kf;  // accepted replicates (empty when samples not kept)
  Eigen::ArrayXd fitted_n;
  Eigen::ArrayXd est_cv_kf;
  Eigen::ArrayXd est_cv_n;

  double mean_kf = 0.0;
  double mean_n = 0.0;
  double true_cv_kf = 0.0;
  double true_cv_n = 0.0;

  double ratio_kf_p2_5 = 0.0, ratio_kf_p50 = 0.0, ratio_kf_p97_5 = 0.0;
  double ratio_n_p2_5 = 0.0, ratio_n_p50 = 0.0, ratio_n_p97_5 = 0.0;

  long rejected_rep_count = 0;
  long redraw_count = 0;
};

/// Runs several cases over the same reps (identical generated isotherms,
/// shared first fit). Case I is always computed internally because it
/// provides the yardstick CV; results are returned for the requested
/// cases in order. Stream derivation: replicate rep of system system_id
/// uses stream_id = (system_id << 32) | rep.
std::vector<SystemPopulation> run_system_cases(const std::vector<SimCase>& cases,
                                               const SorptionSystem& system, int reps,
                                               std::uint64_t seed,
                                               std::uint32_t system_id = 0,
                                               bool keep_samples = true);

SystemPopulation run_system(SimCase sim_case, const SorptionSystem& system, int reps,
                            std::uint64_t seed, std::uint32_t system_id = 0,
                            bool keep_samples = true);

/// One cell of the simulation sweep: a (k_f, n) pair with its true
/// equilibrium concentrations and fractional decreases per level.
struct GridSystem {
  int kf_index = 0;
  int n_index = 0;
  int grid_index = 0;  // kf_index * n_count + n_index; stream derivation key
  double k_f = 0.0;
  double n = 0.0;
  Eigen::ArrayXd true_c_e;
  Eigen::ArrayXd true_delta;
  bool retained = false;
};

/// The full simulation design: 26 k_f values spaced by a constant factor
/// from 0.5 to 10 L/kg, 21 exponents from 0.2 to 1 in steps of 0.04,
/// r = 1 kg/L, five levels per decade-and-a-half, triplicates, CVs of 1%
/// and 5%. Systems whose fractional decrease falls below min_delta at
/// any level are flagged discarded.
struct SweepGrid {
  Eigen::ArrayXd k_f_values;
  Eigen::ArrayXd n_values;
  double r = 1.0;
  Eigen::ArrayXd c_i_levels;
  int u = 3;
  double gamma_i = 0.01;
  double gamma_e = 0.05;
  double min_delta = 0.30;
  int reps = 10000;
  std::vector<GridSystem> systems;

  int candidate_count() const { return static_cast<int>(systems.size()); }
  int retained_count() const;
  int discarded_count() const;
  SorptionSystem sorption_system(const GridSystem& gs) const;
};

SweepGrid build_grid();

/// Called with each retained system's populations (one per requested
/// case), strictly in grid order, as soon as every earlier system has
/// completed. Lets callers stream results to disk while a sweep runs.
using SweepCallback =
    std::function<void(const GridSystem&, const std::vector<SystemPopulation>&)>;

/// Runs every retained grid system for the requested cases. The result
/// is indexed [retained system][case] and is bitwise independent of the
/// parallelism degree, because all randomness is derived from
/// (seed, grid_index, rep).
std::vector<std::vector<SystemPopulation>> run_sweep(
    const std::vector<SimCase>& cases, const SweepGrid& grid, std::uint64_t seed,
    int parallelism, const SweepCallback& on_system = nullptr);

std::vector<SystemPopulation> run_sweep(SimCase sim_case, const SweepGrid& grid,
                                        std::uint64_t seed, int parallelism);

/// Reference systems for the chi-squared calibration runs (table cases
/// 1 to 3: pesticide-like, phosphate-like, and single-replicate designs).
SorptionSystem chisq_table_system(int table_case);

struct ChisqValidationRow {
  double percentile = 0.0;   // 10, 25, 50, 75, 90
  double simulated = 0.0;    // percentile of the simulated merit values
  double theoretical = 0.0;  // chi-squared quantile at L-2 dof
};

/// Generates reps isotherms for the given table case, fits them with
/// true-parameter weights, and tabulates the simulated distribution of
/// the merit function against the theoretical chi-squared quantiles.
std::vector<ChisqValidationRow> chisq_validation(int table_case, int reps,
                                                 std::uint64_t seed);

}  // namespace sorbfit
