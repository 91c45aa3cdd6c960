#include "sorbfit/simkit.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "sorbfit/weights.hpp"

namespace sorbfit {

std::string to_string(SimCase c) {
  switch (c) {
    case SimCase::kI: return "I";
    case SimCase::kII: return "II";
    case SimCase::kIII: return "III";
    case SimCase::kIV: return "IV";
  }
  return "?";
}

SimCase sim_case_from_string(const std::string& name) {
  if (name == "I" || name == "i" || name == "1") return SimCase::kI;
  if (name == "II" || name == "ii" || name == "2") return SimCase::kII;
  if (name == "III" || name == "iii" || name == "3") return SimCase::kIII;
  if (name == "IV" || name == "iv" || name == "4") return SimCase::kIV;
  throw invalid_input("unknown simulation case '" + name + "' (expected I, II, III or IV)");
}

namespace {

constexpr long kMaxRedraws = 1000;

/// True equilibrium state of a system, solved once and reused across
/// replicates.
struct SystemContext {
  SorptionSystem system;
  Eigen::ArrayXd true_c_e;
  Eigen::ArrayXd true_delta;
};

SystemContext make_context(const SorptionSystem& system) {
  system.validate();
  SystemContext ctx;
  ctx.system = system;
  const Eigen::Index count = system.c_i_levels.size();
  ctx.true_c_e.resize(count);
  ctx.true_delta.resize(count);
  for (Eigen::Index i = 0; i < count; ++i) {
    ctx.true_c_e[i] = solve_equilibrium(system.params, system.r, system.c_i_levels[i]);
    ctx.true_delta[i] = fractional_decrease(system.c_i_levels[i], ctx.true_c_e[i]);
  }
  return ctx;
}

IsothermDataset generate_with_context(const SystemContext& ctx, RandomStream& stream,
                                      long* redraw_count) {
  const SorptionSystem& sys = ctx.system;
  const Eigen::Index level_count = sys.c_i_levels.size();
  IsothermDataset data;
  data.r = sys.r;
  data.c_ref = sys.params.c_ref;
  data.levels.resize(static_cast<std::size_t>(level_count));

  for (long attempt = 0; attempt <= kMaxRedraws; ++attempt) {
    bool valid = true;
    for (Eigen::Index i = 0; i < level_count; ++i) {
      auto& level = data.levels[static_cast<std::size_t>(i)];
      level.expected_c_i = sys.c_i_levels[i];
      level.measured_c_i = sample_normal(stream, sys.c_i_levels[i], sys.gamma_i);
      level.replicate_c_e.resize(sys.u);
      for (int rep = 0; rep < sys.u; ++rep) {
        const double c_e = sample_normal(stream, ctx.true_c_e[i], sys.gamma_e);
        level.replicate_c_e[rep] = c_e;
        if (c_e <= 0.0 || level.measured_c_i - c_e <= 0.0) valid = false;
      }
      if (level.measured_c_i <= 0.0) valid = false;
    }
    if (valid) return data;
    if (redraw_count) ++*redraw_count;
  }
  throw numeric_error("generate_isotherm: redraw cap exceeded; system cannot yield "
                      "positive observables");
}

struct RepOutcome {
  bool rejected = false;  // case II only
  FitResult fit;
};

RepOutcome run_case_on(const SystemContext& ctx, SimCase sim_case,
                       const IsothermDataset& data, const LevelPoints& pts,
                       const FitResult& first_fit) {
  const SorptionSystem& sys = ctx.system;
  RepOutcome out;
  switch (sim_case) {
    case SimCase::kIII:
      out.fit = first_fit;
      return out;
    case SimCase::kI: {
      const Eigen::ArrayXd sig = sigma_eps_levels(ctx.true_delta, first_fit.n,
                                                  sys.gamma_i, sys.gamma_e, sys.u);
      out.fit = fit_line_or_exact(pts.x, pts.y, sig, sys.params.c_ref,
                                  FitMethod::kWlsAprioriTrue);
      return out;
    }
    case SimCase::kII: {
      const EstimatedErrorParams est = estimate_error_params(data);
      if ((est.delta_per_level <= 0.0).any()) {
        out.rejected = true;
        return out;
      }
      const Eigen::ArrayXd sig = sigma_eps_levels(est.delta_per_level, first_fit.n,
                                                  est.gamma_i, est.gamma_e,
                                                  data.replicate_count());
      out.fit = fit_line_or_exact(pts.x, pts.y, sig, sys.params.c_ref,
                                  FitMethod::kWlsAprioriEstimated);
      return out;
    }
    case SimCase::kIV: {
      const Eigen::ArrayXd sig = 0.1 * sigma_eps_levels(ctx.true_delta, first_fit.n,
                                                        sys.gamma_i, sys.gamma_e, sys.u);
      if ((sig == 0.0).all()) {
        out.fit = fit_line_or_exact(pts.x, pts.y, sig, sys.params.c_ref,
                                    FitMethod::kWlsRelativePosterior);
      } else {
        out.fit = fit_relative_posterior(pts.x, pts.y, sig, sys.params.c_ref);
      }
      return out;
    }
  }
  throw invalid_input("run_case: unknown case");
}

double sample_std(const Eigen::ArrayXd& values) {
  if (values.size() < 2) return 0.0;
  const double mean = values.mean();
  return std::sqrt((values - mean).square().sum() /
                   static_cast<double>(values.size() - 1));
}

}  // namespace

IsothermDataset generate_isotherm(const SorptionSystem& system, RandomStream& stream,
                                  long* redraw_count) {
  return generate_with_context(make_context(system), stream, redraw_count);
}

FitResult fit_line_or_exact(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y,
                            const Eigen::ArrayXd& sigma, double c_ref,
                            FitMethod method) {
  if ((sigma > 0.0).all()) return fit_line(x, y, sigma, c_ref, method);
  if ((sigma == 0.0).all()) {
    FitResult fit = fit_line(x, y, Eigen::ArrayXd::Ones(x.size()), c_ref, method);
    fit.method = method;
    fit.sigma_a = fit.sigma_n = fit.sigma_kf = 0.0;
    fit.cv_kf = fit.cv_n = 0.0;
    return fit;
  }
  throw invalid_input("fit: mixed zero and positive sigma values");
}

LevelPoints prepare_points(const IsothermDataset& dataset) {
  dataset.validate();
  const auto count = static_cast<Eigen::Index>(dataset.levels.size());
  LevelPoints pts;
  pts.x.resize(count);
  pts.y.resize(count);
  for (Eigen::Index i = 0; i < count; ++i) {
    const auto& level = dataset.levels[static_cast<std::size_t>(i)];
    double sum_x = 0.0;
    double sum_y = 0.0;
    for (Eigen::Index rep = 0; rep < level.replicate_c_e.size(); ++rep) {
      const double c_e = level.replicate_c_e[rep];
      const double sorbed = (level.measured_c_i - c_e) / dataset.r;
      if (c_e <= 0.0)
        throw nonpositive_observable("prepare_points: nonpositive c_e at level " +
                                     std::to_string(i + 1) + ", replicate " +
                                     std::to_string(rep + 1));
      if (sorbed <= 0.0)
        throw nonpositive_observable("prepare_points: nonpositive sorbed amount at level " +
                                     std::to_string(i + 1) + ", replicate " +
                                     std::to_string(rep + 1));
      sum_x += std::log10(c_e / dataset.c_ref);
      sum_y += std::log10(sorbed);
    }
    const auto u = static_cast<double>(level.replicate_c_e.size());
    pts.x[i] = sum_x / u;
    pts.y[i] = sum_y / u;
  }
  return pts;
}

std::optional<FitResult> run_case(SimCase sim_case, const SorptionSystem& system,
                                  const IsothermDataset& dataset) {
  const SystemContext ctx = make_context(system);
  const LevelPoints pts = prepare_points(dataset);
  const FitResult first_fit = fit_uls_posterior(pts.x, pts.y, system.params.c_ref);
  const RepOutcome out = run_case_on(ctx, sim_case, dataset, pts, first_fit);
  if (out.rejected) return std::nullopt;
  return out.fit;
}

std::vector<SystemPopulation> run_system_cases(const std::vector<SimCase>& cases,
                                               const SorptionSystem& system, int reps,
                                               std::uint64_t seed,
                                               std::uint32_t system_id,
                                               bool keep_samples) {
  if (reps < 2) throw invalid_input("run_system: at least 2 replicates required");
  if (cases.empty()) throw invalid_input("run_system: no cases requested");

  // Case I always runs: its population CV is the yardstick for every case.
  std::vector<SimCase> all_cases = cases;
  if (std::find(all_cases.begin(), all_cases.end(), SimCase::kI) == all_cases.end())
    all_cases.push_back(SimCase::kI);

  const SystemContext ctx = make_context(system);
  const auto case_count = all_cases.size();

  struct Accum {
    std::vector<double> kf, n, cv_kf, cv_n;
    long rejected = 0;
  };
  std::vector<Accum> acc(case_count);
  for (auto& a : acc) {
    a.kf.reserve(reps);
    a.n.reserve(reps);
    a.cv_kf.reserve(reps);
    a.cv_n.reserve(reps);
  }
  long redraws = 0;

  for (int rep = 0; rep < reps; ++rep) {
    RandomStream stream(seed, (static_cast<std::uint64_t>(system_id) << 32) |
                                  static_cast<std::uint64_t>(rep));
    const IsothermDataset data = generate_with_context(ctx, stream, &redraws);
    const LevelPoints pts = prepare_points(data);
    const FitResult first_fit = fit_uls_posterior(pts.x, pts.y, system.params.c_ref);
    for (std::size_t c = 0; c < case_count; ++c) {
      const RepOutcome out = run_case_on(ctx, all_cases[c], data, pts, first_fit);
      if (out.rejected) {
        ++acc[c].rejected;
        continue;
      }
      acc[c].kf.push_back(out.fit.k_f);
      acc[c].n.push_back(out.fit.n);
      acc[c].cv_kf.push_back(out.fit.cv_kf);
      acc[c].cv_n.push_back(out.fit.cv_n);
    }
  }

  const auto to_array = [](const std::vector<double>& v) {
    return Eigen::Map<const Eigen::ArrayXd>(v.data(), static_cast<Eigen::Index>(v.size()))
        .eval();
  };

  // Yardstick from the case-I population.
  const std::size_t index_i =
      static_cast<std::size_t>(std::find(all_cases.begin(), all_cases.end(), SimCase::kI) -
                               all_cases.begin());
  const Eigen::ArrayXd kf_i = to_array(acc[index_i].kf);
  const Eigen::ArrayXd n_i = to_array(acc[index_i].n);
  const double yard_cv_kf = sample_std(kf_i) / kf_i.mean();
  const double yard_cv_n = sample_std(n_i) / n_i.mean();

  std::vector<SystemPopulation> result;
  result.reserve(cases.size());
  for (SimCase requested : cases) {
    const std::size_t c = static_cast<std::size_t>(
        std::find(all_cases.begin(), all_cases.end(), requested) - all_cases.begin());
    SystemPopulation pop;
    pop.sim_case = requested;
    pop.k_f = system.params.k_f;
    pop.n = system.params.n;
    pop.r_kf = system.r * system.params.k_f;
    pop.fitted_kf = to_array(acc[c].kf);
    pop.fitted_n = to_array(acc[c].n);
    pop.est_cv_kf = to_array(acc[c].cv_kf);
    pop.est_cv_n = to_array(acc[c].cv_n);
    pop.rejected_rep_count = acc[c].rejected;
    pop.redraw_count = redraws;
    pop.mean_kf = pop.fitted_kf.size() ? pop.fitted_kf.mean() : 0.0;
    pop.mean_n = pop.fitted_n.size() ? pop.fitted_n.mean() : 0.0;
    pop.true_cv_kf = pop.fitted_kf.size() ? sample_std(pop.fitted_kf) / pop.mean_kf : 0.0;
    pop.true_cv_n = pop.fitted_n.size() ? sample_std(pop.fitted_n) / pop.mean_n : 0.0;

    if (yard_cv_kf > 0.0 && yard_cv_n > 0.0 && pop.est_cv_kf.size() > 0) {
      const Eigen::ArrayXd ratio_kf = pop.est_cv_kf / yard_cv_kf;
      const Eigen::ArrayXd ratio_n = pop.est_cv_n / yard_cv_n;
      pop.ratio_kf_p2_5 = percentile(ratio_kf, 0.025);
      pop.ratio_kf_p50 = percentile(ratio_kf, 0.50);
      pop.ratio_kf_p97_5 = percentile(ratio_kf, 0.975);
      pop.ratio_n_p2_5 = percentile(ratio_n, 0.025);
      pop.ratio_n_p50 = percentile(ratio_n, 0.50);
      pop.ratio_n_p97_5 = percentile(ratio_n, 0.975);
    } else {
      // Noise-free populations have zero true CV; the ratios are undefined.
      const double nan = std::numeric_limits<double>::quiet_NaN();
      pop.ratio_kf_p2_5 = pop.ratio_kf_p50 = pop.ratio_kf_p97_5 = nan;
      pop.ratio_n_p2_5 = pop.ratio_n_p50 = pop.ratio_n_p97_5 = nan;
    }

    if (!keep_samples) {
      pop.fitted_kf.resize(0);
      pop.fitted_n.resize(0);
      pop.est_cv_kf.resize(0);
      pop.est_cv_n.resize(0);
    }
    result.push_back(std::move(pop));
  }
  return result;
}

SystemPopulation run_system(SimCase sim_case, const SorptionSystem& system, int reps,
                            std::uint64_t seed, std::uint32_t system_id,
                            bool keep_samples) {
  return run_system_cases({sim_case}, system, reps, seed, system_id, keep_samples)
      .front();
}

int SweepGrid::retained_count() const {
  return static_cast<int>(
      std::count_if(systems.begin(), systems.end(), [](const GridSystem& s) {
        return s.retained;
      }));
}

int SweepGrid::discarded_count() const { return candidate_count() - retained_count(); }

SorptionSystem SweepGrid::sorption_system(const GridSystem& gs) const {
  SorptionSystem sys;
  sys.params = {gs.k_f, gs.n, 1.0};
  sys.r = r;
  sys.c_i_levels = c_i_levels;
  sys.u = u;
  sys.gamma_i = gamma_i;
  sys.gamma_e = gamma_e;
  return sys;
}

SweepGrid build_grid() {
  SweepGrid grid;
  grid.k_f_values.resize(26);
  for (int j = 0; j < 26; ++j)
    grid.k_f_values[j] = 0.5 * std::pow(20.0, j / 25.0);
  grid.n_values.resize(21);
  for (int j = 0; j < 21; ++j) grid.n_values[j] = (5.0 + j) / 25.0;
  grid.c_i_levels.resize(5);
  grid.c_i_levels << 0.1, 0.32, 1.0, 3.2, 10.0;

  grid.systems.reserve(26u * 21u);
  for (int ik = 0; ik < 26; ++ik) {
    for (int in = 0; in < 21; ++in) {
      GridSystem gs;
      gs.kf_index = ik;
      gs.n_index = in;
      gs.grid_index = ik * 21 + in;
      gs.k_f = grid.k_f_values[ik];
      gs.n = grid.n_values[in];
      const FreundlichParams params{gs.k_f, gs.n, 1.0};
      const Eigen::Index level_count = grid.c_i_levels.size();
      gs.true_c_e.resize(level_count);
      gs.true_delta.resize(level_count);
      for (Eigen::Index i = 0; i < level_count; ++i) {
        gs.true_c_e[i] = solve_equilibrium(params, grid.r, grid.c_i_levels[i]);
        gs.true_delta[i] = fractional_decrease(grid.c_i_levels[i], gs.true_c_e[i]);
      }
      gs.retained = (gs.true_delta >= grid.min_delta).all();
      grid.systems.push_back(std::move(gs));
    }
  }
  return grid;
}

std::vector<std::vector<SystemPopulation>> run_sweep(
    const std::vector<SimCase>& cases, const SweepGrid& grid, std::uint64_t seed,
    int parallelism, const SweepCallback& on_system) {
  if (parallelism < 1) throw invalid_input("run_sweep: parallelism must be at least 1");

  std::vector<const GridSystem*> retained;
  for (const auto& gs : grid.systems)
    if (gs.retained) retained.push_back(&gs);

  std::vector<std::vector<SystemPopulation>> results(retained.size());
  std::vector<char> done(retained.size(), 0);
  std::atomic<std::size_t> next{0};
  std::size_t emitted = 0;
  std::mutex emit_mutex;
  std::exception_ptr failure;
  std::mutex failure_mutex;

  const auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= retained.size()) return;
      try {
        const GridSystem& gs = *retained[i];
        auto pops = run_system_cases(cases, grid.sorption_system(gs), grid.reps, seed,
                                     static_cast<std::uint32_t>(gs.grid_index),
                                     /*keep_samples=*/false);
        for (auto& pop : pops) {
          pop.kf_index = gs.kf_index;
          pop.n_index = gs.n_index;
        }
        std::lock_guard<std::mutex> lock(emit_mutex);
        results[i] = std::move(pops);
        done[i] = 1;
        // Emit every completed prefix in grid order so interrupted sweeps
        // leave a consistent partial output behind.
        while (emitted < retained.size() && done[emitted]) {
          if (on_system) on_system(*retained[emitted], results[emitted]);
          ++emitted;
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  const int thread_count = std::min<int>(parallelism, static_cast<int>(retained.size()));
  if (thread_count <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(thread_count));
    for (int t = 0; t < thread_count; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

std::vector<SystemPopulation> run_sweep(SimCase sim_case, const SweepGrid& grid,
                                        std::uint64_t seed, int parallelism) {
  auto nested = run_sweep(std::vector<SimCase>{sim_case}, grid, seed, parallelism);
  std::vector<SystemPopulation> flat;
  flat.reserve(nested.size());
  for (auto& pops : nested) flat.push_back(std::move(pops.front()));
  return flat;
}

SorptionSystem chisq_table_system(int table_case) {
  SorptionSystem sys;
  switch (table_case) {
    case 1:
      sys.params = {0.5, 0.9, 1.0};
      sys.r = 0.5;
      sys.c_i_levels.resize(5);
      sys.c_i_levels << 0.1, 0.32, 1.0, 3.2, 10.0;
      sys.u = 3;
      sys.gamma_i = 0.005;
      sys.gamma_e = 0.01;
      return sys;
    case 2:
      sys.params = {200.0, 0.3, 1.0};
      sys.r = 0.04;
      sys.c_i_levels.resize(6);
      sys.c_i_levels << 0.2, 0.5, 2.0, 5.0, 10.0, 20.0;
      sys.u = 2;
      sys.gamma_i = 0.025;
      sys.gamma_e = 0.05;
      return sys;
    case 3:
      sys.params = {1.0, 0.7, 1.0};
      sys.r = 1.0;
      sys.c_i_levels.resize(9);
      sys.c_i_levels << 0.1, 0.2, 0.32, 0.7, 1.0, 2.0, 3.2, 7.0, 10.0;
      sys.u = 1;
      sys.gamma_i = 0.025;
      sys.gamma_e = 0.05;
      return sys;
    default:
      throw invalid_input("chisq_table_system: table case must be 1, 2 or 3");
  }
}

std::vector<ChisqValidationRow> chisq_validation(int table_case, int reps,
                                                 std::uint64_t seed) {
  if (reps < 2) throw invalid_input("chisq_validation: at least 2 replicates required");
  const SorptionSystem sys = chisq_table_system(table_case);
  const SystemContext ctx = make_context(sys);

  Eigen::ArrayXd merits(reps);
  long redraws = 0;
  for (int rep = 0; rep < reps; ++rep) {
    RandomStream stream(seed, (static_cast<std::uint64_t>(table_case) << 32) |
                                  static_cast<std::uint64_t>(rep));
    const IsothermDataset data = generate_with_context(ctx, stream, &redraws);
    const LevelPoints pts = prepare_points(data);
    const FitResult first_fit = fit_uls_posterior(pts.x, pts.y, sys.params.c_ref);
    const Eigen::ArrayXd sig = sigma_eps_levels(ctx.true_delta, first_fit.n,
                                                sys.gamma_i, sys.gamma_e, sys.u);
    merits[rep] =
        fit_line(pts.x, pts.y, sig, sys.params.c_ref, FitMethod::kWlsAprioriTrue).chi2;
  }

  const int dof = static_cast<int>(sys.c_i_levels.size()) - 2;
  std::vector<ChisqValidationRow> rows;
  for (double p : {10.0, 25.0, 50.0, 75.0, 90.0})
    rows.push_back({p, percentile(merits, p / 100.0), chisq_quantile(p / 100.0, dof)});
  return rows;
}

}  // namespace sorbfit
