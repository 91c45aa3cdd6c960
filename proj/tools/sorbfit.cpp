// sorbfit: batch fitting of Freundlich sorption isotherms after log-log
// transformation, with weighted least squares and analytically derived
// weights, plus the Monte Carlo machinery to validate the error model.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "sorbfit/csv_io.hpp"
#include "sorbfit/errors.hpp"
#include "sorbfit/simkit.hpp"
#include "sorbfit/weights.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;

struct FitOptions {
  std::string data_file;
  std::string method = "wls-estimated";
  double r = 1.0;
  double c_ref = 1.0;
  std::optional<double> gamma_i;
  std::optional<double> gamma_e;
  std::string out_file;
};

struct SweepOptions {
  std::string case_name = "all";
  int reps = 10000;
  std::uint64_t seed = 1;
  int parallelism = 0;  // 0 = hardware concurrency
  std::string out_dir = ".";
};

struct SimulateOptions {
  double k_f = 1.0;
  double n = 0.7;
  double r = 1.0;
  std::vector<double> levels{0.1, 0.32, 1.0, 3.2, 10.0};
  int u = 3;
  double gamma_i = 0.01;
  double gamma_e = 0.05;
  std::string case_name = "I";
  int reps = 10000;
  std::uint64_t seed = 1;
  std::string out_file;
};

struct ChisqOptions {
  int table_case = 1;
  int reps = 10000;
  std::uint64_t seed = 1;
  std::string out_file;
};

struct SurfaceOptions {
  double gamma_e = 0.05;
  std::optional<double> gamma_i;
  int u = 3;
  double delta_min = 0.02, delta_max = 1.0, delta_step = 0.02;
  double n_min = 0.0, n_max = 1.0, n_step = 0.05;
  std::string out_file;
};

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw sorbfit::invalid_input("cannot open output file '" + path + "'");
  return out;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

// Flat `key = value` config files. Every key mirrors a long CLI flag of
// the invoked subcommand; command-line flags take precedence. The file's
// flags are spliced in right after the subcommand name, so later (real)
// flags win under the take-last option policy.
std::vector<std::string> apply_config_file(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size())
        throw sorbfit::invalid_input("--config requires a file path");
      path = args[i + 1];
      args.erase(args.begin() + static_cast<long>(i), args.begin() + static_cast<long>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<long>(i));
      break;
    }
  }
  if (path.empty()) return args;
  if (args.empty())
    throw sorbfit::invalid_input("--config requires a subcommand");

  std::ifstream in(path);
  if (!in) throw sorbfit::invalid_input("cannot open config file '" + path + "'");
  std::vector<std::string> spliced;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = trim(line);
    if (text.empty() || text[0] == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw sorbfit::invalid_input("config '" + path + "' line " +
                                   std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key.empty() || key == "config")
      throw sorbfit::invalid_input("config '" + path + "' line " +
                                   std::to_string(line_no) + ": bad key");
    spliced.push_back("--" + key);
    spliced.push_back(value);
  }
  // insert after the subcommand name
  args.insert(args.begin() + 1, spliced.begin(), spliced.end());
  return args;
}

int run_fit(const FitOptions& opt) {
  const auto method = sorbfit::io::fit_method_from_string(opt.method);
  const sorbfit::IsothermDataset dataset =
      sorbfit::io::read_isotherm_csv_file(opt.data_file, opt.r, opt.c_ref);
  sorbfit::io::FitRequest request{method, opt.gamma_i, opt.gamma_e};
  const sorbfit::io::FitReport report = sorbfit::io::fit_dataset(dataset, request);
  const std::string text = sorbfit::io::render_report(report);
  if (!opt.out_file.empty()) open_output(opt.out_file) << text;
  std::cout << text;
  return kExitOk;
}

std::vector<sorbfit::SimCase> parse_cases(const std::string& name) {
  if (name == "all")
    return {sorbfit::SimCase::kI, sorbfit::SimCase::kII, sorbfit::SimCase::kIII,
            sorbfit::SimCase::kIV};
  return {sorbfit::sim_case_from_string(name)};
}

int run_sweep_cmd(const SweepOptions& opt) {
  const auto cases = parse_cases(opt.case_name);
  sorbfit::SweepGrid grid = sorbfit::build_grid();
  grid.reps = opt.reps;
  const int parallelism =
      opt.parallelism > 0 ? opt.parallelism
                          : std::max(1u, std::thread::hardware_concurrency());

  std::filesystem::create_directories(opt.out_dir);
  std::vector<std::ofstream> files;
  for (const auto sim_case : cases) {
    const std::string path =
        opt.out_dir + "/sweep_case_" + sorbfit::to_string(sim_case) + ".csv";
    files.push_back(open_output(path));
    files.back() << sorbfit::io::sweep_csv_header() << '\n';
  }

  const auto on_system = [&](const sorbfit::GridSystem&,
                             const std::vector<sorbfit::SystemPopulation>& pops) {
    for (std::size_t c = 0; c < pops.size(); ++c)
      files[c] << sorbfit::io::sweep_csv_row(pops[c]) << '\n' << std::flush;
  };
  sorbfit::run_sweep(cases, grid, opt.seed, parallelism, on_system);

  std::ofstream summary = open_output(opt.out_dir + "/sweep_summary.csv");
  summary << "kf,n,rkf,retained,min_delta,max_delta,delta_spread\n";
  for (const auto& gs : grid.systems) {
    const double dmin = gs.true_delta.minCoeff();
    const double dmax = gs.true_delta.maxCoeff();
    summary << sorbfit::io::format_full(gs.k_f) << ',' << sorbfit::io::format_full(gs.n)
            << ',' << sorbfit::io::format_full(grid.r * gs.k_f) << ','
            << (gs.retained ? 1 : 0) << ',' << sorbfit::io::format_full(dmin) << ','
            << sorbfit::io::format_full(dmax) << ','
            << sorbfit::io::format_full(dmax - dmin) << '\n';
  }

  std::cout << "candidate systems: " << grid.candidate_count() << '\n'
            << "retained:          " << grid.retained_count() << '\n'
            << "discarded:         " << grid.discarded_count() << '\n'
            << "reps per system:   " << opt.reps << '\n'
            << "output directory:  " << opt.out_dir << '\n';
  return kExitOk;
}

int run_simulate(const SimulateOptions& opt) {
  sorbfit::SorptionSystem system;
  system.params = {opt.k_f, opt.n, 1.0};
  system.r = opt.r;
  system.c_i_levels = Eigen::Map<const Eigen::ArrayXd>(
      opt.levels.data(), static_cast<Eigen::Index>(opt.levels.size()));
  system.u = opt.u;
  system.gamma_i = opt.gamma_i;
  system.gamma_e = opt.gamma_e;
  system.validate();

  const auto sim_case = sorbfit::sim_case_from_string(opt.case_name);
  const sorbfit::SystemPopulation pop =
      sorbfit::run_system(sim_case, system, opt.reps, opt.seed);

  std::cout << "case " << sorbfit::to_string(sim_case) << ", " << opt.reps
            << " simulated isotherms, seed " << opt.seed << '\n'
            << "mean fitted K_F: " << sorbfit::io::format_sig6(pop.mean_kf)
            << " (true " << sorbfit::io::format_sig6(opt.k_f) << ")\n"
            << "mean fitted N:   " << sorbfit::io::format_sig6(pop.mean_n) << " (true "
            << sorbfit::io::format_sig6(opt.n) << ")\n"
            << "population cv K_F: " << sorbfit::io::format_sig6(100.0 * pop.true_cv_kf)
            << "%   cv N: " << sorbfit::io::format_sig6(100.0 * pop.true_cv_n) << "%\n"
            << "cv ratio percentiles (2.5/50/97.5):\n"
            << "  K_F: " << sorbfit::io::format_sig6(pop.ratio_kf_p2_5) << " / "
            << sorbfit::io::format_sig6(pop.ratio_kf_p50) << " / "
            << sorbfit::io::format_sig6(pop.ratio_kf_p97_5) << '\n'
            << "  N:   " << sorbfit::io::format_sig6(pop.ratio_n_p2_5) << " / "
            << sorbfit::io::format_sig6(pop.ratio_n_p50) << " / "
            << sorbfit::io::format_sig6(pop.ratio_n_p97_5) << '\n'
            << "rejected isotherms: " << pop.rejected_rep_count
            << "   redraws: " << pop.redraw_count << '\n';

  if (!opt.out_file.empty()) {
    auto out = open_output(opt.out_file);
    out << sorbfit::io::sweep_csv_header() << '\n'
        << sorbfit::io::sweep_csv_row(pop) << '\n';
  }
  return kExitOk;
}

int run_chisq(const ChisqOptions& opt) {
  const sorbfit::SorptionSystem system = sorbfit::chisq_table_system(opt.table_case);
  const int dof = static_cast<int>(system.c_i_levels.size()) - 2;
  if (opt.reps < 1000)
    std::cerr << "warning: reps = " << opt.reps
              << " gives poor Monte Carlo precision for percentile comparisons; "
                 "consider 10000\n";
  const auto rows = sorbfit::chisq_validation(opt.table_case, opt.reps, opt.seed);
  std::cout << "table case " << opt.table_case << ": L = " << system.c_i_levels.size()
            << ", U = " << system.u << ", dof = " << dof << '\n';
  std::cout << sorbfit::io::chisq_csv_header() << '\n';
  for (const auto& row : rows) std::cout << sorbfit::io::chisq_csv_row(row) << '\n';
  if (!opt.out_file.empty()) {
    auto out = open_output(opt.out_file);
    out << sorbfit::io::chisq_csv_header() << '\n';
    for (const auto& row : rows) out << sorbfit::io::chisq_csv_row(row) << '\n';
  }
  return kExitOk;
}

int run_surface(const SurfaceOptions& opt) {
  const double gamma_i = opt.gamma_i ? *opt.gamma_i : 0.5 * opt.gamma_e;
  if (!(opt.delta_step > 0.0) || !(opt.n_step > 0.0))
    throw sorbfit::invalid_input("weights-table: grid steps must be positive");
  std::vector<double> deltas, ns;
  for (double d = opt.delta_min; d <= opt.delta_max + 1e-12; d += opt.delta_step)
    deltas.push_back(std::min(d, opt.delta_max));
  for (double n = opt.n_min; n <= opt.n_max + 1e-12; n += opt.n_step)
    ns.push_back(std::min(n, opt.n_max));
  const auto rows = sorbfit::weight_surface(
      Eigen::Map<const Eigen::ArrayXd>(deltas.data(),
                                       static_cast<Eigen::Index>(deltas.size())),
      Eigen::Map<const Eigen::ArrayXd>(ns.data(), static_cast<Eigen::Index>(ns.size())),
      gamma_i, opt.gamma_e, opt.u);

  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!opt.out_file.empty()) {
    file = open_output(opt.out_file);
    out = &file;
  }
  *out << sorbfit::io::surface_csv_header() << '\n';
  for (const auto& row : rows) *out << sorbfit::io::surface_csv_row(row) << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Freundlich isotherm fitting with weighted least squares and analytically "
      "derived weights"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  FitOptions fit_opt;
  auto* fit = app.add_subcommand(
      "fit", "Fit one isotherm CSV and report parameters with their CVs");
  fit->add_option("data", fit_opt.data_file, "isotherm CSV file")->required();
  fit->add_option("--method", fit_opt.method,
                  "wls-apriori | wls-estimated | uls | wls-relative")
      ->capture_default_str();
  fit->add_option("--r", fit_opt.r, "sorbent-liquid ratio, kg/L")->required();
  fit->add_option("--c-ref", fit_opt.c_ref, "reference concentration, mg/L")
      ->capture_default_str();
  double fit_gamma_i = 0.0, fit_gamma_e = 0.0;
  auto* gi_opt = fit->add_option("--gamma-i", fit_gamma_i, "CV of the initial concentration");
  auto* ge_opt = fit->add_option("--gamma-e", fit_gamma_e, "CV of the equilibrium concentration");
  fit->add_option("--out", fit_opt.out_file, "also write the report to this file");

  SweepOptions sweep_opt;
  auto* sweep = app.add_subcommand(
      "sweep", "Monte Carlo sweep over the full simulation grid, emitting plot data");
  sweep->add_option("--case", sweep_opt.case_name, "I | II | III | IV | all")
      ->capture_default_str();
  sweep->add_option("--reps", sweep_opt.reps, "isotherms per system")
      ->capture_default_str();
  sweep->add_option("--seed", sweep_opt.seed, "master seed")
      ->envname("SORBFIT_SEED")
      ->capture_default_str();
  sweep->add_option("--parallelism", sweep_opt.parallelism,
                    "worker threads (0 = all hardware threads)")
      ->capture_default_str();
  sweep->add_option("--out-dir", sweep_opt.out_dir, "output directory")
      ->capture_default_str();

  SimulateOptions sim_opt;
  auto* sim = app.add_subcommand(
      "simulate", "Monte Carlo run of a single sorption system");
  sim->add_option("--kf", sim_opt.k_f, "Freundlich coefficient, L/kg")
      ->capture_default_str();
  sim->add_option("--n", sim_opt.n, "Freundlich exponent")->capture_default_str();
  sim->add_option("--r", sim_opt.r, "sorbent-liquid ratio, kg/L")->capture_default_str();
  sim->add_option("--levels", sim_opt.levels, "initial concentration levels, mg/L")
      ->delimiter(',')
      ->capture_default_str();
  sim->add_option("--u", sim_opt.u, "replicates per level")->capture_default_str();
  sim->add_option("--gamma-i", sim_opt.gamma_i, "CV of the initial concentration")
      ->capture_default_str();
  sim->add_option("--gamma-e", sim_opt.gamma_e, "CV of the equilibrium concentration")
      ->capture_default_str();
  sim->add_option("--case", sim_opt.case_name, "I | II | III | IV")->capture_default_str();
  sim->add_option("--reps", sim_opt.reps, "number of simulated isotherms")
      ->capture_default_str();
  sim->add_option("--seed", sim_opt.seed, "master seed")
      ->envname("SORBFIT_SEED")
      ->capture_default_str();
  sim->add_option("--out", sim_opt.out_file, "write a one-row summary CSV here");

  ChisqOptions chisq_opt;
  auto* chisq = app.add_subcommand(
      "validate-chisq",
      "Compare the simulated merit-function distribution against theory");
  chisq->add_option("--case", chisq_opt.table_case, "table case 1 | 2 | 3")
      ->capture_default_str();
  chisq->add_option("--reps", chisq_opt.reps, "number of simulated isotherms")
      ->capture_default_str();
  chisq->add_option("--seed", chisq_opt.seed, "master seed")
      ->envname("SORBFIT_SEED")
      ->capture_default_str();
  chisq->add_option("--out", chisq_opt.out_file, "write the comparison CSV here");

  SurfaceOptions surf_opt;
  auto* surf = app.add_subcommand(
      "weights-table", "Tabulate the weight model over a (delta, N) grid");
  surf->add_option("--gamma-e", surf_opt.gamma_e, "CV of the equilibrium concentration")
      ->capture_default_str();
  double surf_gamma_i = 0.0;
  auto* surf_gi = surf->add_option(
      "--gamma-i", surf_gamma_i, "CV of the initial concentration (default 0.5*gamma_e)");
  surf->add_option("--u", surf_opt.u, "replicates per level")->capture_default_str();
  surf->add_option("--delta-min", surf_opt.delta_min)->capture_default_str();
  surf->add_option("--delta-max", surf_opt.delta_max)->capture_default_str();
  surf->add_option("--delta-step", surf_opt.delta_step)->capture_default_str();
  surf->add_option("--n-min", surf_opt.n_min)->capture_default_str();
  surf->add_option("--n-max", surf_opt.n_max)->capture_default_str();
  surf->add_option("--n-step", surf_opt.n_step)->capture_default_str();
  surf->add_option("--out", surf_opt.out_file, "write the surface CSV here");
  for (CLI::App* sub : {fit, sweep, sim, chisq, surf})
    sub->add_option("--config",
                    "flat key = value file; keys mirror this subcommand's flags");

  try {
    std::vector<std::string> args =
        apply_config_file(std::vector<std::string>(argv + 1, argv + argc));
    std::reverse(args.begin(), args.end());  // CLI11 consumes back to front
    app.parse(std::move(args));
  } catch (const sorbfit::invalid_input& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    app.exit(e);
    return kExitInput;
  }

  try {
    if (fit->parsed()) {
      if (gi_opt->count()) fit_opt.gamma_i = fit_gamma_i;
      if (ge_opt->count()) fit_opt.gamma_e = fit_gamma_e;
      return run_fit(fit_opt);
    }
    if (sweep->parsed()) return run_sweep_cmd(sweep_opt);
    if (sim->parsed()) return run_simulate(sim_opt);
    if (chisq->parsed()) return run_chisq(chisq_opt);
    if (surf->parsed()) {
      if (surf_gi->count()) surf_opt.gamma_i = surf_gamma_i;
      return run_surface(surf_opt);
    }
  } catch (const sorbfit::invalid_input& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const sorbfit::numeric_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitInput;
}
