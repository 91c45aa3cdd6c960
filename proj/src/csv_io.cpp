#include "sorbfit/csv_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace sorbfit::io {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

double parse_double(const std::string& text, int line_no, const std::string& column) {
  try {
    std::size_t consumed = 0;
    const double value = std::stod(text, &consumed);
    if (consumed != text.size()) throw std::invalid_argument("trailing characters");
    return value;
  } catch (const std::exception&) {
    throw invalid_input("line " + std::to_string(line_no) + ": cannot parse " + column +
                        " value '" + text + "'");
  }
}

int parse_int(const std::string& text, int line_no, const std::string& column) {
  try {
    std::size_t consumed = 0;
    const int value = std::stoi(text, &consumed);
    if (consumed != text.size()) throw std::invalid_argument("trailing characters");
    return value;
  } catch (const std::exception&) {
    throw invalid_input("line " + std::to_string(line_no) + ": cannot parse " + column +
                        " value '" + text + "'");
  }
}

}  // namespace

std::string format_full(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::string format_sig6(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.6g", value);
  return buffer;
}

IsothermDataset read_isotherm_csv(std::istream& in, double r, double c_ref) {
  if (!(r > 0.0)) throw invalid_input("isotherm CSV: r must be positive");
  std::string line;
  if (!std::getline(in, line)) throw invalid_input("isotherm CSV: empty file");
  if (trim(line) != "level,expected_ci,measured_ci,replicate,ce")
    throw invalid_input(
        "isotherm CSV: line 1: expected header 'level,expected_ci,measured_ci,replicate,ce'");

  struct LevelRows {
    double expected = std::numeric_limits<double>::quiet_NaN();
    double measured = 0.0;
    bool seen = false;
    std::vector<double> c_e;
  };
  std::map<int, LevelRows> by_level;

  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 5)
      throw invalid_input("line " + std::to_string(line_no) + ": expected 5 fields, got " +
                          std::to_string(fields.size()));
    const int level = parse_int(fields[0], line_no, "level");
    if (level < 1)
      throw invalid_input("line " + std::to_string(line_no) + ": level must be >= 1");
    const double expected = fields[1].empty()
                                ? std::numeric_limits<double>::quiet_NaN()
                                : parse_double(fields[1], line_no, "expected_ci");
    const double measured = parse_double(fields[2], line_no, "measured_ci");
    parse_int(fields[3], line_no, "replicate");
    const double c_e = parse_double(fields[4], line_no, "ce");
    if (!(measured > 0.0))
      throw invalid_input("line " + std::to_string(line_no) +
                          ": measured_ci must be positive");
    if (!(c_e > 0.0))
      throw invalid_input("line " + std::to_string(line_no) + ": ce must be positive");

    auto& rows = by_level[level];
    if (rows.seen) {
      if (rows.measured != measured)
        throw invalid_input("line " + std::to_string(line_no) +
                            ": measured_ci differs from an earlier row of level " +
                            std::to_string(level) +
                            " (each level has a single measured c_i)");
      const bool expected_match =
          (std::isnan(rows.expected) && std::isnan(expected)) || rows.expected == expected;
      if (!expected_match)
        throw invalid_input("line " + std::to_string(line_no) +
                            ": expected_ci differs from an earlier row of level " +
                            std::to_string(level));
    } else {
      rows.expected = expected;
      rows.measured = measured;
      rows.seen = true;
    }
    rows.c_e.push_back(c_e);
  }
  if (by_level.empty()) throw invalid_input("isotherm CSV: no data rows");

  IsothermDataset dataset;
  dataset.r = r;
  dataset.c_ref = c_ref;
  int expected_level = 1;
  for (const auto& [level, rows] : by_level) {
    if (level != expected_level)
      throw invalid_input("isotherm CSV: levels must be numbered 1..L without gaps "
                          "(missing level " +
                          std::to_string(expected_level) + ")");
    ++expected_level;
    IsothermLevel out;
    out.expected_c_i = rows.expected;
    out.measured_c_i = rows.measured;
    out.replicate_c_e =
        Eigen::Map<const Eigen::ArrayXd>(rows.c_e.data(),
                                         static_cast<Eigen::Index>(rows.c_e.size()));
    dataset.levels.push_back(std::move(out));
  }
  dataset.validate();
  return dataset;
}

IsothermDataset read_isotherm_csv_file(const std::string& path, double r, double c_ref) {
  std::ifstream in(path);
  if (!in) throw invalid_input("cannot open input file '" + path + "'");
  return read_isotherm_csv(in, r, c_ref);
}

void write_isotherm_csv(std::ostream& out, const IsothermDataset& dataset) {
  out << "level,expected_ci,measured_ci,replicate,ce\n";
  for (std::size_t i = 0; i < dataset.levels.size(); ++i) {
    const auto& level = dataset.levels[i];
    for (Eigen::Index rep = 0; rep < level.replicate_c_e.size(); ++rep) {
      out << (i + 1) << ',';
      if (!std::isnan(level.expected_c_i)) out << format_full(level.expected_c_i);
      out << ',' << format_full(level.measured_c_i) << ',' << (rep + 1) << ','
          << format_full(level.replicate_c_e[rep]) << '\n';
    }
  }
}

void write_isotherm_csv_file(const std::string& path, const IsothermDataset& dataset) {
  std::ofstream out(path);
  if (!out) throw invalid_input("cannot open output file '" + path + "'");
  write_isotherm_csv(out, dataset);
}

std::string sweep_csv_header() {
  return "kf,n,rkf,true_cv_kf,true_cv_n,ratio_kf_p2_5,ratio_kf_p50,ratio_kf_p97_5,"
         "ratio_n_p2_5,ratio_n_p50,ratio_n_p97_5,rejected";
}

std::string sweep_csv_row(const SystemPopulation& pop) {
  std::string row = format_full(pop.k_f);
  for (double v : {pop.n, pop.r_kf, pop.true_cv_kf, pop.true_cv_n, pop.ratio_kf_p2_5,
                   pop.ratio_kf_p50, pop.ratio_kf_p97_5, pop.ratio_n_p2_5,
                   pop.ratio_n_p50, pop.ratio_n_p97_5})
    row += ',' + format_full(v);
  row += ',' + std::to_string(pop.rejected_rep_count);
  return row;
}

std::string surface_csv_header() { return "delta,n,curvature,sigma_ratio"; }

std::string surface_csv_row(const WeightSurfaceRow& row) {
  return format_full(row.delta) + ',' + format_full(row.n) + ',' +
         format_full(row.curvature) + ',' + format_full(row.sigma_ratio);
}

std::string chisq_csv_header() { return "percentile,simulated,theoretical"; }

std::string chisq_csv_row(const ChisqValidationRow& row) {
  return format_full(row.percentile) + ',' + format_full(row.simulated) + ',' +
         format_full(row.theoretical);
}

FitMethodChoice fit_method_from_string(const std::string& name) {
  if (name == "wls-apriori") return FitMethodChoice::kWlsApriori;
  if (name == "wls-estimated") return FitMethodChoice::kWlsEstimated;
  if (name == "uls") return FitMethodChoice::kUls;
  if (name == "wls-relative") return FitMethodChoice::kWlsRelative;
  throw invalid_input("unknown fit method '" + name +
                      "' (expected wls-apriori, wls-estimated, uls or wls-relative)");
}

std::string to_string(FitMethodChoice method) {
  switch (method) {
    case FitMethodChoice::kWlsApriori: return "wls-apriori";
    case FitMethodChoice::kWlsEstimated: return "wls-estimated";
    case FitMethodChoice::kUls: return "uls";
    case FitMethodChoice::kWlsRelative: return "wls-relative";
  }
  return "unknown";
}

FitReport fit_dataset(const IsothermDataset& dataset, const FitRequest& request) {
  dataset.validate();
  const LevelPoints pts = prepare_points(dataset);
  const auto level_count = static_cast<Eigen::Index>(dataset.levels.size());
  const FitResult first_fit = fit_uls_posterior(pts.x, pts.y, dataset.c_ref);

  Eigen::ArrayXd delta(level_count);
  for (Eigen::Index i = 0; i < level_count; ++i)
    delta[i] = estimate_delta(dataset.levels[static_cast<std::size_t>(i)]);

  const auto require_positive_delta = [&]() {
    for (Eigen::Index i = 0; i < level_count; ++i)
      if (!(delta[i] > 0.0))
        throw invalid_input("level " + std::to_string(i + 1) +
                            ": measured fractional decrease is not positive; the weight "
                            "model requires delta > 0 (exclude non-sorbing points)");
  };

  FitReport report;
  const int u = dataset.replicate_count();

  switch (request.method) {
    case FitMethodChoice::kUls:
      report.error_model =
          build_error_model(delta, first_fit.n, 0.0, 0.0, u, WeightSource::kUnit);
      report.fit = first_fit;
      break;
    case FitMethodChoice::kWlsApriori:
    case FitMethodChoice::kWlsRelative: {
      if (!request.gamma_i || !request.gamma_e)
        throw invalid_input(std::string(to_string(request.method)) +
                            " requires --gamma-i and --gamma-e");
      require_positive_delta();
      const bool relative = request.method == FitMethodChoice::kWlsRelative;
      report.error_model = build_error_model(
          delta, first_fit.n, *request.gamma_i, *request.gamma_e, u,
          relative ? WeightSource::kRelativeScaled : WeightSource::kTrueParameters);
      const Eigen::ArrayXd& sigma = report.error_model.sigma_eps;
      if (!relative)
        report.fit = fit_line_or_exact(pts.x, pts.y, sigma, dataset.c_ref,
                                       FitMethod::kWlsAprioriTrue);
      else if ((sigma == 0.0).all())
        report.fit = fit_line_or_exact(pts.x, pts.y, sigma, dataset.c_ref,
                                       FitMethod::kWlsRelativePosterior);
      else
        report.fit = fit_relative_posterior(pts.x, pts.y, sigma, dataset.c_ref);
      break;
    }
    case FitMethodChoice::kWlsEstimated: {
      const EstimatedErrorParams est = estimate_error_params(dataset);
      require_positive_delta();
      report.error_model = build_error_model(delta, first_fit.n, est.gamma_i,
                                             est.gamma_e, u,
                                             WeightSource::kEstimatedFromData);
      report.fit = fit_line_or_exact(pts.x, pts.y, report.error_model.sigma_eps,
                                     dataset.c_ref, FitMethod::kWlsAprioriEstimated);
      break;
    }
  }

  for (Eigen::Index i = 0; i < level_count; ++i) {
    LevelDiagnostics diag;
    diag.level = static_cast<int>(i + 1);
    diag.c_e_avg = dataset.levels[static_cast<std::size_t>(i)].replicate_c_e.mean();
    diag.x = pts.x[i];
    diag.y = pts.y[i];
    diag.delta = delta[i];
    diag.sigma = report.error_model.sigma_eps[i];
    diag.residual = pts.y[i] - report.fit.a - report.fit.n * pts.x[i];
    report.levels.push_back(diag);
    if (delta[i] < 0.30)
      report.warnings.push_back(
          "level " + std::to_string(i + 1) + ": fractional decrease " +
          format_sig6(delta[i]) +
          " is below 30%; parameter estimates from such points are inaccurate");
  }
  if (auto w = cv_range_warning(report.error_model.gamma_i, "gamma_i"))
    report.warnings.push_back(*w);
  if (auto w = cv_range_warning(report.error_model.gamma_e, "gamma_e"))
    report.warnings.push_back(*w);
  return report;
}

std::string render_report(const FitReport& report) {
  std::ostringstream out;
  const FitResult& fit = report.fit;
  out << "method:        " << sorbfit::to_string(fit.method) << '\n'
      << "levels:        " << report.levels.size() << "   dof: " << fit.dof << '\n'
      << "K_F:           " << format_sig6(fit.k_f) << " L/kg   sigma: "
      << format_sig6(fit.sigma_kf) << "   cv: " << format_sig6(100.0 * fit.cv_kf) << "%\n"
      << "N:             " << format_sig6(fit.n) << "   sigma: " << format_sig6(fit.sigma_n)
      << "   cv: " << format_sig6(100.0 * fit.cv_n) << "%\n"
      << "a (intercept): " << format_sig6(fit.a) << "   sigma: " << format_sig6(fit.sigma_a)
      << '\n'
      << "chi2:          " << format_sig6(fit.chi2) << "   scale_factor: "
      << format_sig6(fit.scale_factor) << '\n';
  out << "gamma_i:       " << format_sig6(report.error_model.gamma_i) << "   gamma_e: "
      << format_sig6(report.error_model.gamma_e) << "   weights: "
      << sorbfit::to_string(report.error_model.source) << '\n';
  out << "level   ce_avg        x            y            delta        sigma        residual\n";
  for (const auto& diag : report.levels) {
    char line[200];
    std::snprintf(line, sizeof(line), "%-7d %-13.6g %-12.6g %-12.6g %-12.6g %-12.6g %-.6g\n",
                  diag.level, diag.c_e_avg, diag.x, diag.y, diag.delta, diag.sigma,
                  diag.residual);
    out << line;
  }
  for (const auto& warning : report.warnings) out << "warning: " << warning << '\n';
  return out.str();
}

}  // namespace sorbfit::io
