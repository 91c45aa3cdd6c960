#include <cmath>

#include <doctest.h>

#include "sorbfit/errors_est.hpp"
#include "sorbfit/isotherm.hpp"
#include "sorbfit/simkit.hpp"

using namespace sorbfit;

namespace {

IsothermLevel level(double expected, double measured, std::initializer_list<double> c_e) {
  IsothermLevel out;
  out.expected_c_i = expected;
  out.measured_c_i = measured;
  out.replicate_c_e.resize(static_cast<Eigen::Index>(c_e.size()));
  Eigen::Index i = 0;
  for (double v : c_e) out.replicate_c_e[i++] = v;
  return out;
}

}  // namespace

TEST_CASE("estimate_delta") {
  CHECK(estimate_delta(level(1.0, 1.0, {0.5, 0.4, 0.6})) ==
        doctest::Approx(0.5).epsilon(1e-14));
  CHECK(estimate_delta(level(1.0, 1.0, {1.0, 1.0, 1.0})) == 0.0);
  CHECK(estimate_delta(level(2.0, 2.0, {0.2})) == doctest::Approx(0.9).epsilon(1e-14));
  // negative decreases are allowed here; the weight model rejects them later
  CHECK(estimate_delta(level(1.0, 1.0, {1.2, 1.3})) < 0.0);
}

TEST_CASE("estimate_gamma_e") {
  IsothermDataset one;
  one.r = 1.0;
  one.levels = {level(1.0, 2.0, {0.95, 1.00, 1.05})};
  CHECK(estimate_gamma_e(one) == doctest::Approx(0.05).epsilon(1e-12));

  IsothermDataset flat;
  flat.r = 1.0;
  flat.levels = {level(1.0, 2.0, {0.5, 0.5, 0.5}), level(2.0, 4.0, {1.5, 1.5, 1.5})};
  CHECK(estimate_gamma_e(flat) == 0.0);

  // two levels with per-level squared CVs 0.0025 and 0.0009
  IsothermDataset two;
  two.r = 1.0;
  two.levels = {level(1.0, 2.0, {0.95, 1.00, 1.05}), level(2.0, 4.0, {0.97, 1.00, 1.03})};
  CHECK(estimate_gamma_e(two) ==
        doctest::Approx(std::sqrt(0.0017)).epsilon(1e-12));
  CHECK(estimate_gamma_e(two) == doctest::Approx(0.041231).epsilon(1e-4));

  IsothermDataset single_rep;
  single_rep.r = 1.0;
  single_rep.levels = {level(1.0, 2.0, {0.5}), level(2.0, 4.0, {1.0})};
  CHECK_THROWS_AS(estimate_gamma_e(single_rep), insufficient_data);
}

TEST_CASE("estimate_gamma_i worked example") {
  IsothermDataset data;
  data.r = 1.0;
  data.levels = {level(1.0, 0.94, {0.4, 0.5}), level(10.0, 9.8, {4.0, 5.0})};
  // quotients 0.94 and 0.98, mean 0.96; revised 0.9791667 and 1.0208333;
  // sample standard deviation = 0.0208333 * sqrt(2)
  const double exact = (0.98 / 0.96 - 0.94 / 0.96) / 2.0 * std::sqrt(2.0);
  CHECK(estimate_gamma_i(data) == doctest::Approx(exact).epsilon(1e-12));
  CHECK(estimate_gamma_i(data) == doctest::Approx(0.0294628).epsilon(1e-4));
}

TEST_CASE("estimate_gamma_i bias removal and edge cases") {
  IsothermDataset data;
  data.r = 1.0;
  data.levels = {level(1.0, 1.0, {0.5, 0.6}), level(3.2, 3.2, {1.5, 1.6}),
                 level(10.0, 10.0, {4.0, 4.1})};
  CHECK(estimate_gamma_i(data) == 0.0);

  // a common multiplicative bias cancels exactly
  IsothermDataset biased = data;
  for (auto& lvl : biased.levels) lvl.measured_c_i = 0.97 * lvl.expected_c_i;
  CHECK(estimate_gamma_i(biased) < 1e-15);

  IsothermDataset scaled = data;
  scaled.levels[0].measured_c_i = 0.95;
  scaled.levels[1].measured_c_i = 3.3;
  scaled.levels[2].measured_c_i = 9.7;
  const double reference = estimate_gamma_i(scaled);
  for (auto& lvl : scaled.levels) lvl.measured_c_i *= 1.7;
  CHECK(estimate_gamma_i(scaled) == doctest::Approx(reference).epsilon(1e-12));

  IsothermDataset one_level;
  one_level.r = 1.0;
  one_level.levels = {level(1.0, 1.0, {0.5, 0.6})};
  CHECK_THROWS_AS(estimate_gamma_i(one_level), insufficient_data);

  IsothermDataset no_expected;
  no_expected.r = 1.0;
  no_expected.levels = {level(1.0, 1.0, {0.5, 0.6}), level(10.0, 9.8, {4.0, 5.0})};
  no_expected.levels[1].expected_c_i = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(estimate_gamma_i(no_expected), invalid_input);
}

TEST_CASE("noise-free estimates recover the true fractional decrease") {
  SorptionSystem system;
  system.params = {2.0, 0.6, 1.0};
  system.r = 1.0;
  system.c_i_levels.resize(5);
  system.c_i_levels << 0.1, 0.32, 1.0, 3.2, 10.0;
  system.u = 3;
  system.gamma_i = 0.0;
  system.gamma_e = 0.0;

  RandomStream stream(1, 0);
  const IsothermDataset data = generate_isotherm(system, stream);
  for (Eigen::Index i = 0; i < system.c_i_levels.size(); ++i) {
    const double c_e = solve_equilibrium(system.params, system.r, system.c_i_levels[i]);
    const double truth = fractional_decrease(system.c_i_levels[i], c_e);
    CHECK(estimate_delta(data.levels[static_cast<std::size_t>(i)]) ==
          doctest::Approx(truth).epsilon(1e-10));
  }
}

TEST_CASE("dataset validation") {
  IsothermDataset data;
  data.r = 1.0;
  data.levels = {level(1.0, 1.0, {0.5, 0.6}), level(10.0, 9.8, {4.0})};
  CHECK_THROWS_AS(data.validate(), invalid_input);  // ragged replicates

  data.levels[1] = level(10.0, -9.8, {4.0, 5.0});
  CHECK_THROWS_AS(data.validate(), invalid_input);  // nonpositive measured c_i

  data.levels[1] = level(10.0, 9.8, {4.0, -5.0});
  CHECK_THROWS_AS(data.validate(), invalid_input);  // nonpositive c_e
}
