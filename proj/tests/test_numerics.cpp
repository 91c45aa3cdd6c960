#include <algorithm>
#include <cmath>
#include <random>

#include <doctest.h>

#include "sorbfit/numerics.hpp"

using namespace sorbfit;

namespace {

// Trapezoid quadrature of the chi-squared density after the substitution
// x = t^2, which removes the integrable singularity at 0 for dof = 1.
double chisq_cdf_quadrature(double x, int dof, int steps = 20000) {
  const double norm = 2.0 / (std::pow(2.0, 0.5 * dof) * std::tgamma(0.5 * dof));
  const auto integrand = [&](double t) {
    return norm * std::pow(t, dof - 1) * std::exp(-0.5 * t * t);
  };
  const double upper = std::sqrt(x);
  const double h = upper / steps;
  double sum = 0.5 * (integrand(0.0) + integrand(upper));
  for (int i = 1; i < steps; ++i) sum += integrand(i * h);
  return sum * h;
}

}  // namespace

TEST_CASE("sample_normal zero-variance and validation") {
  RandomStream stream(1, 0);
  CHECK(sample_normal(stream, 2.0, 0.0) == 2.0);
  CHECK_THROWS_AS(sample_normal(stream, 2.0, -0.01), invalid_input);
  CHECK_THROWS_AS(sample_normal(stream, -1.0, 0.05), invalid_input);
}

TEST_CASE("sample_normal determinism per (seed, stream)") {
  RandomStream a(42, 7);
  RandomStream b(42, 7);
  for (int i = 0; i < 1000; ++i)
    CHECK(sample_normal(a, 1.0, 0.05) == sample_normal(b, 1.0, 0.05));

  RandomStream c(42, 8);
  RandomStream d(43, 7);
  int equal_c = 0, equal_d = 0;
  RandomStream ref(42, 7);
  for (int i = 0; i < 1000; ++i) {
    const double r = ref.normal();
    equal_c += r == c.normal();
    equal_d += r == d.normal();
  }
  CHECK(equal_c < 5);
  CHECK(equal_d < 5);
}

TEST_CASE("sample_normal law of large numbers") {
  RandomStream stream(2024, 1);
  const int draws = 100000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double v = sample_normal(stream, 1.0, 0.05);
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / draws;
  const double var = sum_sq / draws - mean * mean;
  CHECK(std::abs(mean - 1.0) < 0.001);
  CHECK(std::abs(std::sqrt(var) - 0.05) < 0.03 * 0.05);
}

TEST_CASE("streams with distinct ids are uncorrelated") {
  RandomStream a(99, 1);
  RandomStream b(99, 2);
  const int pairs = 100000;
  double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
  for (int i = 0; i < pairs; ++i) {
    const double za = a.normal();
    const double zb = b.normal();
    sa += za;
    sb += zb;
    saa += za * za;
    sbb += zb * zb;
    sab += za * zb;
  }
  const double cov = sab / pairs - (sa / pairs) * (sb / pairs);
  const double va = saa / pairs - (sa / pairs) * (sa / pairs);
  const double vb = sbb / pairs - (sb / pairs) * (sb / pairs);
  CHECK(std::abs(cov / std::sqrt(va * vb)) < 0.01);
}

TEST_CASE("percentile interpolation") {
  Eigen::ArrayXd four(4);
  four << 1, 2, 3, 4;
  CHECK(percentile(four, 0.5) == doctest::Approx(2.5).epsilon(1e-15));

  Eigen::ArrayXd one(1);
  one << 10;
  CHECK(percentile(one, 0.0) == 10);
  CHECK(percentile(one, 0.42) == 10);
  CHECK(percentile(one, 1.0) == 10);

  Eigen::ArrayXd century(100);
  for (int i = 0; i < 100; ++i) century[i] = i + 1;
  CHECK(percentile(century, 0.975) == doctest::Approx(97.525).epsilon(1e-14));

  CHECK_THROWS_AS(percentile(Eigen::ArrayXd(), 0.5), invalid_input);
  CHECK_THROWS_AS(percentile(four, -0.01), invalid_input);
  CHECK_THROWS_AS(percentile(four, 1.01), invalid_input);
}

TEST_CASE("percentile is permutation invariant") {
  std::mt19937 shuffler(5);
  Eigen::ArrayXd values(37);
  RandomStream stream(17, 0);
  for (int i = 0; i < values.size(); ++i) values[i] = stream.normal();
  for (double p : {0.0, 0.025, 0.31, 0.5, 0.77, 0.975, 1.0}) {
    const double reference = percentile(values, p);
    Eigen::ArrayXd shuffled = values;
    for (int round = 0; round < 5; ++round) {
      std::shuffle(shuffled.data(), shuffled.data() + shuffled.size(), shuffler);
      CHECK(percentile(shuffled, p) == reference);
    }
  }
}

TEST_CASE("chisq_cdf closed forms and bounds") {
  CHECK(chisq_cdf(0.0, 4) == 0.0);
  CHECK(chisq_cdf(2.0, 2) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-12));
  CHECK(chisq_cdf(2.366, 3) == doctest::Approx(0.500).epsilon(2e-4));
  CHECK(chisq_cdf(1e4, 3) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(chisq_cdf(-0.1, 3), invalid_input);
  CHECK_THROWS_AS(chisq_cdf(1.0, 0), invalid_input);
}

TEST_CASE("chisq_cdf agrees with quadrature oracle") {
  for (int dof = 1; dof <= 10; ++dof) {
    double previous = 0.0;
    for (double x : {0.25, 0.5, 1.0, 2.0, 2.366, 4.0, 7.5, 12.0, 20.0, 30.0}) {
      const double cdf = chisq_cdf(x, dof);
      CHECK(std::abs(cdf - chisq_cdf_quadrature(x, dof)) < 1e-6);
      CHECK(cdf >= previous);  // monotone in x
      previous = cdf;
    }
  }
}

TEST_CASE("chisq_quantile inverts chisq_cdf") {
  for (int dof : {1, 3, 4, 7}) {
    for (double p : {0.1, 0.25, 0.5, 0.75, 0.9, 0.99}) {
      const double q = chisq_quantile(p, dof);
      CHECK(chisq_cdf(q, dof) == doctest::Approx(p).epsilon(1e-9));
    }
  }
  CHECK(chisq_quantile(0.0, 3) == 0.0);
  CHECK_THROWS_AS(chisq_quantile(1.0, 3), invalid_input);
}

TEST_CASE("solve_scalar on simple roots") {
  CHECK(solve_scalar([](double x) { return x - 1.0; }, 0.0, 2.0) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(solve_scalar([](double x) { return x + std::sqrt(x) - 2.0; }, 0.0, 4.0) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(solve_scalar([](double x) { return x + 1.0; }, 0.0, 2.0),
                  invalid_input);
  // roots sitting exactly on a bracket endpoint
  CHECK(solve_scalar([](double x) { return x; }, 0.0, 2.0) == 0.0);
  CHECK(solve_scalar([](double x) { return x - 2.0; }, 0.0, 2.0) == 2.0);
}

TEST_CASE("solve_scalar residual at extreme curvature") {
  const auto f = [](double x) { return x + 10.0 * std::pow(x, 0.2) - 0.1; };
  const double root = solve_scalar(f, 0.0, 0.1, 1e-15);
  CHECK(root > 0.5e-10);
  CHECK(root < 2e-10);
  CHECK(std::abs(f(root)) < 1e-14);
}
