#include <cmath>

#include <doctest.h>

#include "sorbfit/numerics.hpp"
#include "sorbfit/regress.hpp"

using namespace sorbfit;

namespace {

const double kLn10 = std::log(10.0);

Eigen::ArrayXd make(std::initializer_list<double> values) {
  Eigen::ArrayXd out(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double v : values) out[i++] = v;
  return out;
}

// Independent 2x2 normal-equations solve (Cramer's rule) for the
// weighted straight line.
void oracle_fit(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y,
                const Eigen::ArrayXd& sigma, double& a, double& b) {
  double s = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double w = 1.0 / (sigma[i] * sigma[i]);
    s += w;
    sx += w * x[i];
    sy += w * y[i];
    sxx += w * x[i] * x[i];
    sxy += w * x[i] * y[i];
  }
  const double det = s * sxx - sx * sx;
  a = (sxx * sy - sx * sxy) / det;
  b = (s * sxy - sx * sy) / det;
}

}  // namespace

TEST_CASE("fit_line recovers an exact line") {
  const auto x = make({-1.0, 0.0, 1.0, 2.0});
  const Eigen::ArrayXd y = 2.0 + 0.5 * x;
  const auto sigma = make({0.3, 0.3, 0.3, 0.3});
  const FitResult fit = fit_line(x, y, sigma);
  CHECK(fit.a == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit.n == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(fit.chi2 < 1e-24);
  CHECK(fit.scale_factor == 1.0);
  CHECK(fit.dof == 2);
}

TEST_CASE("fit_line closed-form slope variance") {
  const FitResult fit = fit_line(make({-1, 0, 1}), make({1, 2, 3}), make({1, 1, 1}));
  CHECK(fit.a == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit.n == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.sigma_n == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("fit_line matches the normal-equations oracle") {
  const auto x = make({0, 1, 2});
  const auto y = make({0, 1, 1});
  const auto sigma = make({0.5, 1, 1});
  const FitResult fit = fit_line(x, y, sigma);
  double a = 0, b = 0;
  oracle_fit(x, y, sigma, a, b);
  CHECK(fit.a == doctest::Approx(a).epsilon(1e-12));
  CHECK(fit.n == doctest::Approx(b).epsilon(1e-12));

  RandomStream stream(7, 0);
  for (int round = 0; round < 25; ++round) {
    const int count = 3 + (round % 5);
    Eigen::ArrayXd rx(count), ry(count), rs(count);
    for (int i = 0; i < count; ++i) {
      rx[i] = 2.0 * stream.normal();
      ry[i] = 1.0 + 0.5 * rx[i] + 0.3 * stream.normal();
      rs[i] = 0.2 + std::abs(stream.normal());
    }
    const FitResult rfit = fit_line(rx, ry, rs);
    oracle_fit(rx, ry, rs, a, b);
    CHECK(rfit.a == doctest::Approx(a).epsilon(1e-11));
    CHECK(rfit.n == doctest::Approx(b).epsilon(1e-11));
  }
}

TEST_CASE("coefficients invariant under common sigma scaling") {
  const auto x = make({0.0, 0.7, 1.3, 2.1, 3.0});
  const auto y = make({0.1, 0.9, 1.2, 2.4, 2.8});
  const auto sigma = make({0.2, 0.5, 0.3, 0.8, 0.4});
  const FitResult base = fit_line(x, y, sigma);
  const FitResult scaled = fit_line(x, y, 7.5 * sigma);
  CHECK(scaled.a == doctest::Approx(base.a).epsilon(1e-13));
  CHECK(scaled.n == doctest::Approx(base.n).epsilon(1e-13));
  CHECK(scaled.sigma_a == doctest::Approx(7.5 * base.sigma_a).epsilon(1e-12));
  CHECK(scaled.sigma_n == doctest::Approx(7.5 * base.sigma_n).epsilon(1e-12));
}

TEST_CASE("equal sigmas reproduce the unweighted closed form") {
  const auto x = make({0.0, 1.0, 2.0, 3.0});
  const auto y = make({1.1, 1.9, 3.2, 3.8});
  const FitResult fit = fit_line(x, y, make({2, 2, 2, 2}));
  // unweighted closed form
  const double xm = x.mean(), ym = y.mean();
  const double b = ((x - xm) * (y - ym)).sum() / (x - xm).square().sum();
  const double a = ym - b * xm;
  CHECK(fit.a == doctest::Approx(a).epsilon(1e-13));
  CHECK(fit.n == doctest::Approx(b).epsilon(1e-13));
}

TEST_CASE("chi2 is locally minimal at the fit") {
  const auto x = make({0.0, 0.7, 1.3, 2.1, 3.0});
  const auto y = make({0.1, 0.9, 1.2, 2.4, 2.8});
  const auto sigma = make({0.2, 0.5, 0.3, 0.8, 0.4});
  const FitResult fit = fit_line(x, y, sigma);
  const double at_min = chi2_merit(x, y, sigma, fit.a, fit.n);
  CHECK(at_min == doctest::Approx(fit.chi2).epsilon(1e-12));
  const double h = 1e-6;
  for (double da : {-h, 0.0, h})
    for (double dn : {-h, 0.0, h})
      CHECK(chi2_merit(x, y, sigma, fit.a + da, fit.n + dn) >= at_min - 1e-15);
}

TEST_CASE("kf uncertainty follows from the intercept") {
  const auto x = make({-1.0, -0.3, 0.4, 1.2});
  const auto y = make({-0.8, -0.2, 0.5, 1.0});
  const auto sigma = make({0.05, 0.08, 0.02, 0.07});
  for (double c_ref : {1.0, 2.5}) {
    const FitResult fit = fit_line(x, y, sigma, c_ref);
    CHECK(fit.k_f == doctest::Approx(std::pow(10.0, fit.a) / c_ref).epsilon(1e-13));
    CHECK(fit.cv_kf == doctest::Approx(kLn10 * fit.sigma_a).epsilon(1e-13));
    CHECK(fit.sigma_kf == doctest::Approx(fit.cv_kf * fit.k_f).epsilon(1e-13));
    CHECK(fit.cv_n == doctest::Approx(fit.sigma_n / fit.n).epsilon(1e-13));
  }
}

TEST_CASE("fit_uls_posterior") {
  const auto x = make({-1.0, 0.0, 1.0});
  const Eigen::ArrayXd exact = 2.0 + 0.5 * x;
  const FitResult perfect = fit_uls_posterior(x, exact);
  CHECK(perfect.scale_factor < 1e-24);
  CHECK(perfect.cv_kf < 1e-10);
  CHECK(perfect.cv_n < 1e-10);
  CHECK(perfect.method == FitMethod::kUlsPosterior);

  RandomStream stream(11, 0);
  for (int round = 0; round < 10; ++round) {
    Eigen::ArrayXd rx(5), ry(5);
    for (int i = 0; i < 5; ++i) {
      rx[i] = i * 0.5;
      ry[i] = 0.3 + 0.9 * rx[i] + 0.2 * stream.normal();
    }
    const FitResult uls = fit_uls_posterior(rx, ry);
    const FitResult apriori = fit_line(rx, ry, Eigen::ArrayXd::Ones(5));
    // the posterior factor is the reduced residual sum of squares
    double rss = 0.0;
    for (int i = 0; i < 5; ++i) {
      const double resid = ry[i] - uls.a - uls.n * rx[i];
      rss += resid * resid;
    }
    CHECK(uls.scale_factor == doctest::Approx(rss / 3.0).epsilon(1e-12));
    CHECK(uls.sigma_n * uls.sigma_n ==
          doctest::Approx(apriori.sigma_n * apriori.sigma_n * uls.scale_factor)
              .epsilon(1e-12));
    CHECK(uls.sigma_a * uls.sigma_a ==
          doctest::Approx(apriori.sigma_a * apriori.sigma_a * uls.scale_factor)
              .epsilon(1e-12));
  }
}

TEST_CASE("fit_relative_posterior absorbs the weight scale") {
  const auto x = make({0.0, 0.7, 1.3, 2.1, 3.0});
  const auto y = make({0.1, 0.9, 1.2, 2.4, 2.8});
  const auto sigma = make({0.2, 0.5, 0.3, 0.8, 0.4});

  const FitResult perfect = fit_relative_posterior(x, Eigen::ArrayXd(2.0 + 0.5 * x), sigma);
  CHECK(perfect.scale_factor < 1e-20);

  const FitResult base = fit_relative_posterior(x, y, sigma);
  const FitResult rescaled = fit_relative_posterior(x, y, 0.1 * sigma);
  CHECK(rescaled.a == doctest::Approx(base.a).epsilon(1e-13));
  CHECK(rescaled.n == doctest::Approx(base.n).epsilon(1e-13));
  CHECK(rescaled.sigma_a == doctest::Approx(base.sigma_a).epsilon(1e-12));
  CHECK(rescaled.sigma_n == doctest::Approx(base.sigma_n).epsilon(1e-12));
  CHECK(rescaled.sigma_kf == doctest::Approx(base.sigma_kf).epsilon(1e-12));

  // the factor itself is the reduced weighted residual sum of squares
  double wrss = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double resid = (y[i] - base.a - base.n * x[i]) / sigma[i];
    wrss += resid * resid;
  }
  CHECK(base.scale_factor == doctest::Approx(wrss / 3.0).epsilon(1e-12));
}

TEST_CASE("chi2_merit") {
  const auto x = make({0.0, 1.0});
  CHECK(chi2_merit(x, Eigen::ArrayXd(1.0 + 2.0 * x), make({1, 1}), 1.0, 2.0) == 0.0);
  CHECK(chi2_merit(x, make({2.0, 2.0}), make({1, 1}), 1.0, 2.0) ==
        doctest::Approx(2.0).epsilon(1e-15));

  RandomStream stream(13, 0);
  Eigen::ArrayXd rx(8), ry(8), rs(8);
  for (int i = 0; i < 8; ++i) {
    rx[i] = stream.normal();
    ry[i] = stream.normal();
    rs[i] = 0.5 + std::abs(stream.normal());
  }
  double naive = 0.0;
  for (int i = 0; i < 8; ++i) {
    const double q = (ry[i] - 0.4 - 1.7 * rx[i]) / rs[i];
    naive += q * q;
  }
  CHECK(chi2_merit(rx, ry, rs, 0.4, 1.7) == doctest::Approx(naive).epsilon(1e-14));
}

TEST_CASE("fit error paths") {
  CHECK_THROWS_AS(fit_line(make({0, 1}), make({0, 1}), make({1, 1})),
                  insufficient_data);
  CHECK_THROWS_AS(fit_line(make({2, 2, 2}), make({0, 1, 2}), make({1, 1, 1})),
                  degenerate_design);
  CHECK_THROWS_AS(fit_line(make({0, 1, 2}), make({0, 1, 2}), make({1, 0, 1})),
                  invalid_input);
  CHECK_THROWS_AS(fit_line(make({0, 1, 2}), make({0, 1}), make({1, 1, 1})),
                  invalid_input);
}
