#include "sorbfit/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sorbfit {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), state_(0), inc_((stream_id << 1u) | 1u) {
  next_u32();
  state_ += seed;
  next_u32();
}

std::uint32_t RandomStream::next_u32() {
  const std::uint64_t old = state_;
  state_ = old * 6364136223846793005ULL + inc_;
  const auto xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
  const auto rot = static_cast<std::uint32_t>(old >> 59u);
  return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
}

double RandomStream::uniform() {
  // (x + 0.5) / 2^32 stays strictly inside (0, 1), so log() below is safe.
  return (static_cast<double>(next_u32()) + 0.5) * 0x1p-32;
}

double RandomStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  spare_ = radius * std::sin(kTwoPi * u2);
  has_spare_ = true;
  return radius * std::cos(kTwoPi * u2);
}

double sample_normal(RandomStream& stream, double mean, double cv) {
  if (cv < 0.0) throw invalid_input("sample_normal: cv must be nonnegative");
  if (cv == 0.0) return mean;
  if (mean <= 0.0)
    throw invalid_input("sample_normal: CV parameterization requires positive mean");
  return mean * (1.0 + cv * stream.normal());
}

double percentile(Eigen::ArrayXd values, double p) {
  if (values.size() == 0) throw invalid_input("percentile: empty input");
  if (p < 0.0 || p > 1.0) throw invalid_input("percentile: p outside [0, 1]");
  std::sort(values.data(), values.data() + values.size());
  const double h = static_cast<double>(values.size() - 1) * p;
  const auto lo = static_cast<Eigen::Index>(h);
  if (lo + 1 >= values.size()) return values[values.size() - 1];
  const double frac = h - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

namespace {

// Regularized lower incomplete gamma P(a, x): series for x < a + 1,
// continued fraction (modified Lentz) for the complement otherwise.
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-16)
      return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  throw convergence_error("chisq_cdf: series did not converge");
}

double gamma_q_contfrac(double a, double x) {
  constexpr double tiny = std::numeric_limits<double>::min() / 1e-30;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16)
      return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  throw convergence_error("chisq_cdf: continued fraction did not converge");
}

double gamma_p(double a, double x) {
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_contfrac(a, x);
}

}  // namespace

double chisq_cdf(double x, int dof) {
  if (dof < 1) throw invalid_input("chisq_cdf: dof must be positive");
  if (x < 0.0) throw invalid_input("chisq_cdf: x must be nonnegative");
  return gamma_p(0.5 * dof, 0.5 * x);
}

double chisq_quantile(double p, int dof) {
  if (dof < 1) throw invalid_input("chisq_quantile: dof must be positive");
  if (p < 0.0 || p >= 1.0) throw invalid_input("chisq_quantile: p outside [0, 1)");
  if (p == 0.0) return 0.0;
  double hi = 2.0 * dof + 10.0;
  while (chisq_cdf(hi, dof) < p) hi *= 2.0;
  return solve_scalar([&](double x) { return chisq_cdf(x, dof) - p; }, 0.0, hi, 1e-13);
}

}  // namespace sorbfit
