#pragma once

#include <cmath>
#include <cstdint>

#include <Eigen/Core>

#include "sorbfit/errors.hpp"

namespace sorbfit {

/// Deterministic random stream (PCG32 with an explicit stream selector).
///
/// The same (seed, stream_id) always reproduces the same sequence, and
/// distinct stream_ids give statistically independent sequences, so
/// simulation sweeps can derive one stream per (system, replicate) and
/// stay reproducible under any parallel schedule.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /// Uniform draw in the open interval (0, 1).
  double uniform();

  /// Standard normal draw (Box-Muller; the spare deviate is cached).
  double normal();

 private:
  std::uint32_t next_u32();

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t state_;
  std::uint64_t inc_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// One draw from a normal distribution parameterized by mean and
/// coefficient of variation: mean * (1 + cv * z).
double sample_normal(RandomStream& stream, double mean, double cv);

/// Percentile by linear interpolation between order statistics at rank
/// h = (n - 1) * p. The input is copied and sorted.
double percentile(Eigen::ArrayXd values, double p);

/// Lower CDF of the chi-squared distribution with `dof` degrees of
/// freedom: the regularized lower incomplete gamma P(dof/2, x/2).
double chisq_cdf(double x, int dof);

/// Inverse of chisq_cdf in x, for p in [0, 1).
double chisq_quantile(double p, int dof);

/// Bracketed bisection for a continuous monotone f with a sign change on
/// [lo, hi]. Converges to relative interval width rel_tol (or to machine
/// precision if that is reached first); throws convergence_error past
/// 200 iterations and invalid_input when the bracket has no sign change.
template <typename F>
double solve_scalar(F&& f, double lo, double hi, double rel_tol = 1e-12) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo < 0.0) == (fhi < 0.0))
    throw invalid_input("solve_scalar: no sign change on the bracket");

  constexpr int kMaxIter = 200;
  for (int it = 0; it < kMaxIter; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) return mid;  // bracket is machine-tight
    const double fmid = f(mid);
    if (fmid == 0.0) return mid;
    if ((fmid < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
    if (hi - lo <= rel_tol * std::abs(mid)) return 0.5 * (lo + hi);
  }
  throw convergence_error("solve_scalar: iteration cap exceeded");
}

}  // namespace sorbfit
