#pragma once

// Monte Carlo cross-check of the transform formula. Paths follow a
// full-truncation Euler scheme on the canonical space: the I-coordinates are
// clipped at zero inside every coefficient evaluation and in the reported
// values. Jumps come from finite-activity measures as compound Poisson
// arrivals with the intensity frozen at the left endpoint of each step.

#include "affine/pricing.hpp"
#include "affine/state_space.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace affine::mc {

struct SimOptions {
  int n_steps = 200;
  long n_paths = 100'000;
  std::uint64_t seed = 1;
  /// 0 picks AFFINE_MOMENTS_THREADS, else the hardware concurrency.
  int threads = 0;
  /// Paths per independently seeded block. Results do not depend on the
  /// thread count, only on (seed, block_size).
  long block_size = 4096;
  /// Accumulate int_0^T L(X_s) ds along each path.
  std::optional<ShortRateSpec> rate;
  /// Times at which to record X_t, rounded to the nearest grid point.
  std::vector<double> snapshot_times;
};

struct PathEnsemble {
  /// One column per path.
  Mat terminal;
  /// -int_0^T L(X_s) ds per path (left-point rule); zero without a rate.
  Vec log_discount;
  /// Number of jumps per path.
  std::vector<int> jump_counts;
  /// Grid times actually used for the requested snapshots, and the states there.
  std::vector<double> snapshot_times;
  std::vector<Mat> snapshots;
  long n_paths = 0;
  int n_steps = 0;
  double horizon = 0.0;
  std::uint64_t seed = 0;
  std::string scheme = "full-truncation Euler";
  std::string bias_note =
      "full truncation biases square-root coordinates upward by O(dt); "
      "jump intensities are frozen at the left endpoint";
};

/// Throws UnsupportedError for the matrix cone and for NumericDensity jumps.
PathEnsemble simulate(const AffineParams& params, const Vec& x, double T, const SimOptions& opts);

struct MGFEstimate {
  double estimate;
  double std_error;
  /// The largest 0.1% of the samples carry more than 20% of the mean.
  bool heavy_tail;
};

MGFEstimate empirical_mgf(const PathEnsemble& ens, const Vec& y);

struct CFEstimate {
  Complex estimate;
  double se_re;
  double se_im;
};

CFEstimate empirical_cf(const PathEnsemble& ens, const CVec& u);

struct Estimate {
  double estimate;
  double std_error;
};

/// Sample mean of exp(log_discount) * payoff(X_T).
Estimate discounted_expectation(const PathEnsemble& ens, const std::function<double(const Vec&)>& payoff);

/// Sample mean of f(X_t) at snapshot k.
Estimate snapshot_expectation(const PathEnsemble& ens, std::size_t k, const std::function<double(const Vec&)>& f);

struct ComparisonReport {
  bool skipped = false;
  std::string reason;
  Complex analytic;
  Complex empirical;
  double se_re = 0.0;
  double se_im = 0.0;
  double z_re = 0.0;
  double z_im = 0.0;
  /// Estimate from the rerun with half the step size, same seed.
  Complex half_step;
  /// |half_step - empirical|, a proxy for the discretization bias.
  double bias_estimate = 0.0;
  bool heavy_tail = false;

  double max_abs_z() const { return std::max(std::abs(z_re), std::abs(z_im)); }
};

/// |analytic - empirical| / std_error per component. A real u compares the
/// moment, a complex u the characteristic function; a non-finite analytic
/// verdict skips the comparison.
ComparisonReport compare(const AffineParams& params, const Vec& x, const CVec& u, double T, const SimOptions& opts);

/// Worker count from AFFINE_MOMENTS_THREADS, else the hardware concurrency.
int default_threads();

}  // namespace affine::mc
