#include "arraycalib/evaluation.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace arraycalib {

AlignedResult procrustes_align(const PointSet& estimate,
                               const PointSet& truth) {
  if (estimate.dim() != truth.dim() || estimate.m != truth.m ||
      estimate.k != truth.k)
    throw InvalidInputError("procrustes: estimate/truth shape mismatch");

  const Eigen::VectorXd mean_est = estimate.coords.rowwise().mean();
  const Eigen::VectorXd mean_tru = truth.coords.rowwise().mean();
  const Eigen::MatrixXd est_c = estimate.coords.colwise() - mean_est;
  const Eigen::MatrixXd tru_c = truth.coords.colwise() - mean_tru;

  // Q = U V^T from the SVD of the cross-covariance; no determinant
  // correction, reflections are a valid alignment here.
  const Eigen::MatrixXd cov = tru_c * est_c.transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::MatrixXd q = svd.matrixU() * svd.matrixV().transpose();

  AlignedResult out;
  out.rotation = q;
  out.translation = mean_tru - q * mean_est;
  out.aligned = estimate;
  out.aligned.coords = (q * estimate.coords).colwise() + out.translation;
  std::tie(out.e_rs, out.e_r) = localization_error(out.aligned, truth);
  out.e_rs_below_floor = out.e_rs < kErrorClipFloor;
  out.e_r_below_floor = out.e_r < kErrorClipFloor;
  return out;
}

std::pair<double, double> localization_error(const PointSet& aligned,
                                             const PointSet& truth) {
  if (aligned.dim() != truth.dim() || aligned.m != truth.m ||
      aligned.k != truth.k)
    throw InvalidInputError("localization_error: shape mismatch");
  const Eigen::VectorXd per_point =
      (aligned.coords - truth.coords).colwise().norm();
  const double e_rs = per_point.mean();
  const double e_r = per_point.head(aligned.m).mean();
  return {e_rs, e_r};
}

double interpolated_quantile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw InvalidInputError("quantile of empty sample");
  if (sorted.size() == 1) return sorted.front();
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

namespace {

// Exact-binomial confidence interval for the median: the widest-needed
// symmetric pair of order statistics (x_(j), x_(n+1-j)) whose coverage
// P(j <= Bin(n, 1/2) <= n - j) reaches 95%. Returns false when even the
// full range falls short (tiny samples).
bool median_ci_indices(int n, int& lo_idx, int& hi_idx) {
  // Binomial(n, 1/2) pmf via incremental ratios; n is a trial count, so
  // magnitudes stay benign.
  std::vector<double> pmf(static_cast<std::size_t>(n) + 1);
  pmf[0] = std::pow(0.5, n);
  for (int i = 1; i <= n; ++i)
    pmf[static_cast<std::size_t>(i)] =
        pmf[static_cast<std::size_t>(i - 1)] *
        static_cast<double>(n - i + 1) / static_cast<double>(i);
  for (int j = n / 2; j >= 1; --j) {
    double coverage = 0.0;
    for (int i = j; i <= n - j; ++i)
      coverage += pmf[static_cast<std::size_t>(i)];
    if (coverage >= 0.95) {
      lo_idx = j - 1;      // zero-based order statistic x_(j)
      hi_idx = n - j;      // x_(n + 1 - j)
      return true;
    }
  }
  lo_idx = 0;
  hi_idx = n - 1;
  return false;
}

}  // namespace

SweepSummary sweep_statistics(std::vector<double> errors, double clip_floor) {
  if (errors.empty())
    throw InvalidInputError("sweep_statistics: empty error list");
  for (double& e : errors) e = std::max(e, clip_floor);
  std::sort(errors.begin(), errors.end());

  SweepSummary s;
  s.n = static_cast<int>(errors.size());
  s.median = interpolated_quantile(errors, 0.5);
  s.q1 = interpolated_quantile(errors, 0.25);
  s.q3 = interpolated_quantile(errors, 0.75);

  const double iqr = s.q3 - s.q1;
  const double fence_lo = s.q1 - 1.5 * iqr;
  const double fence_hi = s.q3 + 1.5 * iqr;
  s.whisker_lo = errors.back();
  s.whisker_hi = errors.front();
  for (double e : errors) {
    if (e >= fence_lo && e < s.whisker_lo) s.whisker_lo = e;
    if (e <= fence_hi && e > s.whisker_hi) s.whisker_hi = e;
    if (e < fence_lo || e > fence_hi) s.outliers.push_back(e);
  }

  if (s.n == 1) {
    s.ci_lo = s.ci_hi = errors.front();
    s.ci_degenerate = true;
  } else {
    int lo_idx = 0, hi_idx = 0;
    const bool ok = median_ci_indices(s.n, lo_idx, hi_idx);
    s.ci_lo = errors[static_cast<std::size_t>(lo_idx)];
    s.ci_hi = errors[static_cast<std::size_t>(hi_idx)];
    s.ci_degenerate = !ok;
  }
  return s;
}

}  // namespace arraycalib
