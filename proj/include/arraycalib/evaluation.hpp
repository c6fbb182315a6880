#pragma once

#include <Eigen/Dense>

#include <vector>

#include "arraycalib/types.hpp"

namespace arraycalib {

// Default floor applied when reporting sweep errors; values below it are
// indistinguishable from "solved" for the target applications.
inline constexpr double kErrorClipFloor = 1e-3;

// Result of registering an estimated point set onto the ground truth with
// the best orthogonal transform + translation (reflections permitted,
// since distance measurements cannot tell chiralities apart).
struct AlignedResult {
  Eigen::MatrixXd rotation;     // d x d orthogonal (det may be -1)
  Eigen::VectorXd translation;  // d
  PointSet aligned;
  double e_rs = 0.0;  // mean point error over receivers + sources, meters
  double e_r = 0.0;   // mean point error over receivers only, meters
  bool e_rs_below_floor = false;
  bool e_r_below_floor = false;
};

// Least-squares rigid registration (orthogonal Procrustes with
// translation). estimate and truth must have equal dimensions and counts.
AlignedResult procrustes_align(const PointSet& estimate,
                               const PointSet& truth);

// (E_rs, E_r) for an already-aligned estimate.
std::pair<double, double> localization_error(const PointSet& aligned,
                                             const PointSet& truth);

// Box-plot style summary of per-trial errors. Quantiles use linear
// interpolation between order statistics; whiskers are the most extreme
// data points within 1.5 IQR of the quartiles; the 95% confidence
// interval of the median uses the exact binomial order-statistic method
// (flagged degenerate when the sample is too small for 95% coverage).
struct SweepSummary {
  int n = 0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double whisker_lo = 0.0;
  double whisker_hi = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  bool ci_degenerate = false;
  std::vector<double> outliers;
};

// Clips errors at clip_floor then summarizes. Throws InvalidInputError on
// an empty list.
SweepSummary sweep_statistics(std::vector<double> errors,
                              double clip_floor = kErrorClipFloor);

// Linear-interpolation quantile of a sorted sample, p in [0, 1].
double interpolated_quantile(const std::vector<double>& sorted, double p);

}  // namespace arraycalib
