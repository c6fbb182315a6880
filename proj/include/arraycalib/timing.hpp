#pragma once

#include <Eigen/Dense>

#include "arraycalib/types.hpp"

namespace arraycalib {

// Receiver offsets and emission times recovered from an estimated distance
// matrix, in seconds. The first receiver's offset is pinned to zero; the
// global shift it would carry lives in tau instead.
struct TimingEstimate {
  Eigen::VectorXd sigma;  // length M, sigma(0) == 0
  Eigen::VectorXd tau;    // length K
  double residual_norm = 0.0;  // seconds, over observed entries
};

// Least squares on E = T - delta_hat / speed against the offset model
// sigma 1^T + 1 tau^T, one row per observed entry. Throws SolverError when
// the observed pattern cannot pin all M + K - 1 free unknowns.
TimingEstimate recover_timing(const Eigen::MatrixXd& delta_hat,
                              const ToaMatrix& t);

}  // namespace arraycalib
