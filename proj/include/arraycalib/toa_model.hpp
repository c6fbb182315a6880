#pragma once

#include <Eigen/Dense>

#include "arraycalib/types.hpp"

namespace arraycalib {

// t[m][k] = ||r_m - s_k|| / speed + sigma_m + tau_k, fully observed.
ToaMatrix forward_toa(const PointSet& x, const Timing& timing, double speed);

// Subtracts the reference receiver's row from every row, turning TDOA-style
// data into a TOA matrix with modified timings. The reference row must be
// fully observed; the output mask is ANDed with it per column.
ToaMatrix tdoa_to_toa(const ToaMatrix& t, int reference_row);

// Applies the mode's annihilating projection by two-sided centering:
// none -> J_M A J_K, receivers_synced -> J_M A, sources_synced -> A J_K.
// Never materializes the MK x MK Kronecker operator.
Eigen::MatrixXd timing_invariant_projection(const Eigen::MatrixXd& a,
                                            SyncMode mode);

// TOA matrix converted to meters with unobserved entries zeroed (their
// content is absorbed by the alpha coefficients downstream).
Eigen::MatrixXd target_meters(const ToaMatrix& t);

// Projected residual projection(Delta(x) + sum alpha_mk e_m e_k^T - v T),
// in meters. alpha holds one coefficient per unobserved entry, in the
// column-major order of ToaMatrix::missing_indices; it must be empty when
// the mask is full.
Eigen::MatrixXd residual_matrix(const PointSet& x, const ToaMatrix& t,
                                SyncMode mode,
                                const Eigen::VectorXd& alpha);

// Timing-invariant loss, (1/2) ||residual_matrix||_F^2.
double loss(const PointSet& x, const ToaMatrix& t, SyncMode mode,
            const Eigen::VectorXd& alpha = Eigen::VectorXd());

// Subtracts known per-source delays, T - 1 delta^T. The result is then
// treated under mode sources_synced: only receiver offsets (plus one
// global shift absorbed into them) remain unknown.
ToaMatrix constant_offset_reduce(const ToaMatrix& t,
                                 const Eigen::VectorXd& known_delays);

}  // namespace arraycalib
