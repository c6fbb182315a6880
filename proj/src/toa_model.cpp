#include "arraycalib/toa_model.hpp"

#include "arraycalib/geometry.hpp"

namespace arraycalib {

ToaMatrix forward_toa(const PointSet& x, const Timing& timing, double speed) {
  if (!(speed > 0.0)) throw InvalidInputError("propagation speed must be > 0");
  if (timing.sigma.size() != x.m || timing.tau.size() != x.k)
    throw InvalidInputError("timing vector lengths do not match point set");
  Eigen::MatrixXd t = cross_distances(x) / speed;
  t.colwise() += timing.sigma;
  t.rowwise() += timing.tau.transpose();
  return ToaMatrix::fully_observed_from(t, speed);
}

ToaMatrix tdoa_to_toa(const ToaMatrix& t, int reference_row) {
  if (reference_row < 0 || reference_row >= t.m())
    throw InvalidInputError("reference row out of range");
  if (!t.mask.row(reference_row).all())
    throw InvalidInputError("reference row has unobserved entries");
  ToaMatrix out = t;
  out.t.rowwise() -= t.t.row(reference_row);
  for (int mm = 0; mm < t.m(); ++mm)
    out.mask.row(mm) = t.mask.row(mm) && t.mask.row(reference_row);
  return out;
}

Eigen::MatrixXd timing_invariant_projection(const Eigen::MatrixXd& a,
                                            SyncMode mode) {
  Eigen::MatrixXd p = a;
  if (mode == SyncMode::none || mode == SyncMode::receivers_synced) {
    // Left-multiply by J_M: remove each column's mean.
    const Eigen::RowVectorXd col_means = p.colwise().mean();
    p.rowwise() -= col_means;
  }
  if (mode == SyncMode::none || mode == SyncMode::sources_synced) {
    // Right-multiply by J_K: remove each row's mean.
    const Eigen::VectorXd row_means = p.rowwise().mean();
    p.colwise() -= row_means;
  }
  return p;
}

Eigen::MatrixXd target_meters(const ToaMatrix& t) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(t.m(), t.k());
  for (int kk = 0; kk < t.k(); ++kk)
    for (int mm = 0; mm < t.m(); ++mm)
      if (t.mask(mm, kk)) out(mm, kk) = t.speed * t.t(mm, kk);
  return out;
}

Eigen::MatrixXd residual_matrix(const PointSet& x, const ToaMatrix& t,
                                SyncMode mode, const Eigen::VectorXd& alpha) {
  if (x.m != t.m() || x.k != t.k())
    throw InvalidInputError("point set and TOA matrix dimensions differ");
  const auto missing = t.missing_indices();
  if (alpha.size() != static_cast<Eigen::Index>(missing.size()))
    throw InvalidInputError("alpha length does not match missing entries");
  Eigen::MatrixXd res = cross_distances(x) - target_meters(t);
  for (std::size_t i = 0; i < missing.size(); ++i)
    res(missing[i].first, missing[i].second) +=
        alpha(static_cast<Eigen::Index>(i));
  return timing_invariant_projection(res, mode);
}

double loss(const PointSet& x, const ToaMatrix& t, SyncMode mode,
            const Eigen::VectorXd& alpha) {
  return 0.5 * residual_matrix(x, t, mode, alpha).squaredNorm();
}

ToaMatrix constant_offset_reduce(const ToaMatrix& t,
                                 const Eigen::VectorXd& known_delays) {
  if (known_delays.size() != t.k())
    throw InvalidInputError("delay vector length does not match sources");
  ToaMatrix out = t;
  out.t.rowwise() -= known_delays.transpose();
  return out;
}

}  // namespace arraycalib
