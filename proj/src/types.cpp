#include "arraycalib/types.hpp"

namespace arraycalib {

const char* to_string(SyncMode mode) {
  switch (mode) {
    case SyncMode::none: return "none";
    case SyncMode::receivers_synced: return "receivers-synced";
    case SyncMode::sources_synced: return "sources-synced";
  }
  return "none";
}

SyncMode sync_mode_from_string(const std::string& name) {
  if (name == "none") return SyncMode::none;
  if (name == "receivers-synced" || name == "receivers_synced")
    return SyncMode::receivers_synced;
  if (name == "sources-synced" || name == "sources_synced")
    return SyncMode::sources_synced;
  // Shorthand for "one timing set is known"; the emission times are taken
  // as the known set, so the receivers keep their offsets.
  if (name == "one-known") return SyncMode::sources_synced;
  throw ConfigError("unknown sync mode: " + name);
}

PointSet PointSet::from_blocks(const Eigen::MatrixXd& r,
                               const Eigen::MatrixXd& s) {
  if (r.rows() != s.rows())
    throw InvalidInputError("receiver/source dimension mismatch");
  PointSet x;
  x.m = static_cast<int>(r.cols());
  x.k = static_cast<int>(s.cols());
  x.coords.resize(r.rows(), x.m + x.k);
  x.coords << r, s;
  return x;
}

void PointSet::validate() const {
  if (dim() < 2 || dim() > 3)
    throw InvalidInputError("point set dimension must be 2 or 3");
  if (m < 0 || k < 0 || n() < 1)
    throw InvalidInputError("point set must contain at least one point");
  if (coords.cols() != n())
    throw InvalidInputError("point set column count does not match m + k");
  if (!coords.allFinite())
    throw InvalidInputError("point set has non-finite coordinates");
}

std::vector<std::pair<int, int>> ToaMatrix::missing_indices() const {
  std::vector<std::pair<int, int>> out;
  for (int kk = 0; kk < k(); ++kk)
    for (int mm = 0; mm < m(); ++mm)
      if (!mask(mm, kk)) out.emplace_back(mm, kk);
  return out;
}

ToaMatrix ToaMatrix::fully_observed_from(const Eigen::MatrixXd& t,
                                         double speed) {
  ToaMatrix out;
  out.t = t;
  out.mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(
      t.rows(), t.cols(), true);
  out.speed = speed;
  return out;
}

void ToaMatrix::validate() const {
  if (m() < 1 || k() < 1) throw InvalidInputError("empty TOA matrix");
  if (mask.rows() != t.rows() || mask.cols() != t.cols())
    throw InvalidInputError("TOA mask shape does not match matrix");
  if (!(speed > 0.0)) throw InvalidInputError("propagation speed must be > 0");
  for (int mm = 0; mm < m(); ++mm)
    for (int kk = 0; kk < k(); ++kk)
      if (mask(mm, kk) && !std::isfinite(t(mm, kk)))
        throw InvalidInputError("observed TOA entry is non-finite at (" +
                                std::to_string(mm) + ", " +
                                std::to_string(kk) + ")");
  for (int mm = 0; mm < m(); ++mm)
    if (!mask.row(mm).any())
      throw InvalidInputError("TOA row " + std::to_string(mm) +
                              " has no observed entries");
  for (int kk = 0; kk < k(); ++kk)
    if (!mask.col(kk).any())
      throw InvalidInputError("TOA column " + std::to_string(kk) +
                              " has no observed entries");
}

}  // namespace arraycalib
