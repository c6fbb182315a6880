#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace arraycalib {

// Which timing set is known a priori. "none" means both the receiver clock
// offsets and the source emission times are unknown; the other two modes
// reduce the nullspace of the measurement model accordingly.
enum class SyncMode { none, receivers_synced, sources_synced };

const char* to_string(SyncMode mode);
SyncMode sync_mode_from_string(const std::string& name);

// Error taxonomy. The CLI maps these to stable exit codes:
// solver failure -> 2, input/parse errors -> 3, config errors -> 4.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvalidInputError : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct SolverError : Error { using Error::Error; };
struct GenerationError : Error { using Error::Error; };

// Full point set X = [R, S] in d dimensions. Receivers occupy the first m
// columns, sources the remaining k. Coordinates are in meters.
struct PointSet {
  Eigen::MatrixXd coords;  // d x (m + k)
  int m = 0;               // receiver count
  int k = 0;               // source count

  int dim() const { return static_cast<int>(coords.rows()); }
  int n() const { return m + k; }

  Eigen::Ref<const Eigen::MatrixXd> receivers() const {
    return coords.leftCols(m);
  }
  Eigen::Ref<const Eigen::MatrixXd> sources() const {
    return coords.rightCols(k);
  }

  static PointSet from_blocks(const Eigen::MatrixXd& r,
                              const Eigen::MatrixXd& s);

  // Throws InvalidInputError on inconsistent sizes or non-finite entries.
  // A single point (m + k = 1) is allowed so that Gram-matrix helpers can
  // operate on degenerate sets.
  void validate() const;
};

// Gram matrix of a full point set, G = X^T X, with the receiver/source
// block split carried along.
struct GramMatrix {
  Eigen::MatrixXd g;  // n x n, symmetric
  int m = 0;
  int k = 0;

  int n() const { return m + k; }
};

// Receiver clock offsets (sigma, length M) and source emission times
// (tau, length K), both in seconds. Only identified up to the global shift
// (sigma + c, tau - c).
struct Timing {
  Eigen::VectorXd sigma;
  Eigen::VectorXd tau;
};

// M x K time-of-arrival matrix in seconds. mask(m, k) is true when the
// entry was observed; unobserved entries carry no meaning (and may be NaN
// after parsing). speed converts times to distances.
struct ToaMatrix {
  Eigen::MatrixXd t;
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> mask;
  double speed = 343.0;

  int m() const { return static_cast<int>(t.rows()); }
  int k() const { return static_cast<int>(t.cols()); }

  bool fully_observed() const { return mask.all(); }
  int observed_count() const { return static_cast<int>(mask.count()); }

  // Unobserved (row, col) pairs in column-major order; this fixes the
  // ordering of the missing-entry coefficient vector alpha everywhere.
  std::vector<std::pair<int, int>> missing_indices() const;

  static ToaMatrix fully_observed_from(const Eigen::MatrixXd& t,
                                       double speed = 343.0);

  // Throws InvalidInputError when dimensions are empty, speed <= 0, an
  // observed entry is non-finite, or a row/column has no observed entry.
  void validate() const;
};

// Known pairwise distance between points i and j of the full point set
// (indices over [0, m + k), receivers first). value is in meters.
struct DistanceEquality {
  int i = 0;
  int j = 0;
  double value = 0.0;
};

// Known lower/upper bounds on a pairwise distance, in meters.
struct DistanceBound {
  int i = 0;
  int j = 0;
  double lower = 0.0;
  double upper = 0.0;
};

}  // namespace arraycalib
