#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <vector>

#include "arraycalib/types.hpp"

namespace arraycalib {

// Cone types for the slack vector s in A x + s = b. Blocks are stacked in
// the order they appear in `cones`; each soc/rsoc entry is a single cone,
// while zero/nonneg entries cover `dim` independent rows.
enum class ConeType { zero, nonneg, soc, rsoc, psd };

struct ConeBlock {
  ConeType type;
  int dim;  // row count (zero/nonneg/soc/rsoc) or matrix order (psd)

  int rows() const {
    return type == ConeType::psd ? dim * (dim + 1) / 2 : dim;
  }
};

// min c'x  subject to  A x + s = b,  s in K.
//
// The feasible-set convention: a linear equality r'x = t is a zero-cone row
// (A row r, b entry t); an inequality r'x <= t is a nonneg row; r'x >= t is
// the nonneg row (-r, -t). For soc blocks s = (t, z) with ||z|| <= t; for
// rsoc blocks s = (u, v, w) with 2 u v >= ||w||^2, u, v >= 0. psd blocks
// hold the lower-triangular column-major svec of the matrix slack.
struct ConicProgram {
  Eigen::SparseMatrix<double> a;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
  std::vector<ConeBlock> cones;

  int num_vars() const { return static_cast<int>(c.size()); }
  int num_rows() const { return static_cast<int>(b.size()); }

  // Throws InvalidInputError when the cone rows do not tile b, dimensions
  // disagree, or a cone block is malformed (soc/rsoc too short, etc.).
  void validate() const;
};

enum class ConicStatus { optimal, near_optimal, infeasible, unbounded, failed };

const char* to_string(ConicStatus status);

struct ConicSolution {
  ConicStatus status = ConicStatus::failed;
  Eigen::VectorXd x;  // primal variables
  Eigen::VectorXd y;  // dual variables (one per row)
  Eigen::VectorXd s;  // primal slacks (one per row)
  double objective = 0.0;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double duality_gap = 0.0;
};

// Scaled symmetric vectorization: lower triangle in column-major order with
// off-diagonal entries multiplied by sqrt(2), so that dot products and
// Euclidean norms of svecs equal Frobenius inner products and norms.
int svec_size(int order);
Eigen::VectorXd svec(const Eigen::MatrixXd& s);
Eigen::MatrixXd unsvec(const Eigen::VectorXd& v, int order);

// Euclidean cone projections, in place. Used by the solver and exercised
// directly by tests; psd takes the matrix order of the svec'd block.
void project_soc(Eigen::Ref<Eigen::VectorXd> v);
void project_rsoc(Eigen::Ref<Eigen::VectorXd> v);
void project_psd_svec(Eigen::Ref<Eigen::VectorXd> v, int order);

struct AdmmConfig {
  int max_iterations = 100000;
  double eps_optimal = 1e-8;   // declare optimal below this
  double eps_near = 1e-6;      // accept as near_optimal at budget exhaustion
  double over_relaxation = 1.5;
  int check_interval = 25;
  bool equilibrate = true;
  int ruiz_iterations = 10;
};

// Abstract solver handle so callers can inject alternative backends.
class ConicBackend {
 public:
  virtual ~ConicBackend() = default;
  virtual ConicSolution solve(const ConicProgram& program) = 0;
};

// First-order operator-splitting solver on the homogeneous self-dual
// embedding of the primal-dual pair, with Ruiz equilibration and
// over-relaxation. Detects primal/dual infeasibility via certificates.
class AdmmBackend : public ConicBackend {
 public:
  explicit AdmmBackend(AdmmConfig config = {}) : config_(config) {}
  ConicSolution solve(const ConicProgram& program) override;

  const AdmmConfig& config() const { return config_; }

 private:
  AdmmConfig config_;
};

}  // namespace arraycalib
