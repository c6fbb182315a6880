#pragma once

#include <Eigen/Dense>

#include <utility>
#include <vector>

#include "arraycalib/conic.hpp"
#include "arraycalib/types.hpp"

namespace arraycalib {

// Convex relaxation of the joint localization problem over the Gram matrix
// of the full point set: distances are lifted into an N x N semidefinite
// variable, per-entry distance surrogates b_mk are tied to the Gram matrix
// through rotated quadratic cones, and the timing-invariant data misfit is
// minimized through a second-order-cone epigraph.
struct SdrProblem {
  int m = 0;
  int k = 0;
  int d = 3;
  Eigen::MatrixXd target;  // M x K, meters (speed-scaled, unobserved zeroed)
  SyncMode mode = SyncMode::none;
  std::vector<std::pair<int, int>> missing;  // column-major order
  std::vector<DistanceEquality> distance_equalities;
  std::vector<DistanceBound> distance_bounds;

  int n() const { return m + k; }

  // Throws InvalidInputError on out-of-range indices, duplicate missing
  // entries, inverted bounds, or too few points for the dimension
  // (n < d + 1 leaves the translation-fixed Gram rank-deficient).
  void validate() const;
};

SdrProblem make_sdr_problem(
    const ToaMatrix& t, int d, SyncMode mode,
    std::vector<DistanceEquality> equalities = {},
    std::vector<DistanceBound> bounds = {});

struct SdrSolution {
  GramMatrix g;
  Eigen::MatrixXd b;       // M x K distance surrogates, meters
  Eigen::VectorXd alpha;   // compensations for hidden entries, meters
  double objective = 0.0;  // half squared projected misfit at the optimum
  ConicStatus solver_status = ConicStatus::failed;
  int iterations = 0;
};

// Emits the conic program: variables [svec(G); vec(B); alpha; epigraph],
// rows = N centering equalities + distance equalities, then b >= 0 and
// bound rows, then one rotated cone per TOA entry (b_mk^2 <= L(G)_mk),
// then the epigraph second-order cone over the projected residual, then
// the semidefinite cone holding G itself.
ConicProgram build(const SdrProblem& problem);

// Builds, solves through the backend, and unpacks the variables. Solver
// failure or infeasibility is reported in solver_status, never thrown.
SdrSolution solve(const SdrProblem& problem, ConicBackend& backend);
SdrSolution solve(const SdrProblem& problem);  // default first-order backend

// Spectral extraction of coordinates from the solved Gram matrix. When
// tail_mass is non-null it receives the spectral mass beyond the top d
// eigenvalues. Throws SolverError unless the status is (near-)optimal.
PointSet extract_points(const SdrSolution& solution, int d,
                        double* tail_mass = nullptr);

}  // namespace arraycalib
