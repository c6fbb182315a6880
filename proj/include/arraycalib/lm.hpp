#pragma once

#include <Eigen/Dense>

#include <utility>
#include <vector>

#include "arraycalib/types.hpp"

namespace arraycalib {

// Levenberg-Marquardt refinement of positions (and hidden-entry
// compensations) under the timing-invariant loss, with an augmented
// Lagrangian outer loop when exact pairwise distances are known.
//
// The parameter vector theta stacks [vec R; vec S; alpha], receivers and
// sources column by column; the dimension is inferred from its length.

struct LmConfig {
  int max_iterations = 1000;
  double initial_damping = 1e-2;
  double damping_increase = 10.0;
  double damping_decrease = 0.1;
  double gradient_tolerance = 1e-10;
  double relative_loss_tolerance = 1e-12;
  double distance_floor = 1e-9;  // meters; guards the unit direction

  void validate() const;
};

struct AugLagConfig {
  double penalty = 1.0;             // mu
  double penalty_growth = 2.0;      // per outer iteration
  double penalty_cap = 1e6;
  int outer_iterations = 30;
  double constraint_tolerance = 1e-8;  // squared meters, on max |g|

  void validate() const;
};

struct RefineReport {
  int iterations = 0;           // accepted steps
  double final_loss = 0.0;      // data term, half squared residual norm
  double gradient_norm = 0.0;   // of the objective actually minimized
  std::vector<double> loss_trace;        // accepted objective values
  std::vector<double> damping_trace;     // damping after each accepted step
  std::vector<double> constraint_trace;  // max |g| per outer iteration
  bool converged = false;
  int near_coincident_events = 0;  // receiver-source pairs under the floor
};

Eigen::VectorXd pack_theta(const PointSet& x, const Eigen::VectorXd& alpha);
PointSet unpack_points(const Eigen::VectorXd& theta, int m, int k,
                       int n_missing);
Eigen::VectorXd unpack_alpha(const Eigen::VectorXd& theta, int n_missing);

// vec of the projected misfit Delta(theta) + scatter(alpha) - v T at theta,
// column-major, length M*K.
Eigen::VectorXd residual(const Eigen::VectorXd& theta, const ToaMatrix& t,
                         SyncMode mode);

// Derivative of residual() w.r.t. theta. Unit directions of pairs closer
// than distance_floor are replaced by zero; such events are counted into
// *near_coincident when non-null.
Eigen::MatrixXd jacobian(const Eigen::VectorXd& theta, const ToaMatrix& t,
                         SyncMode mode, double distance_floor = 1e-9,
                         int* near_coincident = nullptr);

// Known-distance constraint values g_i = ||x_a - x_b||^2 - value^2 and
// their derivative rows (alpha columns are zero).
Eigen::VectorXd constraint_values(
    const Eigen::VectorXd& theta, int m, int k, int n_missing,
    const std::vector<DistanceEquality>& equalities);
Eigen::MatrixXd constraint_jacobian(
    const Eigen::VectorXd& theta, int m, int k, int n_missing,
    const std::vector<DistanceEquality>& equalities);

// Damped Gauss-Newton iteration; a step is accepted only when it strictly
// decreases the objective. Throws SolverError when the loss is non-finite
// at the starting point.
std::pair<Eigen::VectorXd, RefineReport> lm_minimize(
    const Eigen::VectorXd& theta0, const ToaMatrix& t, SyncMode mode,
    const LmConfig& config = {});

// Augmented-Lagrangian outer loop: inner LM on the penalized objective,
// multiplier update z <- z + 2 mu g, penalty doubled up to the cap, until
// max |g| falls under the tolerance or the outer budget runs out. The
// returned report's loss trace covers the last inner solve.
std::pair<Eigen::VectorXd, RefineReport> lm_minimize_constrained(
    const Eigen::VectorXd& theta0, const ToaMatrix& t, SyncMode mode,
    const std::vector<DistanceEquality>& equalities, const LmConfig& lm = {},
    const AugLagConfig& al = {});

}  // namespace arraycalib
