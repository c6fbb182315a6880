#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "arraycalib/conic.hpp"
#include "arraycalib/dof.hpp"
#include "arraycalib/evaluation.hpp"
#include "arraycalib/lm.hpp"
#include "arraycalib/sdr.hpp"
#include "arraycalib/timing.hpp"
#include "arraycalib/types.hpp"

namespace arraycalib {

// End-to-end localization: convex relaxation for an initial geometry,
// damped Gauss-Newton refinement (augmented Lagrangian when exact
// distances are supplied), then closed-form timing recovery from the
// refined distance matrix.

struct LocalizeOptions {
  int d = 3;
  SyncMode mode = SyncMode::none;
  LmConfig lm;
  AugLagConfig al;
  AdmmConfig solver;
  std::vector<DistanceEquality> equalities;
  std::vector<DistanceBound> bounds;
  // Known per-source delays (size K). When non-empty the matrix is reduced
  // by subtracting them and the run proceeds in mode sources_synced; the
  // delays are added back into the reported emission times.
  Eigen::VectorXd known_delays;
};

struct StageSeconds {
  double relaxation = 0.0;  // conic build + solve + spectral extraction
  double refinement = 0.0;
  double timing = 0.0;
};

struct LocalizeResult {
  PointSet points;        // refined estimate, receivers first
  Eigen::VectorXd alpha;  // hidden-entry compensations, meters
  TimingEstimate timing;  // sigma_1 = 0 convention
  double relaxation_objective = 0.0;
  double spectral_tail = 0.0;  // Gram mass beyond the top d eigenvalues
  ConicStatus relaxation_status = ConicStatus::failed;
  RefineReport refinement;
  DofReport dof;
  bool dof_warning = false;  // fewer measurements than free parameters
  StageSeconds seconds;
};

// Runs the full pipeline on one matrix. The solution-count warning is
// reported, never fatal: an infeasible count still produces an estimate.
// A constrained refinement that fails to meet the distance constraints is
// retried once with a 100x stiffer starting penalty; the less-violating
// run wins. Throws SolverError when the relaxation does not reach
// (near-)optimality or the mask cannot pin the timings; InvalidInputError
// on malformed input. Never returns partial results.
LocalizeResult localize(const ToaMatrix& t,
                        const LocalizeOptions& options = {});

// Noise/size grid driver shared by the command-line tool and the
// acceptance checks. Each cell runs `trials` independent synthetic
// instances through localize() and summarizes the alignment errors.
struct SweepConfig {
  std::vector<int> sizes;            // M = K per grid row
  std::vector<double> noise_sigmas;  // seconds
  int trials = 20;
  int d = 3;
  SyncMode mode = SyncMode::none;
  double missing_fraction = 0.0;
  Eigen::Vector3d volume{10.0, 10.0, 3.0};
  double offset_lo = -1.0;  // seconds
  double offset_hi = 1.0;
  double speed = 343.0;
  std::uint64_t seed = 0;
  int workers = 1;  // <= 0 picks the hardware concurrency
  double clip_floor = kErrorClipFloor;

  void validate() const;  // throws ConfigError
};

struct SweepCell {
  int size = 0;
  double noise_sigma = 0.0;
  int trials = 0;
  int failures = 0;  // solver failures; excluded from the summaries
  SweepSummary e_rs;
  SweepSummary e_r;
  std::vector<double> raw_e_rs;  // unclipped, indexed by trial; NaN = failed
};

// Seed of one trial: the base seed plus the trial's flat grid position.
// Fixing this mapping makes every cell independent of execution order.
std::uint64_t sweep_trial_seed(const SweepConfig& config, int size_index,
                               int sigma_index, int trial);

// Runs the grid on up to `workers` threads. Results land in slots keyed
// by (cell, trial), so the output is identical for any worker count.
std::vector<SweepCell> run_sweep(const SweepConfig& config);

}  // namespace arraycalib
