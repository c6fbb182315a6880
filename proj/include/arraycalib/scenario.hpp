#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <utility>
#include <vector>

#include "arraycalib/types.hpp"

namespace arraycalib {

// Synthetic-instance parameters: points uniform in an axis-aligned box,
// timings uniform in an interval, i.i.d. Gaussian TOA noise, optional
// uniformly-sampled missing entries.
struct ScenarioConfig {
  int d = 3;
  int m = 12;
  int k = 12;
  Eigen::Vector3d volume{10.0, 10.0, 3.0};  // meters; first d extents used
  double offset_lo = -1.0;                  // seconds
  double offset_hi = 1.0;
  double noise_sigma = 0.0;                 // seconds
  double speed = 343.0;                     // m/s
  double missing_fraction = 0.0;            // in [0, 1)
  std::uint64_t seed = 0;

  void validate() const;
};

struct Instance {
  ScenarioConfig config;
  PointSet truth;
  Timing timing;
  ToaMatrix toa;        // noisy, masked; unobserved entries poisoned to NaN
  ToaMatrix clean_toa;  // noiseless, fully observed
};

// Deterministic in config (including the seed). The missing-entry count is
// llround(missing_fraction * m * k); mask draws that would empty a row or
// column are rejected and resampled, with a bounded number of attempts.
Instance generate(const ScenarioConfig& config);

// Replaces the selected receivers with a randomly rotated + translated
// copy of the template (d x |indices| coordinates), regenerates the TOA
// data from the new geometry, and returns the template's exact pairwise
// distances as equality constraints on the full-point-set indices.
std::pair<Instance, std::vector<DistanceEquality>> plant_subarray(
    const Instance& instance, const std::vector<int>& receiver_indices,
    const Eigen::MatrixXd& template_points);

}  // namespace arraycalib
