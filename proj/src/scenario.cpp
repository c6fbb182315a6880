#include "arraycalib/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "arraycalib/geometry.hpp"
#include "arraycalib/rng.hpp"
#include "arraycalib/toa_model.hpp"

namespace arraycalib {

void ScenarioConfig::validate() const {
  if (d < 2 || d > 3) throw ConfigError("dimension must be 2 or 3");
  if (m < 1 || k < 1) throw ConfigError("m and k must be >= 1");
  for (int i = 0; i < d; ++i)
    if (!(volume(i) > 0.0)) throw ConfigError("box extents must be > 0");
  if (!(offset_lo <= offset_hi))
    throw ConfigError("offset range is inverted");
  if (noise_sigma < 0.0) throw ConfigError("noise sigma must be >= 0");
  if (!(speed > 0.0)) throw ConfigError("speed must be > 0");
  if (missing_fraction < 0.0 || missing_fraction >= 1.0)
    throw ConfigError("missing fraction must lie in [0, 1)");
}

namespace {

// Samples n_miss distinct linear indices (column-major over the M x K
// grid), rejecting draws that leave a row or column with nothing observed.
Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> sample_mask(
    Rng& rng, int m, int k, int n_miss) {
  using BoolGrid = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;
  if (n_miss == 0) return BoolGrid::Constant(m, k, true);

  std::vector<int> all(static_cast<std::size_t>(m) * k);
  std::iota(all.begin(), all.end(), 0);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    // Partial Fisher-Yates: the first n_miss slots become the hidden set.
    for (int i = 0; i < n_miss; ++i) {
      const auto j =
          i + static_cast<int>(rng.below(static_cast<std::uint64_t>(
                  all.size() - static_cast<std::size_t>(i))));
      std::swap(all[static_cast<std::size_t>(i)],
                all[static_cast<std::size_t>(j)]);
    }
    BoolGrid mask = BoolGrid::Constant(m, k, true);
    for (int i = 0; i < n_miss; ++i)
      mask(all[static_cast<std::size_t>(i)] % m,
           all[static_cast<std::size_t>(i)] / m) = false;
    bool covered = true;
    for (int mm = 0; mm < m && covered; ++mm) covered = mask.row(mm).any();
    for (int kk = 0; kk < k && covered; ++kk) covered = mask.col(kk).any();
    if (covered) return mask;
  }
  throw GenerationError(
      "missing fraction leaves a row or column unobserved in every draw");
}

}  // namespace

Instance generate(const ScenarioConfig& config) {
  config.validate();
  Rng rng(splitmix64(config.seed));

  Instance inst;
  inst.config = config;
  inst.truth.m = config.m;
  inst.truth.k = config.k;
  inst.truth.coords.resize(config.d, config.m + config.k);
  for (int j = 0; j < config.m + config.k; ++j)
    for (int i = 0; i < config.d; ++i)
      inst.truth.coords(i, j) = rng.uniform(0.0, config.volume(i));

  inst.timing.sigma.resize(config.m);
  inst.timing.tau.resize(config.k);
  for (int mm = 0; mm < config.m; ++mm)
    inst.timing.sigma(mm) = rng.uniform(config.offset_lo, config.offset_hi);
  for (int kk = 0; kk < config.k; ++kk)
    inst.timing.tau(kk) = rng.uniform(config.offset_lo, config.offset_hi);

  const int n_miss = static_cast<int>(
      std::llround(config.missing_fraction * config.m * config.k));
  const auto mask = sample_mask(rng, config.m, config.k, n_miss);

  inst.clean_toa = forward_toa(inst.truth, inst.timing, config.speed);
  inst.toa = inst.clean_toa;
  inst.toa.mask = mask;
  for (int kk = 0; kk < config.k; ++kk)
    for (int mm = 0; mm < config.m; ++mm) {
      if (!mask(mm, kk)) {
        inst.toa.t(mm, kk) = std::numeric_limits<double>::quiet_NaN();
      } else if (config.noise_sigma > 0.0) {
        inst.toa.t(mm, kk) += config.noise_sigma * rng.normal();
      }
    }
  return inst;
}

std::pair<Instance, std::vector<DistanceEquality>> plant_subarray(
    const Instance& instance, const std::vector<int>& receiver_indices,
    const Eigen::MatrixXd& template_points) {
  const ScenarioConfig& cfg = instance.config;
  const int nt = static_cast<int>(template_points.cols());
  if (static_cast<int>(receiver_indices.size()) != nt)
    throw InvalidInputError("subarray index count differs from template");
  if (template_points.rows() != cfg.d)
    throw InvalidInputError("template dimension differs from scenario");
  for (int idx : receiver_indices)
    if (idx < 0 || idx >= cfg.m)
      throw InvalidInputError("subarray index outside receiver range");

  Rng rng(splitmix64(instance.config.seed ^ 0x9e3779b97f4a7c15ULL));

  // Random orthogonal rotation from the QR of a Gaussian matrix.
  Eigen::MatrixXd a(cfg.d, cfg.d);
  for (int i = 0; i < cfg.d * cfg.d; ++i)
    a(i / cfg.d, i % cfg.d) = rng.normal();
  const Eigen::MatrixXd q =
      Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ();

  Eigen::MatrixXd placed =
      q * (template_points.colwise() - template_points.rowwise().mean());

  // Uniform translation keeping every template point inside the box.
  Eigen::VectorXd t(cfg.d);
  for (int i = 0; i < cfg.d; ++i) {
    const double lo = -placed.row(i).minCoeff();
    const double hi = cfg.volume(i) - placed.row(i).maxCoeff();
    if (lo > hi)
      throw GenerationError("subarray template does not fit in the box");
    t(i) = rng.uniform(lo, hi);
  }
  placed.colwise() += t;

  Instance out = instance;
  for (int c = 0; c < nt; ++c)
    out.truth.coords.col(receiver_indices[static_cast<std::size_t>(c)]) =
        placed.col(c);

  // Regenerate measurements from the modified geometry, keeping the mask
  // and drawing fresh noise from the derived stream.
  out.clean_toa = forward_toa(out.truth, out.timing, cfg.speed);
  out.toa = out.clean_toa;
  out.toa.mask = instance.toa.mask;
  for (int kk = 0; kk < cfg.k; ++kk)
    for (int mm = 0; mm < cfg.m; ++mm) {
      if (!out.toa.mask(mm, kk)) {
        out.toa.t(mm, kk) = std::numeric_limits<double>::quiet_NaN();
      } else if (cfg.noise_sigma > 0.0) {
        out.toa.t(mm, kk) += cfg.noise_sigma * rng.normal();
      }
    }

  std::vector<DistanceEquality> equalities;
  for (int a_i = 0; a_i < nt; ++a_i)
    for (int b_i = a_i + 1; b_i < nt; ++b_i)
      equalities.push_back(
          {receiver_indices[static_cast<std::size_t>(a_i)],
           receiver_indices[static_cast<std::size_t>(b_i)],
           (template_points.col(a_i) - template_points.col(b_i)).norm()});
  return {out, equalities};
}

}  // namespace arraycalib
