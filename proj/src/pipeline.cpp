#include "arraycalib/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <string>
#include <thread>

#include "arraycalib/geometry.hpp"
#include "arraycalib/scenario.hpp"
#include "arraycalib/toa_model.hpp"

namespace arraycalib {
namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

}  // namespace

LocalizeResult localize(const ToaMatrix& t, const LocalizeOptions& options) {
  t.validate();
  options.lm.validate();
  options.al.validate();
  if (options.d != 2 && options.d != 3)
    throw InvalidInputError("dimension must be 2 or 3");

  ToaMatrix data = t;
  SyncMode mode = options.mode;
  if (options.known_delays.size() > 0) {
    data = constant_offset_reduce(t, options.known_delays);
    mode = SyncMode::sources_synced;
  }

  LocalizeResult result;
  result.dof = dof_report(data.m(), data.k(), options.d, mode);
  result.dof_warning = !result.dof.feasible;

  auto start = std::chrono::steady_clock::now();
  const SdrProblem problem = make_sdr_problem(
      data, options.d, mode, options.equalities, options.bounds);
  AdmmBackend backend(options.solver);
  const SdrSolution relaxed = solve(problem, backend);
  result.relaxation_status = relaxed.solver_status;
  result.relaxation_objective = relaxed.objective;
  if (relaxed.solver_status != ConicStatus::optimal &&
      relaxed.solver_status != ConicStatus::near_optimal)
    throw SolverError(std::string("relaxation failed: ") +
                      to_string(relaxed.solver_status));
  const PointSet init = extract_points(relaxed, options.d,
                                       &result.spectral_tail);
  result.seconds.relaxation = seconds_since(start);

  start = std::chrono::steady_clock::now();
  const Eigen::VectorXd theta0 = pack_theta(init, relaxed.alpha);
  Eigen::VectorXd theta;
  if (options.equalities.empty()) {
    std::tie(theta, result.refinement) =
        lm_minimize(theta0, data, mode, options.lm);
  } else {
    std::tie(theta, result.refinement) = lm_minimize_constrained(
        theta0, data, mode, options.equalities, options.lm, options.al);
    if (!result.refinement.converged) {
      // The multiplier schedule stalled before meeting the constraints;
      // restart once from the same initialization with a much stiffer
      // starting penalty and keep whichever run violates them less.
      AugLagConfig stiff = options.al;
      stiff.penalty = std::min(options.al.penalty * 100.0,
                               options.al.penalty_cap);
      auto [retry_theta, retry_report] = lm_minimize_constrained(
          theta0, data, mode, options.equalities, options.lm, stiff);
      if (retry_report.constraint_trace.back() <
          result.refinement.constraint_trace.back()) {
        theta = retry_theta;
        result.refinement = retry_report;
      }
    }
  }
  const int n_missing = static_cast<int>(data.missing_indices().size());
  result.points = unpack_points(theta, data.m(), data.k(), n_missing);
  result.alpha = unpack_alpha(theta, n_missing);
  result.seconds.refinement = seconds_since(start);

  start = std::chrono::steady_clock::now();
  result.timing = recover_timing(cross_distances(result.points), data);
  if (options.known_delays.size() > 0)
    result.timing.tau += options.known_delays;
  result.seconds.timing = seconds_since(start);

  return result;
}

void SweepConfig::validate() const {
  if (sizes.empty()) throw ConfigError("sweep needs at least one size");
  for (int s : sizes)
    if (s < 1) throw ConfigError("sweep sizes must be positive");
  if (noise_sigmas.empty())
    throw ConfigError("sweep needs at least one noise level");
  for (double s : noise_sigmas)
    if (!(s >= 0.0)) throw ConfigError("noise sigma must be >= 0");
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (d != 2 && d != 3) throw ConfigError("dimension must be 2 or 3");
  if (!(missing_fraction >= 0.0 && missing_fraction < 1.0))
    throw ConfigError("missing fraction must lie in [0, 1)");
  if (!(offset_lo <= offset_hi)) throw ConfigError("offset interval inverted");
  if (!(speed > 0.0)) throw ConfigError("speed must be positive");
  if (!(clip_floor > 0.0)) throw ConfigError("clip floor must be positive");
}

std::uint64_t sweep_trial_seed(const SweepConfig& config, int size_index,
                               int sigma_index, int trial) {
  const std::uint64_t cell =
      static_cast<std::uint64_t>(size_index) * config.noise_sigmas.size() +
      static_cast<std::uint64_t>(sigma_index);
  return config.seed + cell * static_cast<std::uint64_t>(config.trials) +
         static_cast<std::uint64_t>(trial);
}

std::vector<SweepCell> run_sweep(const SweepConfig& config) {
  config.validate();
  const int n_sigmas = static_cast<int>(config.noise_sigmas.size());
  const int n_cells = static_cast<int>(config.sizes.size()) * n_sigmas;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  std::vector<SweepCell> cells(static_cast<std::size_t>(n_cells));
  std::vector<std::vector<double>> raw_e_r(
      static_cast<std::size_t>(n_cells));
  for (int c = 0; c < n_cells; ++c) {
    SweepCell& cell = cells[static_cast<std::size_t>(c)];
    cell.size = config.sizes[static_cast<std::size_t>(c / n_sigmas)];
    cell.noise_sigma =
        config.noise_sigmas[static_cast<std::size_t>(c % n_sigmas)];
    cell.trials = config.trials;
    cell.raw_e_rs.assign(static_cast<std::size_t>(config.trials), nan);
    raw_e_r[static_cast<std::size_t>(c)].assign(
        static_cast<std::size_t>(config.trials), nan);
  }

  const int total = n_cells * config.trials;
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int task = next.fetch_add(1);
      if (task >= total) return;
      const int c = task / config.trials;
      const int trial = task % config.trials;

      ScenarioConfig sc;
      sc.d = config.d;
      sc.m = cells[static_cast<std::size_t>(c)].size;
      sc.k = sc.m;
      sc.volume = config.volume;
      sc.offset_lo = config.offset_lo;
      sc.offset_hi = config.offset_hi;
      sc.noise_sigma = cells[static_cast<std::size_t>(c)].noise_sigma;
      sc.speed = config.speed;
      sc.missing_fraction = config.missing_fraction;
      sc.seed = sweep_trial_seed(config, c / n_sigmas, c % n_sigmas, trial);

      try {
        const Instance inst = generate(sc);
        LocalizeOptions opts;
        opts.d = config.d;
        opts.mode = config.mode;
        const LocalizeResult run = localize(inst.toa, opts);
        const AlignedResult aligned =
            procrustes_align(run.points, inst.truth);
        cells[static_cast<std::size_t>(c)]
            .raw_e_rs[static_cast<std::size_t>(trial)] = aligned.e_rs;
        raw_e_r[static_cast<std::size_t>(c)]
               [static_cast<std::size_t>(trial)] = aligned.e_r;
      } catch (const std::exception&) {
        // Failed trials keep their NaN slot and are counted below.
      }
    }
  };

  int workers = config.workers;
  if (workers <= 0)
    workers = static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  if (workers > total) workers = total;

  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }

  for (int c = 0; c < n_cells; ++c) {
    SweepCell& cell = cells[static_cast<std::size_t>(c)];
    std::vector<double> ok_rs, ok_r;
    for (int trial = 0; trial < config.trials; ++trial) {
      const double e = cell.raw_e_rs[static_cast<std::size_t>(trial)];
      if (std::isnan(e)) continue;
      ok_rs.push_back(e);
      ok_r.push_back(
          raw_e_r[static_cast<std::size_t>(c)][static_cast<std::size_t>(trial)]);
    }
    cell.failures = config.trials - static_cast<int>(ok_rs.size());
    if (!ok_rs.empty()) {
      cell.e_rs = sweep_statistics(ok_rs, config.clip_floor);
      cell.e_r = sweep_statistics(ok_r, config.clip_floor);
    }
  }
  return cells;
}

}  // namespace arraycalib
