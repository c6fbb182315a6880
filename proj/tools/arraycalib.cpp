// Command-line front end: localize / simulate / sweep / dof.
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "arraycalib/evaluation.hpp"
#include "arraycalib/io.hpp"
#include "arraycalib/pipeline.hpp"
#include "arraycalib/scenario.hpp"
#include "arraycalib/types.hpp"

namespace {

using namespace arraycalib;

constexpr int kExitSolver = 2;
constexpr int kExitInput = 3;
constexpr int kExitConfig = 4;

int workers_from_env(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("ARRAYCALIB_WORKERS")) {
    try {
      const int parsed = std::stoi(env);
      if (parsed > 0) return parsed;
    } catch (const std::exception&) {
    }
    throw ConfigError(std::string("ARRAYCALIB_WORKERS must be a positive "
                                  "integer, got '") +
                      env + "'");
  }
  return 1;
}

struct LocalizeArgs {
  std::string toa_path;
  std::string config_path;
  std::string mode;
  int d = 0;  // 0 = keep config/default
  std::string format;
  std::string known_distances;
  std::string distance_bounds;
  std::string constant_offset;
  std::string out;
};

int cmd_localize(const LocalizeArgs& args) {
  RunConfig config;
  if (!args.config_path.empty()) config = read_run_config(args.config_path);
  if (!args.mode.empty()) config.mode = sync_mode_from_string(args.mode);
  if (args.d != 0) config.d = args.d;
  if (!args.known_distances.empty()) {
    const auto extra = read_distance_equalities(args.known_distances);
    config.equalities.insert(config.equalities.end(), extra.begin(),
                             extra.end());
  }
  if (!args.distance_bounds.empty()) {
    const auto extra = read_distance_bounds(args.distance_bounds);
    config.bounds.insert(config.bounds.end(), extra.begin(), extra.end());
  }
  if (!args.constant_offset.empty())
    config.known_delays = read_vector(args.constant_offset);
  if (!args.out.empty()) config.out = args.out;

  const ToaMatrix t = args.format.empty()
                          ? read_toa(args.toa_path)
                          : read_toa(args.toa_path,
                                     file_format_from_string(args.format));

  const LocalizeOptions options = config.options();
  {
    const SyncMode mode = config.known_delays.size() > 0
                              ? SyncMode::sources_synced
                              : options.mode;
    const DofReport dof = dof_report(t.m(), t.k(), options.d, mode);
    if (!dof.feasible)
      std::cerr << "warning: " << t.m() << " x " << t.k()
                << " measurements cannot pin " << dof.dof
                << " free parameters in mode " << to_string(mode)
                << "; proceeding anyway\n";
  }

  const LocalizeResult result = localize(t, options);

  std::optional<AlignedResult> evaluation;
  if (const std::optional<Truth> truth = find_truth_alongside(args.toa_path))
    evaluation = procrustes_align(result.points, truth->points);

  const std::string report = localize_result_json(result, evaluation);
  if (!config.out.empty()) {
    std::filesystem::create_directories(config.out);
    const std::filesystem::path path =
        std::filesystem::path(config.out) / "result.json";
    std::ofstream file(path, std::ios::binary);
    file << report;
    if (!file) throw InvalidInputError("cannot write " + path.string());
    std::cout << path.string() << "\n";
  } else {
    std::cout << report;
  }
  return 0;
}

struct SimulateArgs {
  ScenarioConfig scenario;
  std::string format = "csv";
  std::string out = ".";
};

int cmd_simulate(const SimulateArgs& args) {
  const Instance instance = generate(args.scenario);
  const std::filesystem::path toa_path = write_instance(
      instance, args.out, file_format_from_string(args.format));
  std::cout << toa_path.string() << "\n";
  return 0;
}

struct SweepArgs {
  SweepConfig config;
  int workers_flag = 0;
  std::string out;
};

int cmd_sweep(SweepArgs args) {
  args.config.workers = workers_from_env(args.workers_flag);
  const std::vector<SweepCell> cells = run_sweep(args.config);
  const std::string table = sweep_csv(cells);
  if (!args.out.empty()) {
    std::ofstream file(args.out, std::ios::binary);
    file << table;
    if (!file) throw InvalidInputError("cannot write " + args.out);
    std::cout << args.out << "\n";
  } else {
    std::cout << table;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Joint localization of receivers and sources from a "
      "time-of-arrival matrix with unknown clock offsets and "
      "emission times"};
  app.require_subcommand(1);

  LocalizeArgs loc;
  CLI::App* localize_cmd = app.add_subcommand(
      "localize", "Estimate geometry and timings from a TOA file");
  localize_cmd->add_option("toa", loc.toa_path, "TOA matrix (.csv or .json)")
      ->required();
  localize_cmd->add_option("--config", loc.config_path,
                           "JSON run configuration");
  localize_cmd->add_option("--mode", loc.mode,
                           "none | receivers-synced | sources-synced");
  localize_cmd->add_option("--dim", loc.d, "ambient dimension (2 or 3)");
  localize_cmd->add_option("--format", loc.format,
                           "input format override (csv or json)");
  localize_cmd->add_option("--known-distances", loc.known_distances,
                           "CSV of i,j,distance equalities");
  localize_cmd->add_option("--distance-bounds", loc.distance_bounds,
                           "CSV of i,j,lower,upper bounds");
  localize_cmd->add_option("--constant-offset", loc.constant_offset,
                           "file of K known per-source delays (seconds)");
  localize_cmd->add_option("--out", loc.out,
                           "directory for result.json (default: stdout)");

  SimulateArgs sim;
  std::uint64_t sim_seed = 0;
  CLI::App* simulate_cmd = app.add_subcommand(
      "simulate", "Write a synthetic TOA instance with ground truth");
  simulate_cmd->add_option("--m", sim.scenario.m, "receiver count");
  simulate_cmd->add_option("--k", sim.scenario.k, "source count");
  simulate_cmd->add_option("--dim", sim.scenario.d, "ambient dimension");
  simulate_cmd->add_option("--noise", sim.scenario.noise_sigma,
                           "TOA noise sigma (seconds)");
  simulate_cmd->add_option("--missing", sim.scenario.missing_fraction,
                           "fraction of entries to mask");
  simulate_cmd->add_option("--speed", sim.scenario.speed,
                           "propagation speed (m/s)");
  simulate_cmd->add_option("--seed", sim_seed, "random seed");
  simulate_cmd->add_option("--format", sim.format, "csv or json");
  simulate_cmd->add_option("--out", sim.out, "output directory");

  SweepArgs sweep;
  std::string sweep_sizes = "7,8,9,10,11,12";
  std::string sweep_noise = "0,1e-6,1e-5,1e-4,1e-3";
  std::uint64_t sweep_seed = 0;
  std::string sweep_mode = "none";
  CLI::App* sweep_cmd = app.add_subcommand(
      "sweep", "Run a size x noise grid and write summary statistics");
  sweep_cmd->add_option("--sizes", sweep_sizes,
                        "comma-separated M=K values");
  sweep_cmd->add_option("--noise", sweep_noise,
                        "comma-separated noise sigmas (seconds)");
  sweep_cmd->add_option("--trials", sweep.config.trials, "trials per cell");
  sweep_cmd->add_option("--dim", sweep.config.d, "ambient dimension");
  sweep_cmd->add_option("--mode", sweep_mode,
                        "none | receivers-synced | sources-synced");
  sweep_cmd->add_option("--missing", sweep.config.missing_fraction,
                        "fraction of entries to mask");
  sweep_cmd->add_option("--seed", sweep_seed, "base seed");
  sweep_cmd->add_option("--workers", sweep.workers_flag,
                        "worker threads (or ARRAYCALIB_WORKERS)");
  sweep_cmd->add_option("--out", sweep.out, "CSV path (default: stdout)");

  int dof_m = 0, dof_k = 0, dof_d = 3;
  std::string dof_mode = "none";
  CLI::App* dof_cmd = app.add_subcommand(
      "dof", "Solution-count report for an (M, K, d, mode) configuration");
  dof_cmd->add_option("m", dof_m, "receiver count")->required();
  dof_cmd->add_option("k", dof_k, "source count")->required();
  dof_cmd->add_option("d", dof_d, "ambient dimension");
  dof_cmd->add_option("mode", dof_mode,
                      "none | receivers-synced | sources-synced | one-known");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (localize_cmd->parsed()) return cmd_localize(loc);
    if (simulate_cmd->parsed()) {
      sim.scenario.seed = sim_seed;
      return cmd_simulate(sim);
    }
    if (sweep_cmd->parsed()) {
      sweep.config.mode = sync_mode_from_string(sweep_mode);
      sweep.config.seed = sweep_seed;
      try {
        sweep.config.sizes.clear();
        for (const std::string& cell : CLI::detail::split(sweep_sizes, ','))
          sweep.config.sizes.push_back(std::stoi(cell));
        sweep.config.noise_sigmas.clear();
        for (const std::string& cell : CLI::detail::split(sweep_noise, ','))
          sweep.config.noise_sigmas.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ConfigError("cannot parse --sizes/--noise lists");
      }
      return cmd_sweep(sweep);
    }
    if (dof_cmd->parsed()) {
      std::cout << dof_report_json(dof_m, dof_k, dof_d,
                                   sync_mode_from_string(dof_mode));
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const GenerationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitConfig;
}
