#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "arraycalib/evaluation.hpp"
#include "arraycalib/pipeline.hpp"
#include "arraycalib/scenario.hpp"
#include "arraycalib/types.hpp"

namespace arraycalib {

enum class FileFormat { csv, json };

FileFormat file_format_from_string(const std::string& name);
// By extension, ".csv" or ".json" (case-insensitive); ConfigError otherwise.
FileFormat detect_format(const std::filesystem::path& path);

// Shortest decimal rendering that parses back to the exact double; every
// writer below uses it, so write -> read round-trips bit-for-bit on the
// numeric payload.
std::string format_double(double value);

// Time-of-arrival matrices. CSV holds M rows of K comma-separated seconds;
// an optional sibling file (mask_path_for) of 0/1 cells marks observed
// entries, and unobserved cells may hold any parseable placeholder. JSON
// holds {"toa": [[...]], "mask": [[true, ...]], "speed": s} where "mask"
// and "speed" are optional and null entries in "toa" mean unobserved.
// CSV has no speed column, so CSV reads keep the ToaMatrix default speed.
// Malformed content throws ParseError naming the row/column.
ToaMatrix read_toa(const std::filesystem::path& path, FileFormat format);
ToaMatrix read_toa(const std::filesystem::path& path);  // by extension
void write_toa(const ToaMatrix& t, const std::filesystem::path& path,
               FileFormat format);

// "dir/toa.csv" -> "dir/toa.mask.csv".
std::filesystem::path mask_path_for(const std::filesystem::path& toa_path);

// Plain rectangular CSV of doubles.
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(const Eigen::MatrixXd& a,
                      const std::filesystem::path& path);

// Two lines: receiver offsets, then emission times (seconds).
Timing read_timing_csv(const std::filesystem::path& path);
void write_timing_csv(const Timing& timing,
                      const std::filesystem::path& path);

// Ground truth as stored next to a simulated instance. Point files hold
// one point per row.
struct Truth {
  PointSet points;
  std::optional<Timing> timing;
};

// Simulated-instance file set under `dir`: CSV writes toa.csv (+
// toa.mask.csv when entries are missing), truth_receivers.csv,
// truth_sources.csv, truth_timing.csv; JSON writes toa.json and
// truth.json. Returns the TOA file path.
std::filesystem::path write_instance(const Instance& instance,
                                     const std::filesystem::path& dir,
                                     FileFormat format);

// Looks for truth.json or the truth_*.csv trio next to the TOA file;
// empty when neither is present.
std::optional<Truth> find_truth_alongside(
    const std::filesystem::path& toa_path);

// Side-information files: one constraint per line, "i,j,distance" for
// equalities and "i,j,lower,upper" for bounds, indices into the full
// point set (receivers first). Offset files hold K comma- or
// newline-separated seconds.
std::vector<DistanceEquality> read_distance_equalities(
    const std::filesystem::path& path);
std::vector<DistanceBound> read_distance_bounds(
    const std::filesystem::path& path);
Eigen::VectorXd read_vector(const std::filesystem::path& path);

// Localization run configuration, readable from JSON. Every field has a
// default, so {} is a valid config; unknown keys are rejected to catch
// typos. Side information may be embedded ("known_distances",
// "distance_bounds", "constant_offset") and is merged with any files
// given on the command line.
struct RunConfig {
  SyncMode mode = SyncMode::none;
  int d = 3;
  LmConfig lm;
  AugLagConfig al;
  AdmmConfig solver;
  std::vector<DistanceEquality> equalities;
  std::vector<DistanceBound> bounds;
  Eigen::VectorXd known_delays;  // empty = no constant-offset reduction
  std::filesystem::path out;     // empty = stdout only
  std::uint64_t seed = 0;

  LocalizeOptions options() const;
};

RunConfig read_run_config(const std::filesystem::path& path);

// Machine-readable outputs. Stage wall-clock fields vary run to run;
// everything else is deterministic for a fixed input.
std::string localize_result_json(
    const LocalizeResult& result,
    const std::optional<AlignedResult>& evaluation = std::nullopt,
    bool pretty = true);

// One row per sweep cell; no wall-clock columns, so fixed seeds give
// byte-identical tables regardless of worker count.
std::string sweep_csv(const std::vector<SweepCell>& cells);

std::string dof_report_json(int m, int k, int d, SyncMode mode);

}  // namespace arraycalib
