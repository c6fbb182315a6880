#include "arraycalib/dof.hpp"

namespace arraycalib {

namespace {

void check_args(int m, int k, int d) {
  if (m < 1 || k < 1) throw InvalidInputError("need at least one of each");
  if (d != 2 && d != 3) throw InvalidInputError("dimension must be 2 or 3");
}

}  // namespace

int degrees_of_freedom(int m, int k, int d, SyncMode mode) {
  check_args(m, k, d);
  const int gauge = d * (d + 1) / 2;
  switch (mode) {
    case SyncMode::none:
      // d coordinates per point, one offset per point, minus rigid motions
      // and the shared shift between the two offset families.
      return (d + 1) * (m + k) - gauge - 1;
    case SyncMode::receivers_synced:
      return d * (m + k) - gauge + k;
    case SyncMode::sources_synced:
      return d * (m + k) - gauge + m;
  }
  throw InvalidInputError("unknown sync mode");
}

std::optional<int> min_sources(int m, int d, SyncMode mode) {
  check_args(m, 1, d);
  // dof grows as slope * K + base; measurements as m * K. A finite K exists
  // only when m outgrows the slope.
  const int gauge = d * (d + 1) / 2;
  int slope = 0, base = 0;
  switch (mode) {
    case SyncMode::none:
      slope = d + 1;
      base = (d + 1) * m - gauge - 1;
      break;
    case SyncMode::receivers_synced:
      slope = d + 1;
      base = d * m - gauge;
      break;
    case SyncMode::sources_synced:
      slope = d;
      base = (d + 1) * m - gauge;
      break;
  }
  if (m <= slope) return std::nullopt;
  const int k = (base + (m - slope) - 1) / (m - slope);  // ceil
  return std::max(k, 1);
}

DofReport dof_report(int m, int k, int d, SyncMode mode) {
  DofReport report;
  report.measurements = m * k;
  report.dof = degrees_of_freedom(m, k, d, mode);
  report.feasible = report.measurements >= report.dof;
  report.min_sources = min_sources(m, d, mode);
  return report;
}

}  // namespace arraycalib
