#pragma once

#include <optional>

#include "arraycalib/types.hpp"

namespace arraycalib {

// Counting argument for when M receivers and K sources are pinned down by
// an M x K arrival matrix: the solution set has dimension zero when the
// measurement count reaches the free-parameter count. Feasible here means
// exactly that inequality, not uniqueness.
struct DofReport {
  int measurements = 0;
  int dof = 0;
  bool feasible = false;
  std::optional<int> min_sources;  // for this M/d/mode; empty = no finite K
};

// Free parameters after removing the rigid-motion gauge. Mode none also
// carries one offset per receiver and per source minus a shared shift; a
// synchronized side drops its offsets.
int degrees_of_freedom(int m, int k, int d, SyncMode mode);

// Smallest K making (m, K) feasible, or nullopt when no finite K does
// (the measurement count grows no faster than the unknowns).
std::optional<int> min_sources(int m, int d, SyncMode mode);

DofReport dof_report(int m, int k, int d, SyncMode mode);

}  // namespace arraycalib
