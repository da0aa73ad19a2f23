#pragma once

#include <span>
#include <vector>

#include "driftx/field.hpp"
#include "driftx/types.hpp"

namespace driftx {

struct ParticleOptions {
  Index steps = 300;
  /// Scale on the update x <- x + step_size * V(x); must lie in (0, 1].
  double step_size = 1.0;
  /// Snapshot cadence in steps; 0 keeps only the initial and final states.
  Index snapshot_every = 0;
  /// Repulsion from the current particle set, with or without the self term.
  bool repulsion = true;
  bool mask_self = true;
};

struct ParticleTrajectory {
  std::vector<Index> steps;
  std::vector<Matrix> snapshots;
  /// mean_b |V(x_b)|^2 at each step, before the update.
  std::vector<double> mean_sq_drift;

  const Matrix& final_state() const { return snapshots.back(); }
};

/// Moves particles along the drift field toward `data`. Exact attraction uses
/// all of `data`; projected attraction uses `banks` (one per temperature group).
/// Throws ErrorCode::Diverged naming the step if any coordinate stops being finite.
ParticleTrajectory particle_drift_run(const FeatureSet& init, const FeatureSet& data, const DriftFieldConfig& config,
                                      std::span<const ShardedSummaryBank> banks, const ParticleOptions& options);

}  // namespace driftx
