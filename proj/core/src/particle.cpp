#include "driftx/particle.hpp"

#include <string>

#include "driftx/error.hpp"

namespace driftx {

ParticleTrajectory particle_drift_run(const FeatureSet& init, const FeatureSet& data, const DriftFieldConfig& config,
                                      std::span<const ShardedSummaryBank> banks, const ParticleOptions& options) {
  config.validate();
  if (options.steps < 1) throw Error(ErrorCode::InvalidArgument, "particle run needs at least one step");
  if (!(options.step_size > 0.0 && options.step_size <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "step size must lie in (0, 1]");
  }
  if (options.snapshot_every < 0) throw Error(ErrorCode::InvalidArgument, "snapshot interval must be >= 0");
  if (init.dim() != data.dim()) throw Error(ErrorCode::DimensionMismatch, "particles vs data");

  ParticleTrajectory out;
  out.steps.push_back(0);
  out.snapshots.push_back(init.points());

  Matrix x = init.points();
  std::vector<int> labels(init.labels().begin(), init.labels().end());
  for (Index step = 1; step <= options.steps; ++step) {
    const FeatureSet particles = labels.empty() ? FeatureSet(x) : FeatureSet(x, labels, init.num_classes());
    FieldInputs inputs;
    inputs.positives = &data;
    inputs.banks = banks;
    inputs.negatives = options.repulsion ? &particles : nullptr;
    inputs.mask_self = options.mask_self;
    inputs.query_labels = particles.labels();
    FieldEvaluation field;
    try {
      field = drift_field(particles, inputs, config);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonFinite) throw;
      throw Error(ErrorCode::Diverged, "drift field blew up at step " + std::to_string(step));
    }
    out.mean_sq_drift.push_back(field.drift.squaredNorm() / static_cast<double>(x.rows()));
    x += options.step_size * field.drift;
    if (!x.allFinite()) throw Error(ErrorCode::Diverged, "particles diverged at step " + std::to_string(step));
    const bool snap = (options.snapshot_every > 0 && step % options.snapshot_every == 0);
    if (snap || step == options.steps) {
      out.steps.push_back(step);
      out.snapshots.push_back(x);
    }
  }
  return out;
}

}  // namespace driftx
