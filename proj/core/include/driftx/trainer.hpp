#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "driftx/field.hpp"
#include "driftx/mlp.hpp"
#include "driftx/types.hpp"

namespace driftx {

struct TrainOptions {
  Index steps = 5000;
  Index batch_size = 256;
  /// Positives drawn without replacement per step for exact attraction.
  Index positive_batch = 256;
  /// Energy-distance evaluation cadence; the last step is always evaluated.
  /// 0 evaluates only the last step.
  Index eval_every = 500;
  Index eval_samples = 2000;
  Seed seed{};
  AdamConfig adam;
  bool mask_self = true;
  /// Replaces the drift field: receives the generated batch and returns V.
  std::function<Matrix(const Matrix&)> field_override;
  /// Called after each evaluation with the step and the evaluation samples.
  std::function<void(Index, const Matrix&)> on_eval;
};

struct EvalPoint {
  Index step = 0;
  double energy_distance = 0.0;
};

struct TrainResult {
  MlpGenerator generator;
  AdamOptimizer optimizer;
  Index step = 0;
  /// loss[s] is the loss of update s + 1.
  std::vector<double> loss;
  std::vector<EvalPoint> evals;

  std::optional<double> energy_at(Index step) const;
};

/// Trains the generator with the stop-gradient loss
/// (1/B) sum_b |f(e_b) - (x_b + V(x_b))|^2 and Adam. Noise is standard normal
/// with the generator's input width; negatives are the loss batch itself.
/// Evaluation compares eval_samples generated points (fixed noise) against
/// eval_samples data points (fixed subset). Unconditional only.
TrainResult train_generator(MlpGenerator generator, const FeatureSet& data, const DriftFieldConfig& config,
                            std::span<const ShardedSummaryBank> banks, const TrainOptions& options);

}  // namespace driftx
