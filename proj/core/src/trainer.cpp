#include "driftx/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "driftx/energy.hpp"
#include "driftx/error.hpp"
#include "driftx/random.hpp"

namespace driftx {
namespace {

Matrix gather(const Matrix& m, const std::vector<Index>& rows) {
  Matrix out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) out.row(static_cast<Index>(k)) = m.row(rows[k]);
  return out;
}

void validate(const MlpGenerator& gen, const FeatureSet& data, const DriftFieldConfig& config,
              const TrainOptions& options) {
  config.validate();
  if (config.conditioning != Conditioning::Unconditional) {
    throw Error(ErrorCode::InvalidArgument, "generator training is unconditional");
  }
  if (options.steps < 1) throw Error(ErrorCode::InvalidArgument, "training needs at least one step");
  if (options.batch_size < 2) throw Error(ErrorCode::InvalidArgument, "batch size must be >= 2");
  if (options.positive_batch < 1) throw Error(ErrorCode::InvalidArgument, "positive batch must be >= 1");
  if (options.eval_every < 0) throw Error(ErrorCode::InvalidArgument, "evaluation interval must be >= 0");
  if (options.eval_samples < 1) throw Error(ErrorCode::InvalidArgument, "evaluation needs at least one sample");
  if (gen.output_dim() != data.dim()) throw Error(ErrorCode::DimensionMismatch, "generator output vs data");
}

}  // namespace

std::optional<double> TrainResult::energy_at(Index at) const {
  for (const auto& e : evals) {
    if (e.step == at) return e.energy_distance;
  }
  return std::nullopt;
}

TrainResult train_generator(MlpGenerator generator, const FeatureSet& data, const DriftFieldConfig& config,
                            std::span<const ShardedSummaryBank> banks, const TrainOptions& options) {
  validate(generator, data, config, options);
  const Rng root(options.seed);
  Rng noise_rng = root.fork(1);
  Rng positive_rng = root.fork(2);
  Rng eval_rng = root.fork(3);

  const Index batch = options.batch_size;
  const Index in_dim = generator.input_dim();
  const Matrix eval_noise = eval_rng.normal_matrix(options.eval_samples, in_dim);
  const Matrix eval_data =
      gather(data.points(), eval_rng.sample_without_replacement(data.size(), std::min(options.eval_samples, data.size())));
  const Index positive_batch = std::min(options.positive_batch, data.size());

  AdamOptimizer optimizer(generator, options.adam);
  TrainResult out{std::move(generator), std::move(optimizer), 0, {}, {}};
  out.loss.reserve(static_cast<std::size_t>(options.steps));

  MlpActivations acts;
  for (Index step = 1; step <= options.steps; ++step) {
    const Matrix noise = noise_rng.normal_matrix(batch, in_dim);
    const Matrix x = mlp_forward(out.generator, noise, &acts);
    if (!x.allFinite()) throw Error(ErrorCode::Diverged, "generator output not finite at step " + std::to_string(step));

    Matrix v;
    if (options.field_override) {
      v = options.field_override(x);
      if (v.rows() != x.rows() || v.cols() != x.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "field override returned the wrong shape");
      }
    } else {
      const FeatureSet generated(x);
      std::optional<FeatureSet> positives;
      if (config.attraction == Estimator::Exact) {
        positives.emplace(data.subset(positive_rng.sample_without_replacement(data.size(), positive_batch)));
      }
      FieldInputs inputs;
      inputs.positives = positives ? &*positives : nullptr;
      inputs.banks = banks;
      inputs.negatives = &generated;
      inputs.mask_self = options.mask_self;
      v = drift_field(generated, inputs, config).drift;
    }

    // The target enters as a constant: only f(e) carries gradient.
    const Matrix targets = x + v;
    const Matrix residual = x - targets;
    const double loss = residual.squaredNorm() / static_cast<double>(batch);
    if (!std::isfinite(loss)) throw Error(ErrorCode::Diverged, "non-finite loss at step " + std::to_string(step));
    out.loss.push_back(loss);

    const Matrix grad_out = (2.0 / static_cast<double>(batch)) * residual;
    out.optimizer.step(out.generator, mlp_backward(out.generator, noise, acts, grad_out));
    out.step = step;

    const bool eval = (options.eval_every > 0 && step % options.eval_every == 0) || step == options.steps;
    if (eval) {
      const Matrix samples = mlp_forward(out.generator, eval_noise);
      if (!samples.allFinite()) {
        throw Error(ErrorCode::Diverged, "generator output not finite at step " + std::to_string(step));
      }
      out.evals.push_back({step, energy_distance(samples, eval_data)});
      if (options.on_eval) options.on_eval(step, samples);
    }
  }
  return out;
}

}  // namespace driftx
