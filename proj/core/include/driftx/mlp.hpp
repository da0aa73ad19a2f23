#pragma once

#include <array>

#include "driftx/random.hpp"
#include "driftx/types.hpp"

namespace driftx {

/// input -> hidden -> hidden -> output with tanh on both hidden layers and an
/// identity output. Weights map rows: h1 = tanh(x W1 + b1).
///
/// The same type holds gradients, which share the parameter shapes.
struct MlpGenerator {
  Matrix w1, b1;  // C x H, 1 x H
  Matrix w2, b2;  // H x H, 1 x H
  Matrix w3, b3;  // H x D, 1 x D

  static constexpr Index kHidden = 64;

  /// Weights drawn N(0, 1/fan_in), biases zero.
  static MlpGenerator init(Index input_dim, Index output_dim, Rng& rng, Index hidden = kHidden);
  /// Same shapes as `like`, every entry zero.
  static MlpGenerator zeros_like(const MlpGenerator& like);

  Index input_dim() const noexcept { return w1.rows(); }
  Index hidden_dim() const noexcept { return w1.cols(); }
  Index output_dim() const noexcept { return w3.cols(); }
  Index parameter_count() const noexcept;

  std::array<Matrix*, 6> tensors() noexcept { return {&w1, &b1, &w2, &b2, &w3, &b3}; }
  std::array<const Matrix*, 6> tensors() const noexcept { return {&w1, &b1, &w2, &b2, &w3, &b3}; }
  bool all_finite() const;
};

using MlpGradients = MlpGenerator;

/// Hidden activations kept from the forward pass for backpropagation.
struct MlpActivations {
  Matrix h1;
  Matrix h2;
};

Matrix mlp_forward(const MlpGenerator& gen, const Matrix& noise, MlpActivations* keep = nullptr);

/// Gradients of sum_{b,d} grad_out(b,d) * f(noise)(b,d) with respect to every
/// parameter.
MlpGradients mlp_backward(const MlpGenerator& gen, const Matrix& noise, const Matrix& grad_out);
/// Same, reusing activations from a forward pass on the same noise.
MlpGradients mlp_backward(const MlpGenerator& gen, const Matrix& noise, const MlpActivations& acts,
                          const Matrix& grad_out);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First and second moments with bias correction; no weight decay.
class AdamOptimizer {
 public:
  AdamOptimizer(const MlpGenerator& like, AdamConfig config = {});

  void step(MlpGenerator& params, const MlpGradients& grads);

  long steps_taken() const noexcept { return step_; }
  const AdamConfig& config() const noexcept { return config_; }
  const MlpGenerator& first_moment() const noexcept { return m_; }
  const MlpGenerator& second_moment() const noexcept { return v_; }

 private:
  AdamConfig config_;
  MlpGenerator m_;
  MlpGenerator v_;
  long step_ = 0;
};

}  // namespace driftx
