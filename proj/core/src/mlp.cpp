#include "driftx/mlp.hpp"

#include <cmath>

#include "driftx/error.hpp"

namespace driftx {
namespace {

void require_shape(const Matrix& m, Index rows, Index cols, const char* what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw Error(ErrorCode::DimensionMismatch, std::string(what) + " has the wrong shape");
  }
}

Matrix affine(const Matrix& x, const Matrix& w, const Matrix& b) {
  Matrix out = x * w;
  out.rowwise() += b.row(0);
  return out;
}

}  // namespace

MlpGenerator MlpGenerator::init(Index input_dim, Index output_dim, Rng& rng, Index hidden) {
  if (input_dim < 1 || output_dim < 1 || hidden < 1) throw Error(ErrorCode::InvalidArgument, "layer sizes must be >= 1");
  MlpGenerator g;
  g.w1 = rng.normal_matrix(input_dim, hidden, 1.0 / std::sqrt(static_cast<double>(input_dim)));
  g.b1 = Matrix::Zero(1, hidden);
  g.w2 = rng.normal_matrix(hidden, hidden, 1.0 / std::sqrt(static_cast<double>(hidden)));
  g.b2 = Matrix::Zero(1, hidden);
  g.w3 = rng.normal_matrix(hidden, output_dim, 1.0 / std::sqrt(static_cast<double>(hidden)));
  g.b3 = Matrix::Zero(1, output_dim);
  return g;
}

MlpGenerator MlpGenerator::zeros_like(const MlpGenerator& like) {
  MlpGenerator g;
  auto dst = g.tensors();
  const auto src = like.tensors();
  for (std::size_t k = 0; k < dst.size(); ++k) *dst[k] = Matrix::Zero(src[k]->rows(), src[k]->cols());
  return g;
}

Index MlpGenerator::parameter_count() const noexcept {
  Index n = 0;
  for (const Matrix* t : tensors()) n += t->size();
  return n;
}

bool MlpGenerator::all_finite() const {
  for (const Matrix* t : tensors()) {
    if (!t->allFinite()) return false;
  }
  return true;
}

Matrix mlp_forward(const MlpGenerator& gen, const Matrix& noise, MlpActivations* keep) {
  if (noise.cols() != gen.input_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "noise width does not match the generator input");
  }
  Matrix h1 = affine(noise, gen.w1, gen.b1).array().tanh();
  Matrix h2 = affine(h1, gen.w2, gen.b2).array().tanh();
  Matrix out = affine(h2, gen.w3, gen.b3);
  if (keep) {
    keep->h1 = std::move(h1);
    keep->h2 = std::move(h2);
  }
  return out;
}

MlpGradients mlp_backward(const MlpGenerator& gen, const Matrix& noise, const Matrix& grad_out) {
  MlpActivations acts;
  mlp_forward(gen, noise, &acts);
  return mlp_backward(gen, noise, acts, grad_out);
}

MlpGradients mlp_backward(const MlpGenerator& gen, const Matrix& noise, const MlpActivations& acts,
                          const Matrix& grad_out) {
  const Index batch = noise.rows();
  require_shape(noise, batch, gen.input_dim(), "noise");
  require_shape(grad_out, batch, gen.output_dim(), "output gradient");
  require_shape(acts.h1, batch, gen.hidden_dim(), "first hidden activation");
  require_shape(acts.h2, batch, gen.hidden_dim(), "second hidden activation");

  MlpGradients g;
  g.w3 = acts.h2.transpose() * grad_out;
  g.b3 = grad_out.colwise().sum();
  const Matrix d2 = ((grad_out * gen.w3.transpose()).array() * (1.0 - acts.h2.array().square())).matrix();
  g.w2 = acts.h1.transpose() * d2;
  g.b2 = d2.colwise().sum();
  const Matrix d1 = ((d2 * gen.w2.transpose()).array() * (1.0 - acts.h1.array().square())).matrix();
  g.w1 = noise.transpose() * d1;
  g.b1 = d1.colwise().sum();
  return g;
}

AdamOptimizer::AdamOptimizer(const MlpGenerator& like, AdamConfig config)
    : config_(config), m_(MlpGenerator::zeros_like(like)), v_(MlpGenerator::zeros_like(like)) {
  if (!(config_.learning_rate > 0.0) || !(config_.beta1 >= 0.0 && config_.beta1 < 1.0) ||
      !(config_.beta2 >= 0.0 && config_.beta2 < 1.0) || !(config_.epsilon > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "invalid Adam hyperparameters");
  }
}

void AdamOptimizer::step(MlpGenerator& params, const MlpGradients& grads) {
  ++step_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
  auto p = params.tensors();
  auto m = m_.tensors();
  auto v = v_.tensors();
  const auto g = grads.tensors();
  for (std::size_t k = 0; k < p.size(); ++k) {
    require_shape(*g[k], p[k]->rows(), p[k]->cols(), "gradient");
    require_shape(*m[k], p[k]->rows(), p[k]->cols(), "optimizer moment");
    m[k]->array() = config_.beta1 * m[k]->array() + (1.0 - config_.beta1) * g[k]->array();
    v[k]->array() = config_.beta2 * v[k]->array() + (1.0 - config_.beta2) * g[k]->array().square();
    p[k]->array() -=
        config_.learning_rate * (m[k]->array() / c1) / ((v[k]->array() / c2).sqrt() + config_.epsilon);
  }
}

}  // namespace driftx
