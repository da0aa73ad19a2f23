#include "driftx/nystrom.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <set>
#include <string>

#include <Eigen/Eigenvalues>

#include "driftx/error.hpp"
#include "driftx/kernel.hpp"
#include "driftx/parallel.hpp"

namespace driftx {
namespace {

class Fnv1a {
 public:
  void add(const void* data, std::size_t bytes) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < bytes; ++i) {
      hash_ ^= p[i];
      hash_ *= 0x100000001B3ULL;
    }
  }
  template <typename T>
  void add_value(const T& v) { add(&v, sizeof v); }
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xCBF29CE484222325ULL;
};

std::uint64_t basis_hash(const Matrix& landmarks, const Matrix& transform, double tau, double lambda) {
  Fnv1a h;
  h.add_value(tau);
  h.add_value(lambda);
  h.add_value(landmarks.rows());
  h.add_value(landmarks.cols());
  h.add(landmarks.data(), sizeof(double) * static_cast<std::size_t>(landmarks.size()));
  h.add(transform.data(), sizeof(double) * static_cast<std::size_t>(transform.size()));
  return h.value();
}

void require_lambda(double lambda) {
  if (!std::isfinite(lambda) || lambda < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "regularizer lambda must be finite and >= 0");
  }
}

// Feature rows K_zU W accumulated landmark by landmark into `out` (B x r),
// so no separate B x r kernel buffer is needed.
void fused_features(const NystromBasis& basis, const Matrix& queries, Eigen::Ref<Matrix> out) {
  const Matrix& u = basis.landmarks();
  const Matrix& w = basis.transform();
  const Index dim = basis.dim();
  const double tau = basis.tau();
  parallel_for(queries.rows(), [&](Index begin, Index end) {
    for (Index b = begin; b < end; ++b) {
      auto row = out.row(b);
      row.setZero();
      const double* x = queries.row(b).data();
      for (Index j = 0; j < u.rows(); ++j) {
        row.noalias() += detail::laplace(x, u.row(j).data(), dim, tau) * w.row(j);
      }
    }
  });
}

}  // namespace

NystromBasis::NystromBasis(Matrix landmarks, double tau, double lambda)
    : landmarks_(std::move(landmarks)), tau_(tau), lambda_(lambda) {
  detail::require_positive_tau(tau);
  require_lambda(lambda);
  if (landmarks_.rows() < 1 || landmarks_.cols() < 1) {
    throw Error(ErrorCode::InvalidArgument, "a Nystrom basis needs at least one landmark");
  }
  if (!landmarks_.allFinite()) throw Error(ErrorCode::NonFinite, "landmarks contain non-finite values");

  Matrix shifted = landmark_gram();
  shifted.diagonal().array() += lambda_;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(shifted);
  if (eig.info() != Eigen::Success || !eig.eigenvalues().allFinite()) {
    throw Error(ErrorCode::NumericalFailure, "eigendecomposition of the landmark Gram matrix failed");
  }
  const Vector inv_sqrt = eig.eigenvalues().cwiseMax(kEigenFloor).cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd& v = eig.eigenvectors();
  Matrix w = v * inv_sqrt.asDiagonal() * v.transpose();
  transform_ = 0.5 * (w + w.transpose());
  id_ = basis_hash(landmarks_, transform_, tau_, lambda_);
}

NystromBasis NystromBasis::from_parts(Matrix landmarks, Matrix transform, double tau, double lambda) {
  detail::require_positive_tau(tau);
  require_lambda(lambda);
  const Index r = landmarks.rows();
  if (r < 1 || landmarks.cols() < 1) {
    throw Error(ErrorCode::InvalidArgument, "a Nystrom basis needs at least one landmark");
  }
  if (transform.rows() != r || transform.cols() != r) {
    throw Error(ErrorCode::DimensionMismatch, "transform must be r x r");
  }
  if (!landmarks.allFinite() || !transform.allFinite()) {
    throw Error(ErrorCode::NonFinite, "basis contains non-finite values");
  }
  if ((transform - transform.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, transform.cwiseAbs().maxCoeff())) {
    throw Error(ErrorCode::InvalidArgument, "transform is not symmetric");
  }
  NystromBasis basis;
  basis.landmarks_ = std::move(landmarks);
  basis.transform_ = std::move(transform);
  basis.tau_ = tau;
  basis.lambda_ = lambda;
  basis.id_ = basis_hash(basis.landmarks_, basis.transform_, tau, lambda);
  return basis;
}

void NystromBasis::check_dim(Index d) const {
  if (d != dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "basis has D=" + std::to_string(dim()) + ", query has D=" + std::to_string(d));
  }
}

Matrix NystromBasis::landmark_gram() const { return kernel_matrix(landmarks_, landmarks_, tau_); }

Matrix NystromBasis::cross_kernel(const Matrix& z) const {
  check_dim(z.cols());
  return kernel_matrix(z, landmarks_, tau_);
}

Vector NystromBasis::features(const Eigen::Ref<const RowVector>& z) const {
  check_dim(z.size());
  if (!z.allFinite()) throw Error(ErrorCode::NonFinite, "feature_map input is not finite");
  RowVector k(rank());
  for (Index j = 0; j < rank(); ++j) k(j) = detail::laplace(z.data(), landmarks_.row(j).data(), dim(), tau_);
  return transform_.transpose() * k.transpose();
}

Matrix NystromBasis::feature_matrix(const Matrix& z) const { return cross_kernel(z) * transform_; }

double NystromBasis::projected_kernel(const Eigen::Ref<const RowVector>& z,
                                      const Eigen::Ref<const RowVector>& z2) const {
  return features(z).dot(features(z2));
}

Matrix NystromBasis::projected_gram(const Matrix& z) const {
  const Matrix phi = feature_matrix(z);
  return phi * phi.transpose();
}

NystromBasis build_basis(const LandmarkSet& landmarks, double tau, double lambda) {
  return NystromBasis(landmarks.points, tau, lambda);
}

AttractiveSummary::AttractiveSummary(Matrix a, Vector b, std::uint64_t count, std::uint64_t basis_id,
                                     std::optional<int> class_id)
    : a_(std::move(a)), b_(std::move(b)), count_(count), basis_id_(basis_id), class_id_(class_id) {
  if (a_.rows() != b_.size()) throw Error(ErrorCode::DimensionMismatch, "A_p and b_p disagree on r");
  if (!a_.allFinite() || !b_.allFinite()) throw Error(ErrorCode::NonFinite, "summary has non-finite entries");
}

AttractiveSummary AttractiveSummary::zero(const NystromBasis& basis, std::optional<int> class_id) {
  return AttractiveSummary(Matrix::Zero(basis.rank(), basis.dim()), Vector::Zero(basis.rank()), 0,
                           basis.id(), class_id);
}

AttractiveSummary operator+(const AttractiveSummary& lhs, const AttractiveSummary& rhs) {
  if (lhs.basis_id_ != rhs.basis_id_) {
    throw Error(ErrorCode::BasisMismatch, "cannot add summaries built on different bases");
  }
  const auto cls = lhs.class_id_ == rhs.class_id_ ? lhs.class_id_ : std::nullopt;
  return AttractiveSummary(lhs.a_ + rhs.a_, lhs.b_ + rhs.b_, lhs.count_ + rhs.count_, lhs.basis_id_, cls);
}

AttractiveSummary build_summary(const NystromBasis& basis, const FeatureSet& positives,
                                std::optional<int> class_id) {
  if (positives.dim() != basis.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "positives and basis differ in dimension");
  }
  Matrix a = Matrix::Zero(basis.rank(), basis.dim());
  Vector b = Vector::Zero(basis.rank());
  // Row blocks bound the N x r feature buffer for large supports.
  constexpr Index kBlock = 4096;
  const Matrix& y = positives.points();
  for (Index start = 0; start < y.rows(); start += kBlock) {
    const Index len = std::min(kBlock, y.rows() - start);
    const Matrix phi = basis.feature_matrix(Matrix(y.middleRows(start, len)));
    a.noalias() += phi.transpose() * y.middleRows(start, len);
    b.noalias() += phi.transpose() * Vector::Ones(len);
  }
  return AttractiveSummary(std::move(a), std::move(b), static_cast<std::uint64_t>(y.rows()), basis.id(),
                           class_id);
}

ShardedSummaryBank::ShardedSummaryBank(std::vector<SummaryShard> shards, double epsilon)
    : shards_(std::move(shards)), epsilon_(epsilon) {
  if (shards_.empty()) throw Error(ErrorCode::InvalidArgument, "a summary bank needs at least one shard");
  if (!std::isfinite(epsilon_) || epsilon_ <= 0.0) {
    throw Error(ErrorCode::InvalidArgument, "bank epsilon must be finite and positive");
  }
  const Index d = shards_.front().basis.dim();
  std::set<int> classes;
  for (std::size_t s = 0; s < shards_.size(); ++s) {
    const auto& shard = shards_[s];
    if (shard.summary.basis_id() != shard.basis.id()) {
      throw Error(ErrorCode::BasisMismatch, "shard " + std::to_string(s) + " summary was built on another basis");
    }
    if (shard.basis.dim() != d || shard.summary.dim() != d || shard.summary.rank() != shard.basis.rank()) {
      throw Error(ErrorCode::DimensionMismatch, "shard " + std::to_string(s) + " has inconsistent shapes");
    }
    if (const auto& cls = shard.summary.class_id(); cls && !classes.insert(*cls).second) {
      throw Error(ErrorCode::InvalidArgument, "class " + std::to_string(*cls) + " appears in two shards");
    }
  }
}

Index ShardedSummaryBank::total_rank() const noexcept {
  Index r = 0;
  for (const auto& s : shards_) r += s.basis.rank();
  return r;
}

Index ShardedSummaryBank::max_rank() const noexcept {
  Index r = 0;
  for (const auto& s : shards_) r = std::max(r, s.basis.rank());
  return r;
}

std::optional<std::size_t> ShardedSummaryBank::shard_for_class(int cls) const {
  for (std::size_t s = 0; s < shards_.size(); ++s) {
    if (shards_[s].summary.class_id() == cls) return s;
  }
  return std::nullopt;
}

ShardedSummaryBank build_bank(const LandmarkSet& landmarks, const FeatureSet& positives, double tau,
                              double lambda, bool by_class, double epsilon) {
  std::vector<SummaryShard> shards;
  if (!by_class) {
    NystromBasis basis = build_basis(landmarks, tau, lambda);
    AttractiveSummary summary = build_summary(basis, positives);
    shards.push_back({std::move(basis), std::move(summary)});
    return ShardedSummaryBank(std::move(shards), epsilon);
  }
  if (!positives.has_labels()) throw Error(ErrorCode::InvalidArgument, "class sharding needs labelled positives");
  if (landmarks.classes.size() != static_cast<std::size_t>(landmarks.size())) {
    throw Error(ErrorCode::InvalidArgument, "class sharding needs labelled landmarks");
  }
  for (int c = 0; c < positives.num_classes(); ++c) {
    const auto members = positives.indices_of_class(c);
    const LandmarkSet mine = landmarks.of_class(c);
    if (members.empty() && mine.size() == 0) continue;
    if (members.empty() || mine.size() == 0) {
      throw Error(ErrorCode::MissingShard, "class " + std::to_string(c) + " has " +
                                               std::to_string(members.size()) + " positives and " +
                                               std::to_string(mine.size()) + " landmarks");
    }
    NystromBasis basis = build_basis(mine, tau, lambda);
    AttractiveSummary summary = build_summary(basis, positives.subset(members), c);
    shards.push_back({std::move(basis), std::move(summary)});
  }
  return ShardedSummaryBank(std::move(shards), epsilon);
}

ShardAccumulation compose_shards(const ShardedSummaryBank& bank, const Eigen::Ref<const RowVector>& x) {
  ShardAccumulation acc{Vector::Zero(bank.dim()), 0.0};
  for (const auto& shard : bank.shards()) {
    const Vector phi = shard.basis.features(x);
    acc.numerator.noalias() += shard.summary.a().transpose() * phi;
    acc.denominator += phi.dot(shard.summary.b());
  }
  return acc;
}

BatchAccumulation compose_shards_batch(const ShardedSummaryBank& bank, const Matrix& queries, MemoryLedger* ledger,
                                       std::optional<std::size_t> only_shard) {
  if (queries.cols() != bank.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "queries and bank differ in dimension");
  }
  if (only_shard && *only_shard >= bank.size()) throw Error(ErrorCode::MissingShard, "shard index out of range");
  const Index batch = queries.rows();
  const auto& shards = bank.shards();
  const Index workspace_cols = only_shard ? shards[*only_shard].basis.rank() : bank.max_rank();
  std::vector<double> workspace(static_cast<std::size_t>(batch * workspace_cols));

  BatchAccumulation acc{Matrix::Zero(batch, bank.dim()), Vector::Zero(batch)};
  std::size_t resident = 0;
  for (std::size_t s = 0; s < shards.size(); ++s) {
    if (only_shard && s != *only_shard) continue;
    const auto& shard = shards[s];
    const Index r = shard.basis.rank();
    Eigen::Map<Matrix> phi(workspace.data(), batch, r);
    fused_features(shard.basis, queries, phi);
    acc.numerators.noalias() += phi * shard.summary.a();
    acc.denominators.noalias() += phi * shard.summary.b();
    resident += sizeof(double) * static_cast<std::size_t>(shard.summary.a().size() + shard.basis.transform().size());
  }
  if (ledger) {
    ledger->resident_summary_bytes = resident;
    ledger->feature_workspace_bytes = sizeof(double) * workspace.size();
  }
  return acc;
}

Matrix projected_mean(const BatchAccumulation& acc, double epsilon) {
  return (acc.denominators.array() + epsilon).inverse().matrix().asDiagonal() * acc.numerators;
}

Matrix concatenated_projected_mean(const ShardedSummaryBank& bank, const Matrix& queries) {
  if (queries.cols() != bank.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "queries and bank differ in dimension");
  }
  const Index r = bank.total_rank();
  Matrix k(queries.rows(), r);
  Matrix w = Matrix::Zero(r, r);
  Matrix a(r, bank.dim());
  Vector b(r);
  Index offset = 0;
  for (const auto& shard : bank.shards()) {
    const Index rs = shard.basis.rank();
    k.middleCols(offset, rs) = shard.basis.cross_kernel(queries);
    w.block(offset, offset, rs, rs) = shard.basis.transform();
    a.middleRows(offset, rs) = shard.summary.a();
    b.segment(offset, rs) = shard.summary.b();
    offset += rs;
  }
  const Matrix phi = k * w;
  BatchAccumulation acc{phi * a, phi * b};
  return projected_mean(acc, bank.epsilon());
}

}  // namespace driftx
