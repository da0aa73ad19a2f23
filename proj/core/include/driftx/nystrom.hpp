#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "driftx/landmarks.hpp"
#include "driftx/memory_ledger.hpp"
#include "driftx/types.hpp"

namespace driftx {

inline constexpr double kDefaultLambda = 1e-6;
inline constexpr double kDefaultEpsilon = 1e-12;
/// Eigenvalues of K_UU + lambda I are floored here before the -1/2 power.
inline constexpr double kEigenFloor = 1e-12;

/// Landmarks plus W = (K_UU + lambda I)^{-1/2}, defining phi(z) = W^T K_zU^T.
class NystromBasis {
 public:
  NystromBasis(Matrix landmarks, double tau, double lambda = kDefaultLambda);

  /// Reassembles a basis from stored parts (used by the bank loader). W must
  /// be square, symmetric and match the landmark count.
  static NystromBasis from_parts(Matrix landmarks, Matrix transform, double tau, double lambda);

  Index rank() const noexcept { return landmarks_.rows(); }
  Index dim() const noexcept { return landmarks_.cols(); }
  const Matrix& landmarks() const noexcept { return landmarks_; }
  const Matrix& transform() const noexcept { return transform_; }
  double tau() const noexcept { return tau_; }
  double lambda() const noexcept { return lambda_; }
  /// Content hash of (tau, lambda, landmarks, W); binds summaries to bases.
  std::uint64_t id() const noexcept { return id_; }

  /// K_UU without the lambda shift.
  Matrix landmark_gram() const;
  /// Row vector [k(z,u_1), ..., k(z,u_r)] per query row.
  Matrix cross_kernel(const Matrix& z) const;

  Vector features(const Eigen::Ref<const RowVector>& z) const;
  /// One feature row phi(z_b)^T per query.
  Matrix feature_matrix(const Matrix& z) const;
  double projected_kernel(const Eigen::Ref<const RowVector>& z,
                          const Eigen::Ref<const RowVector>& z2) const;
  /// Gram matrix of the projected kernel k_U over the rows of z.
  Matrix projected_gram(const Matrix& z) const;

 private:
  NystromBasis() = default;
  void check_dim(Index d) const;

  Matrix landmarks_;
  Matrix transform_;
  double tau_ = 0.0;
  double lambda_ = 0.0;
  std::uint64_t id_ = 0;
};

NystromBasis build_basis(const LandmarkSet& landmarks, double tau, double lambda = kDefaultLambda);

/// A_p = sum_j phi(y_j) y_j^T (r x D), b_p = sum_j phi(y_j) (r), over the
/// positives absorbed into this summary. Immutable; combine with operator+.
class AttractiveSummary {
 public:
  AttractiveSummary(Matrix a, Vector b, std::uint64_t count, std::uint64_t basis_id,
                    std::optional<int> class_id = std::nullopt);

  static AttractiveSummary zero(const NystromBasis& basis, std::optional<int> class_id = std::nullopt);

  const Matrix& a() const noexcept { return a_; }
  const Vector& b() const noexcept { return b_; }
  std::uint64_t count() const noexcept { return count_; }
  std::uint64_t basis_id() const noexcept { return basis_id_; }
  const std::optional<int>& class_id() const noexcept { return class_id_; }
  Index rank() const noexcept { return a_.rows(); }
  Index dim() const noexcept { return a_.cols(); }

  friend AttractiveSummary operator+(const AttractiveSummary& lhs, const AttractiveSummary& rhs);

 private:
  Matrix a_;
  Vector b_;
  std::uint64_t count_;
  std::uint64_t basis_id_;
  std::optional<int> class_id_;
};

AttractiveSummary build_summary(const NystromBasis& basis, const FeatureSet& positives,
                                std::optional<int> class_id = std::nullopt);

struct SummaryShard {
  NystromBasis basis;
  AttractiveSummary summary;
};

/// Shards with their own bases; numerator and denominator add across shards.
class ShardedSummaryBank {
 public:
  explicit ShardedSummaryBank(std::vector<SummaryShard> shards, double epsilon = kDefaultEpsilon);

  const std::vector<SummaryShard>& shards() const noexcept { return shards_; }
  std::size_t size() const noexcept { return shards_.size(); }
  double epsilon() const noexcept { return epsilon_; }
  Index dim() const noexcept { return shards_.front().basis.dim(); }
  Index total_rank() const noexcept;
  Index max_rank() const noexcept;
  /// Index of the shard tagged with cls, if any.
  std::optional<std::size_t> shard_for_class(int cls) const;

 private:
  std::vector<SummaryShard> shards_;
  double epsilon_;
};

/// Builds one shard per class (landmarks and positives filtered by label) or,
/// when by_class is false, a single shard over everything.
ShardedSummaryBank build_bank(const LandmarkSet& landmarks, const FeatureSet& positives, double tau,
                              double lambda, bool by_class, double epsilon = kDefaultEpsilon);

struct ShardAccumulation {
  Vector numerator;  // sum_s A_s^T phi_s(x)
  double denominator = 0.0;  // sum_s phi_s(x)^T b_s, without epsilon
};

ShardAccumulation compose_shards(const ShardedSummaryBank& bank, const Eigen::Ref<const RowVector>& x);

struct BatchAccumulation {
  Matrix numerators;  // B x D
  Vector denominators;  // B
};

/// Batched composition. Shards are visited in order and share one B x max_s r_s
/// feature workspace, so only one shard's projection is live at a time.
/// `only_shard` restricts the sum to a single shard.
BatchAccumulation compose_shards_batch(const ShardedSummaryBank& bank, const Matrix& queries,
                                       MemoryLedger* ledger = nullptr,
                                       std::optional<std::size_t> only_shard = std::nullopt);

/// mu(x) = numerator / (denominator + epsilon) for every query row.
Matrix projected_mean(const BatchAccumulation& acc, double epsilon);

/// Evaluates the attractive mean through one concatenated feature map: stacked
/// landmarks, block-diagonal W and stacked (A_p, b_p). Mathematically equal to
/// the sharded composition.
Matrix concatenated_projected_mean(const ShardedSummaryBank& bank, const Matrix& queries);

}  // namespace driftx
