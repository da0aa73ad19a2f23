#pragma once

#include <span>
#include <string_view>

#include "driftx/kernel.hpp"
#include "driftx/memory_ledger.hpp"
#include "driftx/nystrom.hpp"
#include "driftx/types.hpp"

namespace driftx {

enum class Estimator { Exact, Projected };
enum class Conditioning { Unconditional, PerClass };

std::string_view to_string(Estimator e);
Estimator parse_estimator(std::string_view name);

struct DriftFieldConfig {
  KernelParams kernel;
  double epsilon = kDefaultEpsilon;  // barycenter denominator offset
  double epsilon_norm = 1e-8;  // multi-group normalization offset
  Estimator attraction = Estimator::Exact;
  /// Projected repulsion is the ablation mode: it reuses the attraction bases
  /// and summarizes the negatives afresh on every call.
  Estimator repulsion = Estimator::Exact;
  Conditioning conditioning = Conditioning::Unconditional;

  void validate() const;
};

/// Kernel-weighted barycenters and their (un-offset) kernel masses.
struct KernelMean {
  Matrix mean;  // B x D
  Vector mass;  // B
};

/// sum_l k(x_b, s_l) s_l / (sum_l k(x_b, s_l) + epsilon). With mask_self the
/// support must be the query set itself and the diagonal weight is zeroed.
/// The full B x N kernel matrix is materialized; its size is recorded as
/// repulsion_bytes when a ledger is given.
KernelMean exact_kernel_mean(const Matrix& queries, const Matrix& support, double tau, double epsilon,
                             bool mask_self, MemoryLedger* ledger = nullptr);

Matrix exact_attractive_mean(const FeatureSet& queries, const FeatureSet& positives, double tau,
                             double epsilon);

Matrix exact_repulsive_mean(const FeatureSet& queries, const FeatureSet& negatives, double tau,
                            double epsilon, bool mask_self);

/// A_p^T phi(x) / (phi(x)^T b_p + epsilon) composed over the bank's shards,
/// with the bank's epsilon. PerClass uses only the shard tagged with the
/// query's label.
Matrix projected_attractive_mean(const FeatureSet& queries, const ShardedSummaryBank& bank,
                                 Conditioning conditioning, std::span<const int> query_labels = {});

/// Projected-repulsion ablation: negatives are summarized on the bank's bases
/// (every shard for Unconditional, the label's shard for PerClass) and the
/// self term is subtracted when mask_self is set.
KernelMean projected_repulsive_mean(const Matrix& queries, const Matrix& negatives,
                                    const ShardedSummaryBank& bases, double epsilon, bool mask_self,
                                    std::optional<std::size_t> only_shard = std::nullopt);

struct FieldInputs {
  /// Exact attraction support.
  const FeatureSet* positives = nullptr;
  /// Projected attraction: one bank per temperature group, each built at that
  /// group's temperature.
  std::span<const ShardedSummaryBank> banks;
  /// Repulsion support. nullptr disables repulsion, leaving V = mu_p(x) - x.
  const FeatureSet* negatives = nullptr;
  bool mask_self = true;
  /// Query labels for PerClass conditioning.
  std::span<const int> query_labels;
  MemoryLedger* ledger = nullptr;
};

struct FieldEvaluation {
  Matrix drift;  // B x D, equals mu_attract - mu_repel
  Matrix mu_attract;
  Matrix mu_repel;
  Matrix attract_mass;  // B x groups
  Matrix repel_mass;  // B x groups
};

/// V_g = mu_attract,g - mu_repel,g per temperature group. A single group is
/// returned as is; several groups are combined as sum_g a_g V_g / (|V_g| +
/// epsilon_norm), with mu_attract and mu_repel scaled by the same per-query
/// factors so that drift == mu_attract - mu_repel still holds exactly.
FieldEvaluation drift_field(const FeatureSet& queries, const FieldInputs& inputs,
                            const DriftFieldConfig& config);

/// x_b + V(x_b).
Matrix drift_targets(const Matrix& queries, const FieldEvaluation& field);

}  // namespace driftx
