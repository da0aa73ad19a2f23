#pragma once

#include <optional>
#include <vector>

#include "driftx/nystrom.hpp"
#include "driftx/types.hpp"

namespace driftx {

/// Mean over rows of the cosine between exact and projected drift vectors.
/// Throws if any row of either matrix has zero norm.
double cosine_fidelity(const Matrix& v_exact, const Matrix& v_proj);
/// ||V_proj - V_exact||_F / ||V_exact||_F.
double relative_l2_fidelity(const Matrix& v_exact, const Matrix& v_proj);
/// Mean squared difference of the drift targets x + V(x) over B*D entries.
double target_mse(const Matrix& queries, const Matrix& v_exact, const Matrix& v_proj);

/// Per-query check of the local distortion bound
///   |V_U(x) - V(x)| <= 4 R |r_U(x)| / (sqrt(N) d_p(x))
/// which is guaranteed whenever |r_U(x)| <= sqrt(N) d_p(x) / 2.
struct BoundDiagnostic {
  double residual_norm = 0.0;  // |r_U(x)|_2
  double kernel_mass = 0.0;  // d_p(x)
  bool condition_holds = false;
  double bound_value = 0.0;
  double actual_error = 0.0;
  double data_radius = 0.0;

  /// True when the premise fails (no claim) or the bound is respected.
  bool satisfied() const noexcept { return !condition_holds || actual_error <= bound_value; }
};

/// The projected kernel between a query and positive j. For a bank with
/// several shards, positive j uses the shard tagged with its label, which is
/// the kernel the sharded summaries realize.
class ProjectedKernelSource {
 public:
  explicit ProjectedKernelSource(const NystromBasis& basis) : basis_(&basis) {}
  explicit ProjectedKernelSource(const ShardedSummaryBank& bank) : bank_(&bank) {}

  /// B x N matrix of k_U(q_b, y_j).
  Matrix cross(const Matrix& queries, const FeatureSet& positives) const;

 private:
  const NystromBasis* basis_ = nullptr;
  const ShardedSummaryBank* bank_ = nullptr;
};

/// Means in the check use no epsilon offset. data_radius defaults to
/// max_j |y_j|. Throws if d_p(x) < 1e-300.
BoundDiagnostic verify_local_bound(const Eigen::Ref<const RowVector>& query, const FeatureSet& positives,
                                   const ProjectedKernelSource& kernel, double tau,
                                   std::optional<double> data_radius = std::nullopt);
std::vector<BoundDiagnostic> verify_local_bounds(const Matrix& queries, const FeatureSet& positives,
                                                 const ProjectedKernelSource& kernel, double tau,
                                                 std::optional<double> data_radius = std::nullopt);

struct OnSupportCheck {
  double lhs = 0.0;  // mean_i |V_U(y_i) - V(y_i)|^2
  double rhs = 0.0;  // 16 R^2 |K - K_U|_F^2 / (N^2 kappa_min^2)
  bool condition_holds = false;  // |K - K_U|_{2,inf} <= sqrt(N) kappa_min / 2
  double gram_error_fro = 0.0;
  double gram_error_2inf = 0.0;
  double kappa_min = 0.0;
  double data_radius = 0.0;

  bool satisfied() const noexcept { return !condition_holds || lhs <= rhs; }
};

OnSupportCheck verify_on_support_bound(const FeatureSet& positives, const ProjectedKernelSource& kernel,
                                       double tau);

/// |K - K_U|_F over the positives (the Gram approximation error).
double gram_error_fro(const FeatureSet& positives, const ProjectedKernelSource& kernel, double tau);

struct FidelityReport {
  double cosine_similarity = 0.0;
  double relative_l2_error = 0.0;
  double target_mse = 0.0;
  std::vector<BoundDiagnostic> per_query;
  std::size_t premise_holds = 0;
  std::size_t bound_satisfied = 0;
  std::size_t bound_violated = 0;
};

/// Compares the exact attractive field V+(x) = mu_p(x) - x over `positives`
/// with the bank's projected attractive field at every query, and attaches
/// the per-query bound diagnostics.
FidelityReport fidelity_report(const FeatureSet& queries, const FeatureSet& positives,
                               const ShardedSummaryBank& bank, double tau);

}  // namespace driftx
