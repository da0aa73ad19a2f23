#include "driftx/fidelity.hpp"

#include <cmath>
#include <string>

#include "driftx/error.hpp"
#include "driftx/field.hpp"
#include "driftx/kernel.hpp"

namespace driftx {
namespace {

void require_same_shape(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "field matrices differ in shape");
  }
}

double max_norm(const Matrix& points) { return points.rowwise().norm().maxCoeff(); }

// Weighted barycenter of the positives without an epsilon offset.
RowVector barycenter(const Eigen::Ref<const RowVector>& weights, const Matrix& points) {
  return (weights * points) / weights.sum();
}

}  // namespace

double cosine_fidelity(const Matrix& v_exact, const Matrix& v_proj) {
  require_same_shape(v_exact, v_proj);
  double total = 0.0;
  for (Index b = 0; b < v_exact.rows(); ++b) {
    const double ne = v_exact.row(b).norm();
    const double np = v_proj.row(b).norm();
    if (ne == 0.0 || np == 0.0) {
      throw Error(ErrorCode::InvalidArgument, "zero-norm drift vector at row " + std::to_string(b));
    }
    total += v_exact.row(b).dot(v_proj.row(b)) / (ne * np);
  }
  return total / static_cast<double>(v_exact.rows());
}

double relative_l2_fidelity(const Matrix& v_exact, const Matrix& v_proj) {
  require_same_shape(v_exact, v_proj);
  const double denom = v_exact.norm();
  if (denom == 0.0) throw Error(ErrorCode::InvalidArgument, "exact field is identically zero");
  return (v_proj - v_exact).norm() / denom;
}

double target_mse(const Matrix& queries, const Matrix& v_exact, const Matrix& v_proj) {
  require_same_shape(v_exact, v_proj);
  require_same_shape(queries, v_exact);
  const Matrix t_exact = queries + v_exact;
  const Matrix t_proj = queries + v_proj;
  return (t_proj - t_exact).squaredNorm() / static_cast<double>(queries.size());
}

Matrix ProjectedKernelSource::cross(const Matrix& queries, const FeatureSet& positives) const {
  if (basis_) return basis_->feature_matrix(queries) * basis_->feature_matrix(positives.points()).transpose();
  const auto& shards = bank_->shards();
  if (shards.size() == 1) {
    const auto& basis = shards.front().basis;
    return basis.feature_matrix(queries) * basis.feature_matrix(positives.points()).transpose();
  }
  if (!positives.has_labels()) {
    throw Error(ErrorCode::InvalidArgument, "a multi-shard bank needs labelled positives to assign shards");
  }
  Matrix out(queries.rows(), positives.size());
  for (const auto& shard : shards) {
    if (!shard.summary.class_id()) {
      throw Error(ErrorCode::MissingShard, "multi-shard bank has an untagged shard");
    }
    const auto members = positives.indices_of_class(*shard.summary.class_id());
    if (members.empty()) continue;
    const Matrix kq = shard.basis.feature_matrix(queries) *
                      shard.basis.feature_matrix(positives.subset(members).points()).transpose();
    for (std::size_t k = 0; k < members.size(); ++k) out.col(members[k]) = kq.col(static_cast<Index>(k));
  }
  for (Index j = 0; j < positives.size(); ++j) {
    if (!bank_->shard_for_class(positives.label(j))) {
      throw Error(ErrorCode::MissingShard, "no shard for class " + std::to_string(positives.label(j)));
    }
  }
  return out;
}

std::vector<BoundDiagnostic> verify_local_bounds(const Matrix& queries, const FeatureSet& positives,
                                                 const ProjectedKernelSource& kernel, double tau,
                                                 std::optional<double> data_radius) {
  if (queries.cols() != positives.dim()) throw Error(ErrorCode::DimensionMismatch, "queries vs positives");
  const Matrix& y = positives.points();
  const double n = static_cast<double>(positives.size());
  const double radius = data_radius.value_or(max_norm(y));
  const Matrix k = kernel_matrix(queries, y, tau);
  const Matrix ku = kernel.cross(queries, positives);
  std::vector<BoundDiagnostic> out;
  out.reserve(static_cast<std::size_t>(queries.rows()));
  for (Index b = 0; b < queries.rows(); ++b) {
    BoundDiagnostic d;
    d.data_radius = radius;
    d.kernel_mass = k.row(b).sum() / n;
    if (d.kernel_mass < 1e-300) {
      throw Error(ErrorCode::NumericalFailure, "kernel mass vanishes at query " + std::to_string(b));
    }
    d.residual_norm = (k.row(b) - ku.row(b)).norm();
    d.condition_holds = d.residual_norm <= std::sqrt(n) * d.kernel_mass / 2.0;
    d.bound_value = 4.0 * radius * d.residual_norm / (std::sqrt(n) * d.kernel_mass);
    // V_U - V = mu_U - mu; the query itself cancels.
    d.actual_error = (barycenter(ku.row(b), y) - barycenter(k.row(b), y)).norm();
    out.push_back(d);
  }
  return out;
}

BoundDiagnostic verify_local_bound(const Eigen::Ref<const RowVector>& query, const FeatureSet& positives,
                                   const ProjectedKernelSource& kernel, double tau,
                                   std::optional<double> data_radius) {
  Matrix q = query;
  return verify_local_bounds(q, positives, kernel, tau, data_radius).front();
}

OnSupportCheck verify_on_support_bound(const FeatureSet& positives, const ProjectedKernelSource& kernel,
                                       double tau) {
  const Matrix& y = positives.points();
  const double n = static_cast<double>(positives.size());
  const Matrix k = kernel_matrix(y, y, tau);
  const Matrix ku = kernel.cross(y, positives);
  const Matrix diff = k - ku;
  OnSupportCheck out;
  out.data_radius = max_norm(y);
  out.kappa_min = k.rowwise().sum().minCoeff() / n;
  out.gram_error_fro = diff.norm();
  out.gram_error_2inf = diff.rowwise().norm().maxCoeff();
  out.condition_holds = out.gram_error_2inf <= std::sqrt(n) * out.kappa_min / 2.0;
  out.rhs = 16.0 * out.data_radius * out.data_radius * out.gram_error_fro * out.gram_error_fro /
            (n * n * out.kappa_min * out.kappa_min);
  double acc = 0.0;
  for (Index i = 0; i < y.rows(); ++i) {
    acc += (barycenter(ku.row(i), y) - barycenter(k.row(i), y)).squaredNorm();
  }
  out.lhs = acc / n;
  return out;
}

double gram_error_fro(const FeatureSet& positives, const ProjectedKernelSource& kernel, double tau) {
  const Matrix& y = positives.points();
  return (kernel_matrix(y, y, tau) - kernel.cross(y, positives)).norm();
}

FidelityReport fidelity_report(const FeatureSet& queries, const FeatureSet& positives,
                               const ShardedSummaryBank& bank, double tau) {
  const Matrix& x = queries.points();
  const Matrix v_exact = exact_attractive_mean(queries, positives, tau, bank.epsilon()) - x;
  const Matrix v_proj = projected_attractive_mean(queries, bank, Conditioning::Unconditional) - x;
  FidelityReport report;
  report.cosine_similarity = cosine_fidelity(v_exact, v_proj);
  report.relative_l2_error = relative_l2_fidelity(v_exact, v_proj);
  report.target_mse = target_mse(x, v_exact, v_proj);
  report.per_query = verify_local_bounds(x, positives, ProjectedKernelSource(bank), tau);
  for (const auto& d : report.per_query) {
    if (!d.condition_holds) continue;
    ++report.premise_holds;
    if (d.satisfied()) {
      ++report.bound_satisfied;
    } else {
      ++report.bound_violated;
    }
  }
  return report;
}

}  // namespace driftx
