#include "driftx/kernel.hpp"

#include <string>

#include "driftx/error.hpp"
#include "driftx/parallel.hpp"

namespace driftx {

namespace detail {

void require_positive_tau(double tau) {
  if (!std::isfinite(tau) || tau <= 0.0) {
    throw Error(ErrorCode::InvalidArgument, "kernel temperature must be finite and positive, got " +
                                                std::to_string(tau));
  }
}

}  // namespace detail

void KernelParams::validate() const {
  if (temperatures.empty()) throw Error(ErrorCode::InvalidArgument, "at least one temperature is required");
  if (group_weights.size() != temperatures.size()) {
    throw Error(ErrorCode::InvalidArgument, "need one group weight per temperature");
  }
  bool any_positive = false;
  for (std::size_t g = 0; g < temperatures.size(); ++g) {
    detail::require_positive_tau(temperatures[g]);
    if (!std::isfinite(group_weights[g]) || group_weights[g] < 0.0) {
      throw Error(ErrorCode::InvalidArgument, "group weights must be finite and non-negative");
    }
    any_positive = any_positive || group_weights[g] > 0.0;
  }
  if (!any_positive) throw Error(ErrorCode::InvalidArgument, "at least one group weight must be positive");
}

double laplace_kernel(const Eigen::Ref<const RowVector>& x, const Eigen::Ref<const RowVector>& y,
                      double tau) {
  detail::require_positive_tau(tau);
  if (x.size() != y.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                std::to_string(x.size()) + " vs " + std::to_string(y.size()));
  }
  if (!x.allFinite() || !y.allFinite()) throw Error(ErrorCode::NonFinite, "kernel input is not finite");
  return detail::laplace(x.data(), y.data(), x.size(), tau);
}

Matrix kernel_matrix(const Matrix& a, const Matrix& b, double tau) {
  detail::require_positive_tau(tau);
  if (a.cols() != b.cols()) {
    throw Error(ErrorCode::DimensionMismatch,
                "kernel_matrix over D=" + std::to_string(a.cols()) + " and D=" + std::to_string(b.cols()));
  }
  Matrix k(a.rows(), b.rows());
  const Index dim = a.cols();
  parallel_for(a.rows(), [&](Index begin, Index end) {
    for (Index i = begin; i < end; ++i) {
      const double* x = a.row(i).data();
      for (Index j = 0; j < b.rows(); ++j) k(i, j) = detail::laplace(x, b.row(j).data(), dim, tau);
    }
  });
  return k;
}

Matrix kernel_matrix(const FeatureSet& a, const FeatureSet& b, double tau) {
  return kernel_matrix(a.points(), b.points(), tau);
}

}  // namespace driftx
