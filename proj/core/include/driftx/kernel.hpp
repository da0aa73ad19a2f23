#pragma once

#include <cmath>
#include <vector>

#include "driftx/types.hpp"

namespace driftx {

/// Temperatures and aggregation weights for one or more kernel groups.
struct KernelParams {
  std::vector<double> temperatures{0.5};
  std::vector<double> group_weights{1.0};

  /// Throws unless every temperature is finite and positive, the weight list
  /// matches, weights are non-negative and at least one is positive.
  void validate() const;
  std::size_t groups() const noexcept { return temperatures.size(); }
};

/// exp(-||x - y||_2 / tau). Throws on dimension mismatch, non-finite input or
/// tau <= 0.
double laplace_kernel(const Eigen::Ref<const RowVector>& x, const Eigen::Ref<const RowVector>& y,
                      double tau);

/// |A| x |B| matrix of Laplace kernel values.
Matrix kernel_matrix(const FeatureSet& a, const FeatureSet& b, double tau);
Matrix kernel_matrix(const Matrix& a, const Matrix& b, double tau);

namespace detail {

inline double euclidean_distance(const double* x, const double* y, Index dim) noexcept {
  double acc = 0.0;
  for (Index k = 0; k < dim; ++k) {
    const double d = x[k] - y[k];
    acc += d * d;
  }
  return std::sqrt(acc);
}

inline double laplace(const double* x, const double* y, Index dim, double tau) noexcept {
  return std::exp(-euclidean_distance(x, y, dim) / tau);
}

void require_positive_tau(double tau);

}  // namespace detail
}  // namespace driftx
