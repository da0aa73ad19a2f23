#include "driftx/energy.hpp"

#include "driftx/error.hpp"
#include "driftx/kernel.hpp"
#include "driftx/parallel.hpp"

namespace driftx {
namespace {

// Mean pairwise distance. Row sums land in a per-row buffer and are reduced
// sequentially so the result does not depend on the thread count.
double mean_distance(const Matrix& a, const Matrix& b) {
  Vector row_sums(a.rows());
  parallel_for(a.rows(), [&](Index begin, Index end) {
    for (Index i = begin; i < end; ++i) {
      double acc = 0.0;
      for (Index j = 0; j < b.rows(); ++j) {
        acc += detail::euclidean_distance(a.row(i).data(), b.row(j).data(), a.cols());
      }
      row_sums(i) = acc;
    }
  });
  double total = 0.0;
  for (Index i = 0; i < a.rows(); ++i) total += row_sums(i);
  return total / (static_cast<double>(a.rows()) * static_cast<double>(b.rows()));
}

}  // namespace

double energy_distance(const Matrix& a, const Matrix& b) {
  if (a.rows() == 0 || b.rows() == 0) throw Error(ErrorCode::InvalidArgument, "energy distance of an empty sample");
  if (a.cols() != b.cols()) throw Error(ErrorCode::DimensionMismatch, "energy distance samples differ in dimension");
  return 2.0 * mean_distance(a, b) - mean_distance(a, a) - mean_distance(b, b);
}

double energy_distance(const FeatureSet& a, const FeatureSet& b) { return energy_distance(a.points(), b.points()); }

}  // namespace driftx
