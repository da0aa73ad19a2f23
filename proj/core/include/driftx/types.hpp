#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace driftx {

using Index = Eigen::Index;
/// Points are stored one per row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

struct Seed {
  std::uint64_t value = 0;
};

/// N points in D dimensions, optionally labelled with class indices.
///
/// Invariants (checked on construction): N >= 1, D >= 1, every coordinate is
/// finite, and labels (when present) are non-negative, one per row and below
/// num_classes().
class FeatureSet {
 public:
  explicit FeatureSet(Matrix points);
  /// num_classes < 0 means "one past the largest label".
  FeatureSet(Matrix points, std::vector<int> labels, int num_classes = -1);

  Index size() const noexcept { return points_.rows(); }
  Index dim() const noexcept { return points_.cols(); }
  const Matrix& points() const noexcept { return points_; }
  auto row(Index i) const { return points_.row(i); }

  bool has_labels() const noexcept { return !labels_.empty(); }
  std::span<const int> labels() const noexcept { return labels_; }
  int label(Index i) const { return labels_.at(static_cast<std::size_t>(i)); }
  int num_classes() const noexcept { return num_classes_; }

  std::vector<Index> indices_of_class(int cls) const;
  /// Rows in the given order; labels follow their rows.
  FeatureSet subset(std::span<const Index> indices) const;

 private:
  void validate() const;

  Matrix points_;
  std::vector<int> labels_;
  int num_classes_ = 0;
};

}  // namespace driftx
