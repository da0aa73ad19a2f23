#include <algorithm>
#include <string>

#include "driftx/error.hpp"
#include "driftx/types.hpp"

namespace driftx {

FeatureSet::FeatureSet(Matrix points) : points_(std::move(points)) { validate(); }

FeatureSet::FeatureSet(Matrix points, std::vector<int> labels, int num_classes)
    : points_(std::move(points)), labels_(std::move(labels)), num_classes_(num_classes) {
  if (num_classes_ < 0 && !labels_.empty()) {
    num_classes_ = *std::max_element(labels_.begin(), labels_.end()) + 1;
  }
  if (num_classes_ < 0) num_classes_ = 0;
  validate();
}

void FeatureSet::validate() const {
  if (points_.rows() < 1 || points_.cols() < 1) {
    throw Error(ErrorCode::InvalidArgument, "feature set needs at least one point and one dimension");
  }
  if (!points_.allFinite()) {
    throw Error(ErrorCode::NonFinite, "feature set contains a non-finite coordinate");
  }
  if (labels_.empty()) return;
  if (static_cast<Index>(labels_.size()) != points_.rows()) {
    throw Error(ErrorCode::DimensionMismatch,
                "expected " + std::to_string(points_.rows()) + " labels, got " +
                    std::to_string(labels_.size()));
  }
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] < 0 || labels_[i] >= num_classes_) {
      throw Error(ErrorCode::InvalidArgument,
                  "label " + std::to_string(labels_[i]) + " at row " + std::to_string(i) +
                      " outside [0, " + std::to_string(num_classes_) + ")");
    }
  }
}

std::vector<Index> FeatureSet::indices_of_class(int cls) const {
  std::vector<Index> out;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] == cls) out.push_back(static_cast<Index>(i));
  }
  return out;
}

FeatureSet FeatureSet::subset(std::span<const Index> indices) const {
  Matrix pts(static_cast<Index>(indices.size()), dim());
  std::vector<int> labs;
  if (has_labels()) labs.reserve(indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const Index i = indices[k];
    if (i < 0 || i >= size()) {
      throw Error(ErrorCode::InvalidArgument, "subset index " + std::to_string(i) + " out of range");
    }
    pts.row(static_cast<Index>(k)) = points_.row(i);
    if (has_labels()) labs.push_back(labels_[static_cast<std::size_t>(i)]);
  }
  if (has_labels()) return FeatureSet(std::move(pts), std::move(labs), num_classes_);
  return FeatureSet(std::move(pts));
}

}  // namespace driftx
