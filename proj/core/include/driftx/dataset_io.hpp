#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "driftx/landmarks.hpp"
#include "driftx/types.hpp"

namespace driftx {

/// Shortest text that round-trips a double (17 significant digits).
std::string format_real(double value);

// Dataset CSV: header `class,x0,...,x{D-1}`, one point per row. The class
// column is either empty on every row (unlabelled) or a non-negative integer
// on every row. Row width must match the header.

FeatureSet parse_dataset_csv(std::istream& in);
FeatureSet read_dataset_csv(const std::filesystem::path& path);
void write_dataset_csv(std::ostream& out, const FeatureSet& data);
void write_dataset_csv(const std::filesystem::path& path, const FeatureSet& data);
/// Writes raw points with an empty class column.
void write_points_csv(std::ostream& out, const Matrix& points);

// Landmark CSV: header `source_index,class,x0,...`; class empty when the
// source data is unlabelled.

void write_landmarks_csv(std::ostream& out, const LandmarkSet& landmarks);
void write_landmarks_csv(const std::filesystem::path& path, const LandmarkSet& landmarks);
LandmarkSet parse_landmarks_csv(std::istream& in);
LandmarkSet read_landmarks_csv(const std::filesystem::path& path);

}  // namespace driftx
