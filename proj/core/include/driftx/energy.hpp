#pragma once

#include "driftx/types.hpp"

namespace driftx {

/// V-statistic energy distance 2 E|a - b| - E|a - a'| - E|b - b'| over all
/// pairs. Zero when the two samples are equal as multisets.
double energy_distance(const Matrix& a, const Matrix& b);
double energy_distance(const FeatureSet& a, const FeatureSet& b);

}  // namespace driftx
