#pragma once

#include <string_view>

#include "driftx/types.hpp"

namespace driftx {

enum class ToyKind { Swissroll, Checkerboard, GaussianMixture };

std::string_view to_string(ToyKind kind);
/// "swissroll", "checkerboard" or "gmm".
ToyKind parse_toy_kind(std::string_view name);

struct ToyDistribution {
  ToyKind kind = ToyKind::Checkerboard;
  /// Swissroll: Gaussian jitter added to the spiral.
  double noise = 0.05;
  /// Checkerboard: 4 x 4 board on [-extent, extent]^2, black cells have even i + j.
  double board_extent = 2.0;
  /// Gaussian mixture: modes equally spaced on a circle.
  int modes = 8;
  double radius = 1.5;
  double mode_stddev = 0.1;
  /// Label each point with its arm, black cell (0..7) or mixture mode.
  bool labelled = false;

  void validate() const;
  int num_classes() const noexcept;
};

FeatureSet sample_toy(const ToyDistribution& dist, Index n, Seed seed);

/// Index of the checkerboard cell column/row containing v, or -1 off the board.
int checkerboard_cell(double v, double extent);

}  // namespace driftx
