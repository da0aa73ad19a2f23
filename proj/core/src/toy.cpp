#include "driftx/toy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "driftx/error.hpp"
#include "driftx/random.hpp"

namespace driftx {
namespace {

constexpr int kBoardCells = 4;
constexpr int kSwissrollArms = 2;

}  // namespace

std::string_view to_string(ToyKind kind) {
  switch (kind) {
    case ToyKind::Swissroll: return "swissroll";
    case ToyKind::Checkerboard: return "checkerboard";
    case ToyKind::GaussianMixture: return "gmm";
  }
  return "?";
}

ToyKind parse_toy_kind(std::string_view name) {
  if (name == "swissroll") return ToyKind::Swissroll;
  if (name == "checkerboard") return ToyKind::Checkerboard;
  if (name == "gmm") return ToyKind::GaussianMixture;
  throw Error(ErrorCode::InvalidArgument, "unknown distribution '" + std::string(name) + "'");
}

void ToyDistribution::validate() const {
  if (!(noise >= 0.0) || !std::isfinite(noise)) throw Error(ErrorCode::InvalidArgument, "noise must be >= 0");
  if (!(board_extent > 0.0) || !std::isfinite(board_extent)) {
    throw Error(ErrorCode::InvalidArgument, "board extent must be > 0");
  }
  if (modes < 1) throw Error(ErrorCode::InvalidArgument, "mixture needs at least one mode");
  if (!(radius >= 0.0) || !std::isfinite(radius)) throw Error(ErrorCode::InvalidArgument, "radius must be >= 0");
  if (!(mode_stddev >= 0.0) || !std::isfinite(mode_stddev)) {
    throw Error(ErrorCode::InvalidArgument, "mode stddev must be >= 0");
  }
}

int ToyDistribution::num_classes() const noexcept {
  switch (kind) {
    case ToyKind::Swissroll: return kSwissrollArms;
    case ToyKind::Checkerboard: return kBoardCells * kBoardCells / 2;
    case ToyKind::GaussianMixture: return modes;
  }
  return 0;
}

int checkerboard_cell(double v, double extent) {
  const double width = 2.0 * extent / kBoardCells;
  const double t = (v + extent) / width;
  if (t < 0.0 || t > kBoardCells) return -1;
  return std::min(static_cast<int>(std::floor(t)), kBoardCells - 1);
}

FeatureSet sample_toy(const ToyDistribution& dist, Index n, Seed seed) {
  dist.validate();
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "sample count must be >= 1");
  Rng rng(seed);
  Matrix points(n, 2);
  std::vector<int> labels(static_cast<std::size_t>(n));
  constexpr double pi = std::numbers::pi;

  switch (dist.kind) {
    case ToyKind::Swissroll:
      for (Index i = 0; i < n; ++i) {
        const int arm = static_cast<int>(rng.below(kSwissrollArms));
        const double theta = pi / 2.0 + 3.0 * pi * rng.uniform();
        const double rho = 2.0 * theta / (3.5 * pi);
        const double angle = theta + arm * pi;
        points(i, 0) = rho * std::cos(angle) + dist.noise * rng.normal();
        points(i, 1) = rho * std::sin(angle) + dist.noise * rng.normal();
        labels[static_cast<std::size_t>(i)] = arm;
      }
      break;
    case ToyKind::Checkerboard: {
      const double width = 2.0 * dist.board_extent / kBoardCells;
      for (Index i = 0; i < n; ++i) {
        // Black cell c in 0..7: row j = c / 2, column i chosen so (i + j) is even.
        const int cell = static_cast<int>(rng.below(kBoardCells * kBoardCells / 2));
        const int row = cell / 2;
        const int col = 2 * (cell % 2) + (row % 2);
        points(i, 0) = -dist.board_extent + (col + rng.uniform()) * width;
        points(i, 1) = -dist.board_extent + (row + rng.uniform()) * width;
        labels[static_cast<std::size_t>(i)] = cell;
      }
      break;
    }
    case ToyKind::GaussianMixture:
      for (Index i = 0; i < n; ++i) {
        const int mode = static_cast<int>(rng.below(static_cast<std::uint64_t>(dist.modes)));
        const double angle = 2.0 * pi * mode / dist.modes;
        points(i, 0) = dist.radius * std::cos(angle) + dist.mode_stddev * rng.normal();
        points(i, 1) = dist.radius * std::sin(angle) + dist.mode_stddev * rng.normal();
        labels[static_cast<std::size_t>(i)] = mode;
      }
      break;
  }
  if (dist.labelled) return FeatureSet(std::move(points), std::move(labels), dist.num_classes());
  return FeatureSet(std::move(points));
}

}  // namespace driftx
