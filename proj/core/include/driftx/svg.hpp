#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "driftx/types.hpp"

namespace driftx {

struct ScatterLayer {
  Matrix points;  // N x 2
  std::string color;  // any SVG color string
};

inline constexpr int kSvgViewport = 800;
inline constexpr double kSvgExtent = 2.5;

/// Standalone 800 x 800 SVG over [-2.5, 2.5]^2: one radius-2 circle per point,
/// layers drawn in order. Throws unless every layer is 2D.
void emit_svg_scatter(std::ostream& out, const std::vector<ScatterLayer>& layers);
void emit_svg_scatter(const std::filesystem::path& path, const std::vector<ScatterLayer>& layers);

}  // namespace driftx
