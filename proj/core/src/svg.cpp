#include "driftx/svg.hpp"

#include <fstream>
#include <ostream>

#include <fmt/format.h>

#include "driftx/error.hpp"

namespace driftx {

void emit_svg_scatter(std::ostream& out, const std::vector<ScatterLayer>& layers) {
  for (const auto& layer : layers) {
    if (layer.points.cols() != 2 && layer.points.rows() > 0) {
      throw Error(ErrorCode::DimensionMismatch, "scatter plots need 2D points");
    }
  }
  const double scale = kSvgViewport / (2.0 * kSvgExtent);
  out << fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{0}\" viewBox=\"0 0 {0} {0}\">\n",
      kSvgViewport);
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (const auto& layer : layers) {
    out << fmt::format("<g fill=\"{}\">\n", layer.color);
    for (Index i = 0; i < layer.points.rows(); ++i) {
      const double px = (layer.points(i, 0) + kSvgExtent) * scale;
      const double py = (kSvgExtent - layer.points(i, 1)) * scale;
      out << fmt::format("<circle cx=\"{:.3f}\" cy=\"{:.3f}\" r=\"2\"/>\n", px, py);
    }
    out << "</g>\n";
  }
  out << "</svg>\n";
}

void emit_svg_scatter(const std::filesystem::path& path, const std::vector<ScatterLayer>& layers) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  emit_svg_scatter(out, layers);
}

}  // namespace driftx
