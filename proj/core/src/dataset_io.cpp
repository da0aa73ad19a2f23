#include "driftx/dataset_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "driftx/error.hpp"

namespace driftx {
namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string_view chomp(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

[[noreturn]] void fail(std::size_t line_no, const std::string& what) {
  throw Error(ErrorCode::Parse, fmt::format("line {}: {}", line_no, what));
}

double parse_real(std::string_view field, std::size_t line_no) {
  double value = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (field.empty() || ec != std::errc{} || ptr != end) fail(line_no, fmt::format("bad number '{}'", field));
  if (!std::isfinite(value)) fail(line_no, "non-finite coordinate");
  return value;
}

template <typename Int>
Int parse_int(std::string_view field, std::size_t line_no) {
  Int value{};
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (field.empty() || ec != std::errc{} || ptr != end || value < 0) {
    fail(line_no, fmt::format("bad non-negative integer '{}'", field));
  }
  return value;
}

// Expects leading columns named `lead...` followed by x0..x{D-1}; returns D.
Index check_header(std::string_view header, std::initializer_list<std::string_view> lead) {
  const auto cols = split(chomp(header));
  if (cols.size() <= lead.size()) fail(1, "header has no coordinate columns");
  std::size_t c = 0;
  for (auto name : lead) {
    if (cols[c] != name) fail(1, fmt::format("expected column '{}', got '{}'", name, cols[c]));
    ++c;
  }
  for (std::size_t k = 0; c < cols.size(); ++c, ++k) {
    if (cols[c] != fmt::format("x{}", k)) fail(1, fmt::format("expected column 'x{}', got '{}'", k, cols[c]));
  }
  return static_cast<Index>(cols.size() - lead.size());
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return in;
}

void write_coords(std::ostream& out, const Matrix& points, Index i) {
  for (Index k = 0; k < points.cols(); ++k) out << ',' << format_real(points(i, k));
  out << '\n';
}

void write_coord_header(std::ostream& out, Index dim) {
  for (Index k = 0; k < dim; ++k) out << ",x" << k;
  out << '\n';
}

// Labels are all-or-nothing across rows.
struct LabelColumn {
  std::vector<int> values;
  std::optional<bool> present;

  void add(std::string_view field, std::size_t line_no) {
    const bool has = !field.empty();
    if (present && *present != has) fail(line_no, "class column must be filled on every row or on none");
    present = has;
    if (has) values.push_back(parse_int<int>(field, line_no));
  }
};

}  // namespace

std::string format_real(double value) { return fmt::format("{:.17g}", value); }

FeatureSet parse_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::Parse, "empty dataset file");
  const Index dim = check_header(line, {"class"});
  std::vector<double> coords;
  LabelColumn labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto row = chomp(line);
    if (row.empty()) continue;
    const auto fields = split(row);
    if (static_cast<Index>(fields.size()) != dim + 1) {
      fail(line_no, fmt::format("expected {} columns, got {}", dim + 1, fields.size()));
    }
    labels.add(fields[0], line_no);
    for (Index k = 0; k < dim; ++k) coords.push_back(parse_real(fields[static_cast<std::size_t>(k) + 1], line_no));
  }
  const Index n = static_cast<Index>(coords.size()) / dim;
  if (n == 0) throw Error(ErrorCode::Parse, "dataset has no rows");
  Matrix points = Eigen::Map<Matrix>(coords.data(), n, dim);
  if (labels.present.value_or(false)) return FeatureSet(std::move(points), std::move(labels.values));
  return FeatureSet(std::move(points));
}

FeatureSet read_dataset_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  return parse_dataset_csv(in);
}

void write_dataset_csv(std::ostream& out, const FeatureSet& data) {
  out << "class";
  write_coord_header(out, data.dim());
  for (Index i = 0; i < data.size(); ++i) {
    if (data.has_labels()) out << data.label(i);
    write_coords(out, data.points(), i);
  }
}

void write_dataset_csv(const std::filesystem::path& path, const FeatureSet& data) {
  auto out = open_out(path);
  write_dataset_csv(out, data);
}

void write_points_csv(std::ostream& out, const Matrix& points) {
  out << "class";
  write_coord_header(out, points.cols());
  for (Index i = 0; i < points.rows(); ++i) write_coords(out, points, i);
}

void write_landmarks_csv(std::ostream& out, const LandmarkSet& landmarks) {
  out << "source_index,class";
  write_coord_header(out, landmarks.dim());
  for (Index i = 0; i < landmarks.size(); ++i) {
    out << landmarks.source_indices[static_cast<std::size_t>(i)] << ',';
    if (!landmarks.classes.empty()) out << landmarks.classes[static_cast<std::size_t>(i)];
    write_coords(out, landmarks.points, i);
  }
}

void write_landmarks_csv(const std::filesystem::path& path, const LandmarkSet& landmarks) {
  auto out = open_out(path);
  write_landmarks_csv(out, landmarks);
}

LandmarkSet parse_landmarks_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::Parse, "empty landmark file");
  const Index dim = check_header(line, {"source_index", "class"});
  LandmarkSet out;
  std::vector<double> coords;
  LabelColumn labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto row = chomp(line);
    if (row.empty()) continue;
    const auto fields = split(row);
    if (static_cast<Index>(fields.size()) != dim + 2) {
      fail(line_no, fmt::format("expected {} columns, got {}", dim + 2, fields.size()));
    }
    out.source_indices.push_back(parse_int<Index>(fields[0], line_no));
    labels.add(fields[1], line_no);
    for (Index k = 0; k < dim; ++k) coords.push_back(parse_real(fields[static_cast<std::size_t>(k) + 2], line_no));
  }
  const Index r = static_cast<Index>(out.source_indices.size());
  if (r == 0) throw Error(ErrorCode::Parse, "landmark file has no rows");
  out.points = Eigen::Map<Matrix>(coords.data(), r, dim);
  out.classes = std::move(labels.values);
  return out;
}

LandmarkSet read_landmarks_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  return parse_landmarks_csv(in);
}

}  // namespace driftx
