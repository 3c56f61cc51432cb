#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hjb/rate_control.hpp"

namespace hjb {

/// Shortest round-trip-safe form: 17 significant digits.
std::string format_double(double v);

/// Writes `content` to `<path>.tmp` and renames it over `path`. Throws
/// std::runtime_error naming the path on any I/O failure.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// `r,rate` table of rho on the given radii.
void write_rate_csv(std::ostream& os, const RateSeries& rate, std::span<const double> radii);

struct SvgSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct SvgPlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<SvgSeries> series;
  /// Optional dashed horizontal rule (e.g. the stopping radius).
  bool has_hline = false;
  double hline = 0.0;
};

/// Self-contained polyline chart; no external plotting dependency.
std::string render_svg(const SvgPlot& plot);

}  // namespace hjb
