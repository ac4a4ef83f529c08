#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace kpo {

/// Shortest round-trip text for a double: 17 significant digits.
std::string format_number(double v);

/// Numeric table with an optional leading "# key=value, ..." metadata line.
struct CsvTable {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const;
};

std::string to_csv(const CsvTable& table);
CsvTable parse_csv(const std::string& text);

/// Whole-file helpers; failures raise ErrorCode::io.
void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

struct HeatmapStyle {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::string value_label;
  double x_min = 0, x_max = 1;
  double y_min = 0, y_max = 1;
  /// Symmetric blue-white-red scale around zero instead of a sequential one.
  bool diverging = false;
};

/// values(i, j): row i is the y index (bottom to top), column j the x index.
std::string svg_heatmap(const Eigen::MatrixXd& values, const HeatmapStyle& style);

/// Two stacked bar panels (real and imaginary part) sharing the labels.
std::string svg_bar_panels(const std::string& title, const std::vector<std::string>& labels,
                           const std::vector<double>& real, const std::vector<double>& imag);

/// Simple multi-series line plot.
struct LineSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};
std::string svg_lines(const std::string& title, const std::string& x_label, const std::string& y_label,
                      const std::vector<LineSeries>& series);

}  // namespace kpo
