#include "kpo/io.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "kpo/error.hpp"

namespace kpo {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(17) << v;
  return os.str();
}

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) fail(ErrorCode::io, "CSV has no column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

std::string to_csv(const CsvTable& table) {
  std::ostringstream os;
  if (!table.metadata.empty()) {
    os << "# ";
    for (std::size_t i = 0; i < table.metadata.size(); ++i) {
      if (i) os << ", ";
      os << table.metadata[i].first << '=' << table.metadata[i].second;
    }
    os << '\n';
  }
  for (std::size_t i = 0; i < table.header.size(); ++i) os << (i ? "," : "") << table.header[i];
  os << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_number(row[i]);
    os << '\n';
  }
  return os.str();
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& cell) {
  const std::string s = trim(cell);
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  std::istringstream is(s);
  is.imbue(std::locale::classic());
  double v = 0;
  is >> v;
  if (!is || !is.eof()) fail(ErrorCode::io, "CSV cell '" + s + "' is not a number");
  return v;
}

}  // namespace

CsvTable parse_csv(const std::string& text) {
  CsvTable table;
  std::istringstream is(text);
  std::string line;
  bool have_header = false;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0 && !have_header) {
      for (const auto& item : split(line.substr(2), ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) fail(ErrorCode::io, "bad CSV metadata item '" + item + "'");
        table.metadata.emplace_back(trim(item.substr(0, eq)), trim(item.substr(eq + 1)));
      }
      continue;
    }
    if (!have_header) {
      for (const auto& c : split(line, ',')) table.header.push_back(trim(c));
      have_header = true;
      continue;
    }
    std::vector<double> row;
    for (const auto& c : split(line, ',')) row.push_back(parse_number(c));
    if (row.size() != table.header.size()) fail(ErrorCode::io, "CSV row width does not match header");
    table.rows.push_back(std::move(row));
  }
  if (!have_header) fail(ErrorCode::io, "CSV has no header");
  return table;
}

void write_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  if (ec) fail(ErrorCode::io, "cannot create directory '" + p.parent_path().string() + "': " + ec.message());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::io, "cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  if (!out) fail(ErrorCode::io, "write to '" + path + "' failed");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// SVG

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fmt(double v, int digits = 4) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(digits) << v;
  return os.str();
}

std::string rgb(double r, double g, double b) {
  auto c = [](double x) { return static_cast<int>(std::lround(255.0 * std::clamp(x, 0.0, 1.0))); };
  std::ostringstream os;
  os << "rgb(" << c(r) << ',' << c(g) << ',' << c(b) << ')';
  return os.str();
}

// u in [0, 1]
std::string sequential(double u) {
  // Dark blue -> teal -> yellow, a rough perceptual ramp.
  const double r = std::clamp(1.6 * u - 0.4, 0.0, 1.0);
  const double g = std::clamp(0.15 + 0.8 * u, 0.0, 1.0);
  const double b = std::clamp(0.55 + 0.4 * u - 0.9 * u * u, 0.0, 1.0);
  return rgb(r, g, b);
}

// u in [-1, 1]
std::string diverging(double u) {
  u = std::clamp(u, -1.0, 1.0);
  if (u >= 0) return rgb(1.0, 1.0 - 0.85 * u, 1.0 - 0.85 * u);
  return rgb(1.0 + 0.85 * u, 1.0 + 0.85 * u, 1.0);
}

}  // namespace

std::string svg_heatmap(const Eigen::MatrixXd& values, const HeatmapStyle& style) {
  const int width = 560;
  const int height = 460;
  const int left = 70, right = 110, top = 40, bottom = 60;
  const double pw = width - left - right;
  const double ph = height - top - bottom;
  const auto rows = values.rows();
  const auto cols = values.cols();
  double lo = values.size() ? values.minCoeff() : 0.0;
  double hi = values.size() ? values.maxCoeff() : 1.0;
  if (style.diverging) {
    const double m = std::max(std::abs(lo), std::abs(hi));
    lo = -m;
    hi = m;
  }
  if (!(hi > lo)) hi = lo + 1.0;

  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
     << escape(style.title) << "</text>\n";
  const double cw = pw / static_cast<double>(std::max<Eigen::Index>(cols, 1));
  const double ch = ph / static_cast<double>(std::max<Eigen::Index>(rows, 1));
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      const double v = values(i, j);
      const std::string color = style.diverging ? diverging(v / hi) : sequential((v - lo) / (hi - lo));
      const double x = left + j * cw;
      const double y = top + ph - (i + 1) * ch;
      os << "<rect x=\"" << fmt(x, 6) << "\" y=\"" << fmt(y, 6) << "\" width=\"" << fmt(cw + 0.3, 6)
         << "\" height=\"" << fmt(ch + 0.3, 6) << "\" fill=\"" << color << "\"/>\n";
    }
  }
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double fx = style.x_min + (style.x_max - style.x_min) * k / 4.0;
    const double fy = style.y_min + (style.y_max - style.y_min) * k / 4.0;
    const double px = left + pw * k / 4.0;
    const double py = top + ph - ph * k / 4.0;
    os << "<text x=\"" << fmt(px, 6) << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"middle\">"
       << fmt(fx) << "</text>\n";
    os << "<text x=\"" << left - 6 << "\" y=\"" << fmt(py + 4, 6) << "\" text-anchor=\"end\">" << fmt(fy)
       << "</text>\n";
  }
  os << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 18 << "\" text-anchor=\"middle\">"
     << escape(style.x_label) << "</text>\n";
  os << "<text transform=\"translate(18," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
     << escape(style.y_label) << "</text>\n";
  // Colour bar.
  const double bx = left + pw + 25;
  const int steps = 50;
  for (int k = 0; k < steps; ++k) {
    const double u = (k + 0.5) / steps;
    const double v = lo + u * (hi - lo);
    const std::string color = style.diverging ? diverging(v / hi) : sequential(u);
    os << "<rect x=\"" << fmt(bx, 6) << "\" y=\"" << fmt(top + ph - (k + 1) * ph / steps, 6)
       << "\" width=\"16\" height=\"" << fmt(ph / steps + 0.3, 6) << "\" fill=\"" << color << "\"/>\n";
  }
  os << "<text x=\"" << fmt(bx + 20, 6) << "\" y=\"" << top + 10 << "\">" << fmt(hi) << "</text>\n";
  os << "<text x=\"" << fmt(bx + 20, 6) << "\" y=\"" << top + ph << "\">" << fmt(lo) << "</text>\n";
  os << "<text transform=\"translate(" << fmt(bx + 60, 6) << "," << top + ph / 2
     << ") rotate(-90)\" text-anchor=\"middle\">" << escape(style.value_label) << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

std::string svg_bar_panels(const std::string& title, const std::vector<std::string>& labels,
                           const std::vector<double>& real, const std::vector<double>& imag) {
  const int width = 720;
  const int panel_h = 200;
  const int left = 60, top = 40, gap = 60;
  const int height = top + 2 * panel_h + gap + 50;
  const double pw = width - left - 20;
  const double bw = pw / static_cast<double>(std::max<std::size_t>(labels.size(), 1));
  double scale = 1.0;
  for (double v : real) scale = std::max(scale, std::abs(v));
  for (double v : imag) scale = std::max(scale, std::abs(v));

  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
     << "</text>\n";
  const std::vector<std::pair<std::string, const std::vector<double>*>> panels{{"Re", &real}, {"Im", &imag}};
  for (std::size_t p = 0; p < panels.size(); ++p) {
    const double y0 = top + static_cast<double>(p) * (panel_h + gap);
    const double mid = y0 + panel_h / 2.0;
    os << "<text x=\"12\" y=\"" << fmt(mid, 6) << "\">" << panels[p].first << "</text>\n";
    os << "<line x1=\"" << left << "\" x2=\"" << left + pw << "\" y1=\"" << fmt(mid, 6) << "\" y2=\""
       << fmt(mid, 6) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << left - 4 << "\" y=\"" << fmt(y0 + 4, 6) << "\" text-anchor=\"end\">" << fmt(scale)
       << "</text>\n";
    os << "<text x=\"" << left - 4 << "\" y=\"" << fmt(y0 + panel_h, 6) << "\" text-anchor=\"end\">"
       << fmt(-scale) << "</text>\n";
    const auto& vals = *panels[p].second;
    for (std::size_t k = 0; k < labels.size() && k < vals.size(); ++k) {
      const double h = vals[k] / scale * (panel_h / 2.0);
      const double x = left + k * bw + 0.15 * bw;
      const double y = h >= 0 ? mid - h : mid;
      os << "<rect x=\"" << fmt(x, 6) << "\" y=\"" << fmt(y, 6) << "\" width=\"" << fmt(0.7 * bw, 6)
         << "\" height=\"" << fmt(std::abs(h), 6) << "\" fill=\"" << (h >= 0 ? "#3b6fb6" : "#c0504d")
         << "\"/>\n";
      os << "<text x=\"" << fmt(left + (k + 0.5) * bw, 6) << "\" y=\"" << fmt(y0 + panel_h + 14, 6)
         << "\" text-anchor=\"middle\">" << escape(labels[k]) << "</text>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

std::string svg_lines(const std::string& title, const std::string& x_label, const std::string& y_label,
                      const std::vector<LineSeries>& series) {
  const int width = 600, height = 400;
  const int left = 70, right = 130, top = 40, bottom = 60;
  const double pw = width - left - right;
  const double ph = height - top - bottom;
  double xlo = INFINITY, xhi = -INFINITY, ylo = INFINITY, yhi = -INFINITY;
  for (const auto& s : series) {
    for (double v : s.x) { xlo = std::min(xlo, v); xhi = std::max(xhi, v); }
    for (double v : s.y) { ylo = std::min(ylo, v); yhi = std::max(yhi, v); }
  }
  if (!(xhi > xlo)) { xlo = 0; xhi = 1; }
  if (!(yhi > ylo)) { ylo -= 0.5; yhi += 0.5; }
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
     << "</text>\n";
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    os << "<text x=\"" << fmt(left + pw * k / 4.0, 6) << "\" y=\"" << top + ph + 16
       << "\" text-anchor=\"middle\">" << fmt(xlo + (xhi - xlo) * k / 4.0) << "</text>\n";
    os << "<text x=\"" << left - 6 << "\" y=\"" << fmt(top + ph - ph * k / 4.0 + 4, 6)
       << "\" text-anchor=\"end\">" << fmt(ylo + (yhi - ylo) * k / 4.0) << "</text>\n";
  }
  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& sr = series[s];
    os << "<polyline fill=\"none\" stroke=\"" << colors[s % 6] << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < sr.x.size() && i < sr.y.size(); ++i) {
      const double px = left + (sr.x[i] - xlo) / (xhi - xlo) * pw;
      const double py = top + ph - (sr.y[i] - ylo) / (yhi - ylo) * ph;
      os << fmt(px, 6) << ',' << fmt(py, 6) << ' ';
    }
    os << "\"/>\n";
    os << "<text x=\"" << left + pw + 10 << "\" y=\"" << top + 14 + 16 * static_cast<int>(s) << "\" fill=\""
       << colors[s % 6] << "\">" << escape(sr.name) << "</text>\n";
  }
  os << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 18 << "\" text-anchor=\"middle\">"
     << escape(x_label) << "</text>\n";
  os << "<text transform=\"translate(18," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
     << escape(y_label) << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

}  // namespace kpo
