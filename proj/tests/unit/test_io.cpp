#include <cmath>
#include <filesystem>
#include <limits>

#include <gtest/gtest.h>

#include "kpo/error.hpp"
#include "kpo/io.hpp"

namespace {

TEST(FormatNumber, RoundTripsExactly) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-17, 6.02214076e23, 0.0}) {
    EXPECT_EQ(std::stod(kpo::format_number(v)), v) << v;
  }
}

TEST(Csv, RoundTripWithMetadata) {
  kpo::CsvTable t;
  t.metadata = {{"K_MHz", "3.1"}, {"dim", "30"}};
  t.header = {"t_us", "p"};
  t.rows = {{0.0, 1.0}, {0.1, 0.987654321012345}, {0.2, -1e-300}};
  const auto back = kpo::parse_csv(kpo::to_csv(t));
  EXPECT_EQ(back.metadata, t.metadata);
  EXPECT_EQ(back.header, t.header);
  EXPECT_EQ(back.rows, t.rows);
  EXPECT_EQ(back.column("p"), 1u);
  EXPECT_THROW(back.column("q"), kpo::Error);
  EXPECT_EQ(kpo::to_csv(back), kpo::to_csv(t));
}

TEST(Csv, RaggedRowsAreRejected) {
  EXPECT_THROW(kpo::parse_csv("a,b\n1,2\n3\n"), kpo::Error);
  EXPECT_THROW(kpo::parse_csv("a,b\n1,x\n"), kpo::Error);
}

TEST(Files, MissingFileIsIoError) {
  try {
    kpo::read_file("/nonexistent/dir/file.txt");
    FAIL() << "expected an io error";
  } catch (const kpo::Error& e) {
    EXPECT_EQ(e.code(), kpo::ErrorCode::io);
  }
}

TEST(Files, WriteThenRead) {
  const auto path = std::filesystem::temp_directory_path() / "kpo_io_test.txt";
  kpo::write_file(path.string(), "abc\n");
  EXPECT_EQ(kpo::read_file(path.string()), "abc\n");
  std::filesystem::remove(path);
}

TEST(Svg, HeatmapIsWellFormed) {
  Eigen::MatrixXd v(2, 3);
  v << 0, 1, 2, 3, 4, std::numeric_limits<double>::quiet_NaN();
  kpo::HeatmapStyle style;
  style.title = "a < b & c";
  const std::string svg = kpo::svg_heatmap(v, style);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("a &lt; b &amp; c"), std::string::npos);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

}  // namespace
