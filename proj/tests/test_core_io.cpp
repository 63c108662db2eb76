#include <doctest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "grnn/io.hpp"
#include "helpers.hpp"

using namespace grnn;
using testing::TempDir;

namespace {

void write_bytes(const std::filesystem::path& p, const std::vector<float>& v) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(v.data()), std::streamsize(v.size() * sizeof(float)));
}

void write_header(const std::filesystem::path& p, int h, int w, int b) {
  io::write_text(p, nlohmann::json{{"height", h}, {"width", w}, {"bands", b}, {"dtype", "f32"},
                                   {"byte_order", "little"}, {"interleave", "bsq"}}
                        .dump());
}

std::string slurp(const std::filesystem::path& p) { return io::read_text(p); }

}  // namespace

TEST_CASE("2x2x3 cube from a 48-byte band-sequential file") {
  TempDir dir("io");
  write_header(dir / "c.json", 2, 2, 3);
  // band-major: value = 10 * band + pixel
  std::vector<float> raw;
  for (int b = 0; b < 3; ++b)
    for (int p = 0; p < 4; ++p) raw.push_back(float(10 * b + p));
  write_bytes(dir / "c.raw", raw);
  const auto cube = io::load_cube(dir / "c.json");
  CHECK(cube.data.size() == 12);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c)
      for (int b = 0; b < 3; ++b) CHECK(cube.at(r, c, b) == float(10 * b + r * 2 + c));
}

TEST_CASE("short raw file is a size mismatch") {
  TempDir dir("io");
  write_header(dir / "c.json", 2, 2, 3);
  write_bytes(dir / "c.raw", std::vector<float>(11, 0.0f));
  CHECK_THROWS_WITH_AS(io::load_cube(dir / "c.json"), doctest::Contains("size mismatch"), Error);
}

TEST_CASE("missing header or raw file") {
  TempDir dir("io");
  CHECK_THROWS_AS(io::load_cube(dir / "nope.json"), Error);
  write_header(dir / "c.json", 1, 1, 1);
  CHECK_THROWS_AS(io::load_cube(dir / "c.json"), Error);
}

TEST_CASE("non-finite values are rejected on load") {
  TempDir dir("io");
  write_header(dir / "c.json", 1, 2, 1);
  write_bytes(dir / "c.raw", {1.0f, std::numeric_limits<float>::quiet_NaN()});
  CHECK_THROWS_AS(io::load_cube(dir / "c.json"), Error);
  write_bytes(dir / "c.raw", {1.0f, std::numeric_limits<float>::infinity()});
  CHECK_THROWS_AS(io::load_cube(dir / "c.json"), Error);
}

TEST_CASE("cube round trips are bit exact") {
  TempDir dir("io");
  SUBCASE("1x1x1 zero") {
    HsiCube cube(1, 1, 1);
    io::save_cube(cube, dir / "z.json");
    const auto back = io::load_cube(dir / "z.json");
    CHECK(back.height == 1);
    CHECK(std::memcmp(back.data.data(), cube.data.data(), sizeof(float)) == 0);
  }
  for (auto [h, w, b] : {std::tuple{8, 8, 4}, std::tuple{64, 64, 32}, std::tuple{3, 5, 7}}) {
    const auto cube = testing::random_cube(h, w, b, std::uint64_t(h * 131 + b));
    io::save_cube(cube, dir / "r.json");
    const auto back = io::load_cube(dir / "r.json");
    REQUIRE(back.data.size() == cube.data.size());
    CHECK(back.height == h);
    CHECK(back.width == w);
    CHECK(back.bands == b);
    CHECK(std::memcmp(back.data.data(), cube.data.data(), cube.data.size() * sizeof(float)) == 0);
  }
}

TEST_CASE("raw file is band sequential on disk") {
  TempDir dir("io");
  HsiCube cube(1, 2, 2);
  cube.at(0, 0, 0) = 1.0f;
  cube.at(0, 1, 0) = 2.0f;
  cube.at(0, 0, 1) = 3.0f;
  cube.at(0, 1, 1) = 4.0f;
  io::save_cube(cube, dir / "c.json");
  const auto bytes = slurp(dir / "c.raw");
  REQUIRE(bytes.size() == 16);
  float v[4];
  std::memcpy(v, bytes.data(), 16);
  CHECK(v[0] == 1.0f);
  CHECK(v[1] == 2.0f);
  CHECK(v[2] == 3.0f);
  CHECK(v[3] == 4.0f);
  const auto header = io::read_header(dir / "c.json");
  CHECK(header["dtype"] == "f32");
  CHECK(header["interleave"] == "bsq");
  CHECK(header["byte_order"] == "little");
}

TEST_CASE("unwritable path is an IO error") {
  HsiCube cube(1, 1, 1);
  CHECK_THROWS_AS(io::save_cube(cube, "/nonexistent_dir_grnn/x/c.json"), Error);
}

TEST_CASE("feature cube and segmentation round trips") {
  TempDir dir("io");
  const auto f = testing::random_features(5, 4, 3, 9);
  io::save_feature_cube(f, dir / "f.json");
  CHECK(io::load_feature_cube(dir / "f.json").data == f.data);

  Segmentation seg;
  seg.height = 2;
  seg.width = 3;
  seg.count = 2;
  seg.assignment = {0, 0, 1, 0, 1, 1};
  io::save_segmentation(seg, dir / "s.json");
  const auto back = io::load_segmentation(dir / "s.json");
  CHECK(back.count == 2);
  CHECK(back.assignment == seg.assignment);
}

TEST_CASE("classification map round trip keeps provenance") {
  TempDir dir("io");
  ClassificationMap map(2, 2, 3);
  map.labels = {0, 1, 2, 3};
  map.provenance = {Provenance::Predicted, Provenance::GroundTruth, Provenance::Fallback,
                    Provenance::Predicted};
  io::save_classification(map, dir / "m.json");
  const auto back = io::load_classification(dir / "m.json");
  CHECK(back.num_classes == 3);
  CHECK(back.labels == map.labels);
  CHECK(back.provenance == map.provenance);
}

TEST_CASE("label CSV parsing") {
  TempDir dir("io");
  SUBCASE("single entry, class count inferred") {
    io::write_text(dir / "l.csv", "0,0,1\n");
    const auto l = io::load_labels(dir / "l.csv", 4, 4);
    REQUIRE(l.size() == 1);
    CHECK(l.num_classes == 1);
    CHECK(l.entries[0] == LabelEntry{0, 0, 1});
  }
  SUBCASE("header line and CRLF") {
    io::write_text(dir / "l.csv", "row,col,class_id\r\n1,2,3\r\n0,1,2\r\n");
    const auto l = io::load_labels(dir / "l.csv", 4, 4);
    CHECK(l.size() == 2);
    CHECK(l.num_classes == 3);
  }
  SUBCASE("row out of range") {
    io::write_text(dir / "l.csv", "5,0,1\n");
    CHECK_THROWS_AS(io::load_labels(dir / "l.csv", 4, 4), Error);
  }
  SUBCASE("class id below 1") {
    io::write_text(dir / "l.csv", "0,0,0\n");
    CHECK_THROWS_AS(io::load_labels(dir / "l.csv", 4, 4), Error);
  }
  SUBCASE("duplicate pixel") {
    io::write_text(dir / "l.csv", "0,0,1\n1,1,2\n0,0,2\n");
    CHECK_THROWS_AS(io::load_labels(dir / "l.csv", 4, 4), Error);
  }
  SUBCASE("class id above an explicit class count") {
    io::write_text(dir / "l.csv", "0,0,4\n");
    CHECK_THROWS_AS(io::load_labels(dir / "l.csv", 4, 4, 3), Error);
  }
  SUBCASE("round trip") {
    LabelMap l;
    l.height = l.width = 3;
    l.num_classes = 2;
    l.entries = {{0, 0, 1}, {2, 1, 2}};
    io::save_labels(l, dir / "o.csv");
    const auto back = io::load_labels(dir / "o.csv", 3, 3);
    CHECK(back.entries == l.entries);
  }
}

TEST_CASE("emit_map writes palette colors") {
  TempDir dir("io");
  SUBCASE("1x1 unclassified is black") {
    ClassificationMap map(1, 1, 0);
    io::emit_map(map, {Rgb{0, 0, 0}}, dir / "m.ppm");
    CHECK(slurp(dir / "m.ppm") == std::string("P6\n1 1\n255\n") + std::string(3, '\0'));
  }
  SUBCASE("2x1 red then green") {
    ClassificationMap map(2, 1, 2);
    map.labels = {1, 2};
    io::emit_map(map, {Rgb{0, 0, 0}, Rgb{255, 0, 0}, Rgb{0, 255, 0}}, dir / "m.ppm");
    const std::string expect = std::string("P6\n1 2\n255\n") + "\xff" + std::string(2, '\0') +
                               std::string(1, '\0') + "\xff" + std::string(1, '\0');
    CHECK(slurp(dir / "m.ppm") == expect);
  }
  SUBCASE("palette too short") {
    ClassificationMap map(1, 1, 2);
    CHECK_THROWS_AS(io::emit_map(map, {Rgb{}, Rgb{}}, dir / "m.ppm"), Error);
  }
}

TEST_CASE("default palette") {
  const auto p = default_palette(16);
  REQUIRE(p.size() == 17);
  CHECK(p[0] == Rgb{0, 0, 0});
  for (std::size_t i = 1; i < p.size(); ++i) {
    CHECK_FALSE(p[i] == Rgb{0, 0, 0});
    for (std::size_t j = 1; j < i; ++j) CHECK_FALSE(p[i] == p[j]);
  }
}

TEST_CASE("segmentation validation") {
  Segmentation seg;
  seg.height = 2;
  seg.width = 2;
  seg.count = 2;
  SUBCASE("valid") {
    seg.assignment = {0, 0, 1, 1};
    CHECK_NOTHROW(validate(seg));
  }
  SUBCASE("diagonal only is not 4-connected") {
    seg.assignment = {0, 1, 1, 0};
    CHECK_THROWS_AS(validate(seg), Error);
  }
  SUBCASE("empty index") {
    seg.count = 3;
    seg.assignment = {0, 0, 1, 1};
    CHECK_THROWS_AS(validate(seg), Error);
  }
  SUBCASE("index out of range") {
    seg.assignment = {0, 0, 1, 2};
    CHECK_THROWS_AS(validate(seg), Error);
  }
}

TEST_CASE("mark_ground_truth flags labeled pixels only") {
  ClassificationMap map(2, 2, 2);
  map.labels = {1, 2, 1, 2};
  LabelMap truth;
  truth.height = truth.width = 2;
  truth.num_classes = 2;
  truth.entries = {{1, 0, 1}};
  mark_ground_truth(map, truth);
  CHECK(map.provenance[2] == Provenance::GroundTruth);
  CHECK(map.provenance[0] == Provenance::Predicted);
  CHECK(map.labels == std::vector<int>{1, 2, 1, 2});
}
