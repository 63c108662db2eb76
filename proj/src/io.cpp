#include "grnn/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace grnn::io {

namespace {

template <class T>
struct DType;
template <>
struct DType<float> {
  static constexpr const char* name = "f32";
};
template <>
struct DType<double> {
  static constexpr const char* name = "f64";
};
template <>
struct DType<std::uint32_t> {
  static constexpr const char* name = "u32";
};

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    std::reverse(b, b + sizeof(T));
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

fs::path raw_path_for(const fs::path& header_path, const nlohmann::json& header) {
  if (header.contains("data_file")) {
    return header_path.parent_path() / header.at("data_file").get<std::string>();
  }
  auto p = header_path;
  return p.replace_extension(".raw");
}

template <class T>
void save_raster(const Raster<T>& raster, const fs::path& header_path,
                 const nlohmann::json& extra = {}) {
  auto raw_path = header_path;
  raw_path.replace_extension(".raw");
  nlohmann::json header = {
      {"height", raster.height}, {"width", raster.width},       {"bands", raster.bands},
      {"dtype", DType<T>::name}, {"byte_order", "little"},     {"interleave", "bsq"},
      {"data_file", raw_path.filename().string()}};
  if (!extra.is_null()) header["meta"] = extra;

  std::vector<T> bsq(raster.data.size());
  const std::size_t plane = raster.pixels();
  for (std::size_t p = 0; p < plane; ++p) {
    for (int b = 0; b < raster.bands; ++b) {
      bsq[std::size_t(b) * plane + p] = to_little(raster.data[p * raster.bands + b]);
    }
  }
  std::ofstream raw(raw_path, std::ios::binary);
  if (!raw) throw Error("cannot open for writing: " + raw_path.string());
  raw.write(reinterpret_cast<const char*>(bsq.data()), std::streamsize(bsq.size() * sizeof(T)));
  if (!raw) throw Error("write failed: " + raw_path.string());
  write_text(header_path, header.dump(2) + "\n");
}

template <class T>
Raster<T> load_raster(const fs::path& header_path) {
  const auto header = read_header(header_path);
  const auto dtype = header.value("dtype", std::string("f32"));
  if (dtype != DType<T>::name) {
    throw Error("unexpected dtype '" + dtype + "' in " + header_path.string() + ", wanted " +
                DType<T>::name);
  }
  if (header.value("byte_order", std::string("little")) != "little") {
    throw Error("only little-endian rasters are supported");
  }
  if (header.value("interleave", std::string("bsq")) != "bsq") {
    throw Error("only band-sequential rasters are supported");
  }
  const int h = header.at("height").get<int>();
  const int w = header.at("width").get<int>();
  const int b = header.value("bands", 1);
  if (h < 1 || w < 1 || b < 1) throw Error("raster dimensions must be positive");

  const auto raw_path = raw_path_for(header_path, header);
  std::ifstream raw(raw_path, std::ios::binary);
  if (!raw) throw Error("missing raw data file: " + raw_path.string());
  const std::size_t count = std::size_t(h) * w * b;
  const auto bytes = fs::file_size(raw_path);
  if (bytes != count * sizeof(T)) {
    throw Error("size mismatch: header expects " + std::to_string(count * sizeof(T)) +
                " bytes, " + raw_path.string() + " has " + std::to_string(bytes));
  }
  std::vector<T> bsq(count);
  raw.read(reinterpret_cast<char*>(bsq.data()), std::streamsize(count * sizeof(T)));
  if (!raw) throw Error("read failed: " + raw_path.string());

  Raster<T> out(h, w, b);
  const std::size_t plane = out.pixels();
  for (int band = 0; band < b; ++band) {
    for (std::size_t p = 0; p < plane; ++p) {
      out.data[p * b + band] = to_little(bsq[std::size_t(band) * plane + p]);
    }
  }
  return out;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    auto field = line.substr(start, pos == std::string_view::npos ? pos : pos - start);
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) {
      field.remove_suffix(1);
    }
    out.push_back(field);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool parse_int(std::string_view s, int& out) {
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

void write_ppm(const fs::path& path, int height, int width, const std::vector<std::uint8_t>& rgb) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out << "P6\n" << width << " " << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(rgb.data()), std::streamsize(rgb.size()));
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

nlohmann::json read_header(const fs::path& header_path) {
  if (!fs::exists(header_path)) throw Error("missing header file: " + header_path.string());
  try {
    return nlohmann::json::parse(read_text(header_path));
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed header " + header_path.string() + ": " + e.what());
  }
}

HsiCube load_cube(const fs::path& header_path) {
  auto cube = load_raster<float>(header_path);
  validate(cube);
  return cube;
}

void save_cube(const HsiCube& cube, const fs::path& header_path) {
  validate(cube);
  save_raster(cube, header_path);
}

FeatureCube load_feature_cube(const fs::path& header_path) { return load_raster<double>(header_path); }

void save_feature_cube(const FeatureCube& cube, const fs::path& header_path) {
  save_raster(cube, header_path);
}

Segmentation load_segmentation(const fs::path& header_path) {
  const auto raster = load_raster<std::uint32_t>(header_path);
  if (raster.bands != 1) throw Error("segmentation raster must have one band");
  Segmentation seg;
  seg.height = raster.height;
  seg.width = raster.width;
  seg.assignment = raster.data;
  seg.count = seg.assignment.empty()
                  ? 0
                  : int(*std::max_element(seg.assignment.begin(), seg.assignment.end())) + 1;
  validate(seg);
  return seg;
}

void save_segmentation(const Segmentation& seg, const fs::path& header_path) {
  Raster<std::uint32_t> raster;
  raster.height = seg.height;
  raster.width = seg.width;
  raster.bands = 1;
  raster.data = seg.assignment;
  save_raster(raster, header_path, {{"superpixels", seg.count}});
}

ClassificationMap load_classification(const fs::path& header_path) {
  const auto raster = load_raster<std::uint32_t>(header_path);
  if (raster.bands != 2) throw Error("classification raster must have two bands (class, provenance)");
  const auto header = read_header(header_path);
  const int c = header.contains("meta") ? header["meta"].value("num_classes", 0) : 0;
  ClassificationMap map(raster.height, raster.width, c);
  for (std::size_t p = 0; p < map.labels.size(); ++p) {
    const auto label = raster.data[2 * p], prov = raster.data[2 * p + 1];
    if (int(label) > c) throw Error("classification label exceeds num_classes");
    if (prov > 2) throw Error("classification provenance out of range");
    map.labels[p] = int(label);
    map.provenance[p] = Provenance(prov);
  }
  return map;
}

void save_classification(const ClassificationMap& map, const fs::path& header_path) {
  Raster<std::uint32_t> raster(map.height, map.width, 2);
  for (std::size_t p = 0; p < map.labels.size(); ++p) {
    raster.data[2 * p] = std::uint32_t(map.labels[p]);
    raster.data[2 * p + 1] = std::uint32_t(map.provenance[p]);
  }
  save_raster(raster, header_path, {{"num_classes", map.num_classes}});
}

LabelMap load_labels(const fs::path& path, int height, int width, int num_classes) {
  const auto text = read_text(path);
  LabelMap labels;
  labels.height = height;
  labels.width = width;
  int max_class = 0;
  std::size_t line_no = 0;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto fields = split_fields(line);
    LabelEntry e;
    if (fields.size() != 3 || !parse_int(fields[0], e.row) || !parse_int(fields[1], e.col) ||
        !parse_int(fields[2], e.class_id)) {
      if (line_no == 1) continue;  // header
      throw Error(path.string() + ":" + std::to_string(line_no) + ": expected row,col,class_id");
    }
    if (e.class_id < 1) {
      throw Error(path.string() + ":" + std::to_string(line_no) + ": class id must be >= 1");
    }
    max_class = std::max(max_class, e.class_id);
    labels.entries.push_back(e);
  }
  labels.num_classes = num_classes > 0 ? num_classes : max_class;
  validate(labels);
  return labels;
}

void save_labels(const LabelMap& labels, const fs::path& path) {
  std::ostringstream out;
  out << "row,col,class_id\n";
  for (const auto& e : labels.entries) out << e.row << ',' << e.col << ',' << e.class_id << '\n';
  write_text(path, out.str());
}

void emit_map(const ClassificationMap& map, const std::vector<Rgb>& palette, const fs::path& path) {
  if (palette.size() < std::size_t(map.num_classes) + 1) {
    throw Error("palette needs at least num_classes + 1 colors");
  }
  std::vector<std::uint8_t> rgb;
  rgb.reserve(map.labels.size() * 3);
  for (int label : map.labels) {
    if (label < 0 || label > map.num_classes) throw Error("map label out of range");
    const auto& c = palette[label];
    rgb.insert(rgb.end(), {c.r, c.g, c.b});
  }
  write_ppm(path, map.height, map.width, rgb);
}

void emit_boundaries(const Image& image, const Segmentation& seg, const fs::path& path) {
  if (image.height != seg.height || image.width != seg.width) {
    throw Error("image and segmentation shapes differ");
  }
  std::vector<std::uint8_t> rgb;
  rgb.reserve(std::size_t(seg.height) * seg.width * 3);
  for (int r = 0; r < seg.height; ++r) {
    for (int c = 0; c < seg.width; ++c) {
      const bool edge = (c + 1 < seg.width && seg(r, c) != seg(r, c + 1)) ||
                        (r + 1 < seg.height && seg(r, c) != seg(r + 1, c));
      if (edge) {
        rgb.insert(rgb.end(), {255, 0, 0});
      } else {
        const auto v = std::uint8_t(std::lround(std::clamp(image(r, c), 0.0, 1.0) * 255));
        rgb.insert(rgb.end(), {v, v, v});
      }
    }
  }
  write_ppm(path, seg.height, seg.width, rgb);
}

}  // namespace grnn::io
