#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "grnn/core.hpp"

namespace grnn::io {

namespace fs = std::filesystem;

// Raster container: `<name>.json` header plus a headerless little-endian
// band-sequential raw file. The header names the raw file in "data_file"
// (relative to the header directory); when absent, `<name>.raw` is used.

HsiCube load_cube(const fs::path& header_path);
void save_cube(const HsiCube& cube, const fs::path& header_path);

/// f64 variant used for cached intermediate results that must round-trip exactly.
FeatureCube load_feature_cube(const fs::path& header_path);
void save_feature_cube(const FeatureCube& cube, const fs::path& header_path);

Segmentation load_segmentation(const fs::path& header_path);
void save_segmentation(const Segmentation& seg, const fs::path& header_path);

/// Two u32 bands per pixel: class id (0 = unclassified) and provenance.
ClassificationMap load_classification(const fs::path& header_path);
void save_classification(const ClassificationMap& map, const fs::path& header_path);

/// Reads the JSON header only.
nlohmann::json read_header(const fs::path& header_path);

/// CSV of `row,col,class_id` with an optional header line. num_classes is the
/// largest class id found unless `num_classes` > 0 is given.
LabelMap load_labels(const fs::path& path, int height, int width, int num_classes = 0);
void save_labels(const LabelMap& labels, const fs::path& path);

/// Binary PPM (P6). Palette index 0 is used for unclassified pixels.
void emit_map(const ClassificationMap& map, const std::vector<Rgb>& palette, const fs::path& path);

/// Grayscale rendering of `image` (values in [0,1]) with superpixel boundaries in red.
void emit_boundaries(const Image& image, const Segmentation& seg, const fs::path& path);

std::string read_text(const fs::path& path);
void write_text(const fs::path& path, const std::string& text);

}  // namespace grnn::io
