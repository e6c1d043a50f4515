#pragma once

// Feature sidecar files.
//
// Binary layout, little endian:
//   "LFMF" | version u32 | count u32 | dim u32 | payload_kind u8
//   count x { coords: 2 or 3 float64 | descriptor: dim float32 }
//
// payload_kind 0: keypoints on the corrected image (x, y)
//              1: 3D points in mm (x, y, z)
//              2: keypoints on the virtual image with virtual depth (x_V, y_V, v)
//
// The CSV variant starts with "# LFMF kind=<k> dim=<d>" followed by one
// comma-separated record per line.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "plenreg/feature_match.hpp"

namespace plenreg {

enum class PayloadKind : std::uint8_t {
  Keypoints2d = 0,
  Points3d = 1,
  VirtualKeypoints = 2,
};

inline constexpr std::uint32_t kSidecarVersion = 1;

int coordinate_count(PayloadKind kind);

struct FeatureSet {
  PayloadKind kind = PayloadKind::Points3d;
  Eigen::MatrixXd coords;  // coordinate_count(kind) x count
  DescriptorMatrix descriptors;
};

std::string encode_sidecar(const FeatureSet& set);
FeatureSet decode_sidecar(std::string_view bytes);

std::string encode_feature_csv(const FeatureSet& set);
FeatureSet decode_feature_csv(std::string_view text);

// Binary or CSV, detected from the leading bytes.
FeatureSet read_feature_file(const std::filesystem::path& path);

FeatureSet to_feature_set(const FeatureCloud& cloud);
FeatureSet to_feature_set(const FeatureImage& image);

// Ingestion checks the payload kind: a cloud needs kind 1, an image kind 0 or 2.
FeatureCloud to_feature_cloud(const FeatureSet& set, FrameId frame);
FeatureImage to_feature_image(const FeatureSet& set);

}  // namespace plenreg
