#include "plenreg/feature_io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <sstream>

#include "plenreg/io.hpp"

namespace plenreg {

namespace {

constexpr char kMagic[4] = {'L', 'F', 'M', 'F'};
constexpr std::size_t kHeaderSize = 4 + 4 + 4 + 4 + 1;

PayloadKind kind_from_byte(std::uint32_t byte) {
  if (byte > 2) fail(ErrorCode::ConfigError, "unknown sidecar payload kind " + std::to_string(byte));
  return static_cast<PayloadKind>(byte);
}

template <typename U>
void put(std::string& out, U value) {
  for (std::size_t b = 0; b < sizeof(U); ++b) {
    out.push_back(static_cast<char>((value >> (8 * b)) & 0xff));
  }
}

template <typename U>
U get(std::string_view in, std::size_t& pos) {
  U value = 0;
  for (std::size_t b = 0; b < sizeof(U); ++b) {
    value |= static_cast<U>(static_cast<unsigned char>(in[pos + b])) << (8 * b);
  }
  pos += sizeof(U);
  return value;
}

void check_set(const FeatureSet& set) {
  if (set.coords.rows() != coordinate_count(set.kind)) {
    fail(ErrorCode::DimensionMismatch, "coordinate rows do not match the payload kind");
  }
  if (set.coords.cols() != set.descriptors.rows()) {
    fail(ErrorCode::DimensionMismatch, "coordinates and descriptors differ in count");
  }
}

std::vector<double> split_numbers(std::string_view line, std::size_t line_no) {
  std::vector<double> values;
  std::size_t start = 0;
  while (start <= line.size()) {
    std::size_t end = line.find(',', start);
    if (end == std::string_view::npos) end = line.size();
    std::string_view cell = line.substr(start, end - start);
    while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r')) {
      cell.remove_suffix(1);
    }
    double v = 0.0;
    const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (cell.empty() || res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
      fail(ErrorCode::ConfigError, "feature CSV line " + std::to_string(line_no) +
                                       ": bad number '" + std::string(cell) + "'");
    }
    values.push_back(v);
    start = end + 1;
  }
  return values;
}

}  // namespace

int coordinate_count(PayloadKind kind) {
  return kind == PayloadKind::Keypoints2d ? 2 : 3;
}

std::string encode_sidecar(const FeatureSet& set) {
  check_set(set);
  std::string out(kMagic, 4);
  put<std::uint32_t>(out, kSidecarVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(set.coords.cols()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(set.descriptors.cols()));
  out.push_back(static_cast<char>(set.kind));
  for (Eigen::Index i = 0; i < set.coords.cols(); ++i) {
    for (Eigen::Index c = 0; c < set.coords.rows(); ++c) {
      put<std::uint64_t>(out, std::bit_cast<std::uint64_t>(set.coords(c, i)));
    }
    for (Eigen::Index d = 0; d < set.descriptors.cols(); ++d) {
      put<std::uint32_t>(out, std::bit_cast<std::uint32_t>(set.descriptors(i, d)));
    }
  }
  return out;
}

FeatureSet decode_sidecar(std::string_view bytes) {
  if (bytes.size() < kHeaderSize || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    fail(ErrorCode::ConfigError, "not a feature sidecar (bad magic)");
  }
  std::size_t pos = 4;
  const auto version = get<std::uint32_t>(bytes, pos);
  if (version != kSidecarVersion) {
    fail(ErrorCode::ConfigError, "unsupported sidecar version " + std::to_string(version));
  }
  const auto count = get<std::uint32_t>(bytes, pos);
  const auto dim = get<std::uint32_t>(bytes, pos);
  FeatureSet set;
  set.kind = kind_from_byte(static_cast<unsigned char>(bytes[pos++]));
  const int ncoords = coordinate_count(set.kind);
  const std::size_t record = 8u * static_cast<std::size_t>(ncoords) + 4u * dim;
  if (bytes.size() != kHeaderSize + record * count) {
    fail(ErrorCode::ConfigError, "sidecar size does not match its header");
  }
  set.coords.resize(ncoords, count);
  set.descriptors.resize(count, dim);
  for (std::uint32_t i = 0; i < count; ++i) {
    for (int c = 0; c < ncoords; ++c) {
      set.coords(c, i) = std::bit_cast<double>(get<std::uint64_t>(bytes, pos));
    }
    for (std::uint32_t d = 0; d < dim; ++d) {
      set.descriptors(i, d) = std::bit_cast<float>(get<std::uint32_t>(bytes, pos));
    }
  }
  return set;
}

std::string encode_feature_csv(const FeatureSet& set) {
  check_set(set);
  std::ostringstream out;
  out << "# LFMF kind=" << static_cast<int>(set.kind) << " dim=" << set.descriptors.cols() << '\n';
  for (Eigen::Index i = 0; i < set.coords.cols(); ++i) {
    for (Eigen::Index c = 0; c < set.coords.rows(); ++c) {
      out << (c ? "," : "") << format_double(set.coords(c, i));
    }
    for (Eigen::Index d = 0; d < set.descriptors.cols(); ++d) {
      out << ',' << format_double(static_cast<double>(set.descriptors(i, d)));
    }
    out << '\n';
  }
  return out.str();
}

FeatureSet decode_feature_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::ConfigError, "empty feature CSV");
  int kind = -1;
  long dim = -1;
  if (std::sscanf(line.c_str(), "# LFMF kind=%d dim=%ld", &kind, &dim) != 2 || kind < 0 || dim < 0) {
    fail(ErrorCode::ConfigError, "feature CSV header must be '# LFMF kind=<k> dim=<d>'");
  }
  FeatureSet set;
  set.kind = kind_from_byte(static_cast<std::uint32_t>(kind));
  const int ncoords = coordinate_count(set.kind);
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto values = split_numbers(line, line_no);
    if (static_cast<long>(values.size()) != ncoords + dim) {
      fail(ErrorCode::ConfigError, "feature CSV line " + std::to_string(line_no) +
                                       " has the wrong number of fields");
    }
    rows.push_back(std::move(values));
  }
  set.coords.resize(ncoords, static_cast<Eigen::Index>(rows.size()));
  set.descriptors.resize(static_cast<Eigen::Index>(rows.size()), dim);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    for (int c = 0; c < ncoords; ++c) set.coords(c, col) = rows[i][static_cast<std::size_t>(c)];
    for (long d = 0; d < dim; ++d) {
      set.descriptors(col, d) = static_cast<float>(rows[i][static_cast<std::size_t>(ncoords + d)]);
    }
  }
  return set;
}

FeatureSet read_feature_file(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  try {
    if (bytes.rfind("LFMF", 0) == 0) return decode_sidecar(bytes);
    return decode_feature_csv(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

FeatureSet to_feature_set(const FeatureCloud& cloud) {
  return {PayloadKind::Points3d, cloud.points, cloud.descriptors};
}

FeatureSet to_feature_set(const FeatureImage& image) {
  FeatureSet set;
  set.descriptors = image.descriptors;
  if (image.virtual_depths) {
    set.kind = PayloadKind::VirtualKeypoints;
    set.coords.resize(3, image.keypoints.cols());
    set.coords.topRows(2) = image.keypoints;
    set.coords.row(2) = image.virtual_depths->transpose();
  } else {
    set.kind = PayloadKind::Keypoints2d;
    set.coords = image.keypoints;
  }
  return set;
}

FeatureCloud to_feature_cloud(const FeatureSet& set, FrameId frame) {
  if (set.kind != PayloadKind::Points3d) {
    fail(ErrorCode::ConfigError, "expected a 3D point sidecar (payload kind 1)");
  }
  FeatureCloud cloud{set.coords, std::move(frame), set.descriptors};
  cloud.validate();
  return cloud;
}

FeatureImage to_feature_image(const FeatureSet& set) {
  FeatureImage image;
  image.descriptors = set.descriptors;
  if (set.kind == PayloadKind::Keypoints2d) {
    image.keypoints = set.coords;
  } else if (set.kind == PayloadKind::VirtualKeypoints) {
    image.keypoints = set.coords.topRows(2);
    image.virtual_depths = set.coords.row(2).transpose();
  } else {
    fail(ErrorCode::ConfigError, "expected an image keypoint sidecar (payload kind 0 or 2)");
  }
  image.validate();
  return image;
}

}  // namespace plenreg
