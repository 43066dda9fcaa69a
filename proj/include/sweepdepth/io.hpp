#pragma once

#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sweepdepth/core.hpp"
#include "sweepdepth/cost_volume.hpp"
#include "sweepdepth/geometry.hpp"

namespace sweepdepth::io {

using Bytes = std::vector<std::uint8_t>;

inline Bytes read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for reading");
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file(const std::string& path, const Bytes& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "write to '" + path + "' failed");
}

inline void write_text(const std::string& path, const std::string& text) {
  write_file(path, Bytes(text.begin(), text.end()));
}

namespace detail {

/// Whitespace-separated header tokens; '#' starts a comment to end of line
/// when `comments` is set (netpbm).
class HeaderReader {
 public:
  HeaderReader(const Bytes& bytes, bool comments) : bytes_(bytes), comments_(comments) {}

  std::string token(const char* what) {
    skip_space();
    std::string out;
    while (pos_ < bytes_.size() && !std::isspace(bytes_[pos_]) && out.size() < 32) {
      out.push_back(static_cast<char>(bytes_[pos_++]));
    }
    if (out.empty()) throw Error(ErrorCode::MalformedHeader, std::string("missing ") + what);
    return out;
  }

  int positive_int(const char* what) {
    const std::string t = token(what);
    int value = 0;
    for (char c : t) {
      if (!std::isdigit(static_cast<unsigned char>(c))) {
        throw Error(ErrorCode::MalformedHeader, std::string("bad ") + what + " '" + t + "'");
      }
      value = value * 10 + (c - '0');
      if (value > (1 << 24)) throw Error(ErrorCode::MalformedHeader, std::string(what) + " too large");
    }
    if (value <= 0) throw Error(ErrorCode::MalformedHeader, std::string(what) + " must be positive");
    return value;
  }

  /// Consumes the single whitespace byte that ends the header.
  std::size_t end_of_header() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw Error(ErrorCode::MalformedHeader, "header not terminated by whitespace");
    }
    return pos_ + 1;
  }

 private:
  void skip_space() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (comments_ && bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const Bytes& bytes_;
  bool comments_;
  std::size_t pos_ = 0;
};

inline std::uint32_t byteswap32(std::uint32_t v) {
  return (v >> 24) | ((v >> 8) & 0xFF00u) | ((v << 8) & 0xFF0000u) | (v << 24);
}

}  // namespace detail

/// PFM: "Pf" (1 band) or "PF" (3 bands), "width height", scale (negative =
/// little-endian), then float32 samples with the bottom row first.
inline Grid<double> decode_pfm(const Bytes& bytes) {
  detail::HeaderReader header(bytes, false);
  const std::string magic = header.token("magic");
  int bands = 0;
  if (magic == "Pf") {
    bands = 1;
  } else if (magic == "PF") {
    bands = 3;
  } else {
    throw Error(ErrorCode::MalformedHeader, "not a PFM file (magic '" + magic + "')");
  }
  const int width = header.positive_int("width");
  const int height = header.positive_int("height");
  const std::string scale_token = header.token("scale");
  double scale = 0.0;
  try {
    std::size_t used = 0;
    scale = std::stod(scale_token, &used);
    if (used != scale_token.size()) throw std::invalid_argument(scale_token);
  } catch (const std::exception&) {
    throw Error(ErrorCode::MalformedHeader, "bad PFM scale '" + scale_token + "'");
  }
  if (scale == 0.0 || !std::isfinite(scale)) {
    throw Error(ErrorCode::MalformedHeader, "PFM scale must be non-zero");
  }
  const std::size_t offset = header.end_of_header();
  const std::size_t count = static_cast<std::size_t>(width) * height * bands;
  if (bytes.size() - offset < count * 4) {
    throw Error(ErrorCode::TruncatedPayload, "PFM payload has " + std::to_string(bytes.size() - offset) +
                                                 " bytes, expected " + std::to_string(count * 4));
  }
  const bool file_little = scale < 0.0;
  const bool swap = file_little != (std::endian::native == std::endian::little);
  Grid<double> out(height, width, bands);
  const std::uint8_t* p = bytes.data() + offset;
  for (int row = 0; row < height; ++row) {
    const int y = height - 1 - row;
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < bands; ++c) {
        std::uint32_t raw;
        std::memcpy(&raw, p, 4);
        p += 4;
        if (swap) raw = detail::byteswap32(raw);
        out(y, x, c) = static_cast<double>(std::bit_cast<float>(raw));
      }
    }
  }
  return out;
}

/// Always little-endian (scale -1.0).
inline Bytes encode_pfm(const Grid<double>& grid) {
  if (grid.channels() != 1 && grid.channels() != 3) {
    throw Error(ErrorCode::InvalidArgument, "PFM stores 1 or 3 channels");
  }
  const std::string header = std::string(grid.channels() == 1 ? "Pf" : "PF") + "\n" +
                             std::to_string(grid.width()) + " " + std::to_string(grid.height()) +
                             "\n-1.0\n";
  Bytes out(header.begin(), header.end());
  out.reserve(out.size() + grid.size() * 4);
  for (int row = 0; row < grid.height(); ++row) {
    const int y = grid.height() - 1 - row;
    for (int x = 0; x < grid.width(); ++x) {
      for (int c = 0; c < grid.channels(); ++c) {
        std::uint32_t raw = std::bit_cast<std::uint32_t>(static_cast<float>(grid(y, x, c)));
        if constexpr (std::endian::native == std::endian::big) raw = detail::byteswap32(raw);
        for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(raw >> (8 * b)));
      }
    }
  }
  return out;
}

namespace detail {

inline Grid<double> decode_netpbm(const Bytes& bytes, std::string_view want_magic, int channels) {
  HeaderReader header(bytes, true);
  const std::string magic = header.token("magic");
  if (magic != want_magic) {
    throw Error(ErrorCode::MalformedHeader,
                "expected binary '" + std::string(want_magic) + "', got '" + magic + "'");
  }
  const int width = header.positive_int("width");
  const int height = header.positive_int("height");
  const int maxval = header.positive_int("maxval");
  if (maxval > 65535) throw Error(ErrorCode::MalformedHeader, "maxval out of range");
  if (maxval != 255) {
    throw Error(ErrorCode::UnsupportedMaxval, "only maxval 255 is supported, got " + std::to_string(maxval));
  }
  const std::size_t offset = header.end_of_header();
  const std::size_t count = static_cast<std::size_t>(width) * height * channels;
  if (bytes.size() - offset < count) {
    throw Error(ErrorCode::TruncatedPayload, "netpbm payload too short");
  }
  Grid<double> out(height, width, channels);
  for (std::size_t i = 0; i < count; ++i) out.data()[i] = bytes[offset + i] / 255.0;
  return out;
}

inline Bytes encode_netpbm(const Grid<double>& img, std::string_view magic) {
  const std::string header = std::string(magic) + "\n" + std::to_string(img.width()) + " " +
                             std::to_string(img.height()) + "\n255\n";
  Bytes out(header.begin(), header.end());
  out.reserve(out.size() + img.size());
  for (double v : img.data()) {
    out.push_back(static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)));
  }
  return out;
}

}  // namespace detail

/// Binary P6, 8-bit; values are quantised to k/255.
inline Image decode_ppm(const Bytes& bytes) { return detail::decode_netpbm(bytes, "P6", 3); }
inline Bytes encode_ppm(const Image& img) {
  if (img.channels() != 3) throw Error(ErrorCode::InvalidArgument, "PPM needs 3 channels");
  return detail::encode_netpbm(img, "P6");
}

/// Binary P5, 8-bit.
inline Image decode_pgm(const Bytes& bytes) { return detail::decode_netpbm(bytes, "P5", 1); }
inline Bytes encode_pgm(const Image& img) {
  if (img.channels() != 1) throw Error(ErrorCode::InvalidArgument, "PGM needs 1 channel");
  return detail::encode_netpbm(img, "P5");
}

inline Grid<double> read_pfm(const std::string& path) { return decode_pfm(read_file(path)); }
inline void write_pfm(const std::string& path, const Grid<double>& g) { write_file(path, encode_pfm(g)); }
inline Image read_ppm(const std::string& path) { return decode_ppm(read_file(path)); }
inline void write_ppm(const std::string& path, const Image& img) { write_file(path, encode_ppm(img)); }
inline Image read_pgm(const std::string& path) { return decode_pgm(read_file(path)); }
inline void write_pgm(const std::string& path, const Image& img) { write_file(path, encode_pgm(img)); }

/// Reads .ppm, .pgm or .pfm by extension.
inline Image read_image(const std::string& path) {
  const auto ends_with = [&](std::string_view ext) {
    return path.size() >= ext.size() && path.compare(path.size() - ext.size(), ext.size(), ext) == 0;
  };
  if (ends_with(".ppm")) return read_ppm(path);
  if (ends_with(".pgm")) return read_pgm(path);
  if (ends_with(".pfm")) return read_pfm(path);
  throw Error(ErrorCode::InvalidArgument, "unsupported image extension: " + path);
}

/// Mask as a single-band PFM of 0.0 / 1.0.
inline Grid<double> mask_to_grid(const Mask& m) {
  Grid<double> g(m.height(), m.width(), 1);
  for (std::size_t i = 0; i < m.data().size(); ++i) g.data()[i] = m.data()[i] ? 1.0 : 0.0;
  return g;
}

// JSON documents -----------------------------------------------------------

using nlohmann::json;

inline json parse_json(const Bytes& bytes, const char* what) {
  try {
    return json::parse(bytes.begin(), bytes.end());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedHeader, std::string(what) + ": " + e.what());
  }
}

inline json intrinsics_to_json(const Intrinsics& k) {
  return {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}, {"width", k.width}, {"height", k.height}};
}

inline Intrinsics intrinsics_from_json(const json& j) {
  try {
    return Intrinsics::make(j.at("fx").get<double>(), j.at("fy").get<double>(), j.at("cx").get<double>(),
                            j.at("cy").get<double>(), j.at("width").get<int>(), j.at("height").get<int>());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedHeader, std::string("camera file: ") + e.what());
  }
}

/// {"R": 9 row-major numbers, "t": 3 numbers}.
inline json pose_to_json(const Pose& p) {
  json r = json::array();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) r.push_back(p.rotation(i, j));
  }
  return {{"R", r}, {"t", {p.translation.x(), p.translation.y(), p.translation.z()}}};
}

inline Pose pose_from_json(const json& j) {
  try {
    const auto r = j.at("R").get<std::vector<double>>();
    const auto t = j.at("t").get<std::vector<double>>();
    if (r.size() != 9 || t.size() != 3) {
      throw Error(ErrorCode::MalformedHeader, "pose file needs 9 rotation and 3 translation values");
    }
    Eigen::Matrix3d rot;
    rot << r[0], r[1], r[2], r[3], r[4], r[5], r[6], r[7], r[8];
    return Pose::make(rot, Eigen::Vector3d(t[0], t[1], t[2]));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedHeader, std::string("pose file: ") + e.what());
  }
}

inline Intrinsics read_intrinsics(const std::string& path) {
  return intrinsics_from_json(parse_json(read_file(path), "camera file"));
}
inline Pose read_pose(const std::string& path) { return pose_from_json(parse_json(read_file(path), "pose file")); }
inline void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

// Cost-volume dump -----------------------------------------------------------

/// "SWPCV1 H W P d_min d_max\n" then little-endian float32 costs, plane-major.
/// Unobserved cells are written as +inf.
inline Bytes encode_cost_volume(const CostVolume& cv, const DepthPlaneSet& planes) {
  std::ostringstream header;
  header.precision(17);
  header << "SWPCV1 " << cv.height() << ' ' << cv.width() << ' ' << cv.planes() << ' ' << planes.d_min
         << ' ' << planes.d_max << '\n';
  const std::string h = header.str();
  Bytes out(h.begin(), h.end());
  out.reserve(out.size() + cv.costs().size() * 4);
  for (double c : cv.costs()) {
    std::uint32_t raw = std::bit_cast<std::uint32_t>(static_cast<float>(c));
    if constexpr (std::endian::native == std::endian::big) raw = detail::byteswap32(raw);
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(raw >> (8 * b)));
  }
  return out;
}

struct CostVolumeDump {
  int height = 0;
  int width = 0;
  int planes = 0;
  double d_min = 0.0;
  double d_max = 0.0;
  /// Plane-major, as stored.
  std::vector<float> costs;

  float cost(int y, int x, int p) const {
    return costs[(static_cast<std::size_t>(p) * height + y) * width + x];
  }
};

inline CostVolumeDump decode_cost_volume(const Bytes& bytes) {
  detail::HeaderReader header(bytes, false);
  if (header.token("magic") != "SWPCV1") throw Error(ErrorCode::MalformedHeader, "not a cost-volume dump");
  CostVolumeDump d;
  d.height = header.positive_int("height");
  d.width = header.positive_int("width");
  d.planes = header.positive_int("planes");
  try {
    d.d_min = std::stod(header.token("d_min"));
    d.d_max = std::stod(header.token("d_max"));
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::MalformedHeader, "bad depth bounds in cost-volume header");
  }
  const std::size_t offset = header.end_of_header();
  const std::size_t count = static_cast<std::size_t>(d.height) * d.width * d.planes;
  if (bytes.size() - offset < count * 4) throw Error(ErrorCode::TruncatedPayload, "cost-volume payload too short");
  d.costs.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t raw;
    std::memcpy(&raw, bytes.data() + offset + 4 * i, 4);
    if constexpr (std::endian::native == std::endian::big) raw = detail::byteswap32(raw);
    d.costs[i] = std::bit_cast<float>(raw);
  }
  return d;
}

}  // namespace sweepdepth::io
