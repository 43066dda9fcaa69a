#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sweepdepth {

enum class ErrorCode {
  NonPositiveDepth,
  DimensionMismatch,
  ShapeMismatch,
  EmptySourceList,
  EmptySources,
  EmptyBatch,
  EmptyValidSet,
  InvalidRange,
  InvalidArgument,
  FrozenState,
  UnknownExtractor,
  TooSmall,
  DegenerateRay,
  MalformedHeader,
  TruncatedPayload,
  UnsupportedMaxval,
  IoError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveDepth: return "NonPositiveDepth";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::EmptySourceList: return "EmptySourceList";
    case ErrorCode::EmptySources: return "EmptySources";
    case ErrorCode::EmptyBatch: return "EmptyBatch";
    case ErrorCode::EmptyValidSet: return "EmptyValidSet";
    case ErrorCode::InvalidRange: return "InvalidRange";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::FrozenState: return "FrozenState";
    case ErrorCode::UnknownExtractor: return "UnknownExtractor";
    case ErrorCode::TooSmall: return "TooSmall";
    case ErrorCode::DegenerateRay: return "DegenerateRay";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::TruncatedPayload: return "TruncatedPayload";
    case ErrorCode::UnsupportedMaxval: return "UnsupportedMaxval";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-checkable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/**
 * Dense row-major H x W x C grid. Element (y, x, c) lives at
 * ((y * width) + x) * channels + c.
 *
 * Pixel centers sit on integer coordinates: pixel (x, y) covers
 * [x - 0.5, x + 0.5] x [y - 0.5, y + 0.5].
 */
template <class T>
class Grid {
 public:
  Grid() = default;
  Grid(int height, int width, int channels = 1, T fill = T{})
      : height_(height), width_(width), channels_(channels) {
    if (height < 0 || width < 0 || channels < 1) {
      throw Error(ErrorCode::InvalidArgument, "grid dimensions must be non-negative");
    }
    data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
  }

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  int channels() const noexcept { return channels_; }
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(height_) * width_;
  }
  bool empty() const noexcept { return data_.empty(); }

  bool same_shape(const Grid& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_ && channels_ == other.channels_;
  }
  template <class U>
  bool same_extent(const Grid<U>& other) const noexcept {
    return height_ == other.height() && width_ == other.width();
  }

  T& operator()(int y, int x, int c = 0) { return data_[index(y, x, c)]; }
  const T& operator()(int y, int x, int c = 0) const { return data_[index(y, x, c)]; }

  std::vector<T>& data() & noexcept { return data_; }
  const std::vector<T>& data() const& noexcept { return data_; }
  // Temporaries hand over their storage so `for (v : f().data())` is safe.
  std::vector<T> data() && noexcept { return std::move(data_); }

  bool operator==(const Grid& other) const = default;

 private:
  std::size_t index(int y, int x, int c) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  int height_ = 0;
  int width_ = 0;
  int channels_ = 1;
  std::vector<T> data_;
};

/// Intensities in [0, 1]; one or three channels.
using Image = Grid<double>;
/// Single-channel positive metric depth.
using DepthMap = Grid<double>;
/// Single-channel binary map, 0 or 1.
using Mask = Grid<unsigned char>;

template <class T, class U>
void require_same_extent(const Grid<T>& a, const Grid<U>& b, ErrorCode code, const char* what) {
  if (!a.same_extent(b)) {
    throw Error(code, std::string(what) + ": " + std::to_string(a.height()) + "x" +
                          std::to_string(a.width()) + " vs " + std::to_string(b.height()) + "x" +
                          std::to_string(b.width()));
  }
}

inline void require_positive(const DepthMap& depth, const char* what) {
  for (double d : depth.data()) {
    if (!(d > 0.0)) throw Error(ErrorCode::NonPositiveDepth, what);
  }
}

/// Channel-wise luminance for RGB (Rec. 601), passthrough for one channel.
inline Image to_gray(const Image& img) {
  if (img.channels() == 1) return img;
  Image out(img.height(), img.width(), 1);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (img.channels() >= 3) {
        out(y, x) = 0.299 * img(y, x, 0) + 0.587 * img(y, x, 1) + 0.114 * img(y, x, 2);
      } else {
        double acc = 0.0;
        for (int c = 0; c < img.channels(); ++c) acc += img(y, x, c);
        out(y, x) = acc / img.channels();
      }
    }
  }
  return out;
}

/// Nearest-neighbour upsampling of a low-resolution single-channel map.
inline DepthMap upsample_nearest(const DepthMap& low, int height, int width, int scale) {
  DepthMap out(height, width, low.channels());
  for (int y = 0; y < height; ++y) {
    const int ly = std::min(y / scale, low.height() - 1);
    for (int x = 0; x < width; ++x) {
      const int lx = std::min(x / scale, low.width() - 1);
      for (int c = 0; c < low.channels(); ++c) out(y, x, c) = low(ly, lx, c);
    }
  }
  return out;
}

}  // namespace sweepdepth
