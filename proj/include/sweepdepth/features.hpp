#pragma once

#include <string>
#include <string_view>

#include "sweepdepth/core.hpp"

namespace sweepdepth {

enum class FeatureKind { Intensity, Rgb, Gradient };

inline FeatureKind parse_feature_kind(std::string_view name) {
  if (name == "intensity") return FeatureKind::Intensity;
  if (name == "rgb") return FeatureKind::Rgb;
  if (name == "gradient") return FeatureKind::Gradient;
  throw Error(ErrorCode::UnknownExtractor, "unknown feature extractor '" + std::string(name) + "'");
}

constexpr std::string_view to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::Intensity: return "intensity";
    case FeatureKind::Rgb: return "rgb";
    case FeatureKind::Gradient: return "gradient";
  }
  return "?";
}

/// Descriptor grid at 1/scale of the source resolution (sizes rounded up).
struct FeatureMap {
  Image data;
  int scale = 1;

  int height() const noexcept { return data.height(); }
  int width() const noexcept { return data.width(); }
  int channels() const noexcept { return data.channels(); }
};

/// Box average over scale x scale blocks; edge blocks average what exists.
inline Image box_downsample(const Image& img, int scale) {
  if (scale == 1) return img;
  const int h = (img.height() + scale - 1) / scale;
  const int w = (img.width() + scale - 1) / scale;
  Image out(h, w, img.channels(), 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int y_end = std::min((y + 1) * scale, img.height());
      const int x_end = std::min((x + 1) * scale, img.width());
      const double n = static_cast<double>((y_end - y * scale) * (x_end - x * scale));
      for (int c = 0; c < img.channels(); ++c) {
        double acc = 0.0;
        for (int sy = y * scale; sy < y_end; ++sy) {
          for (int sx = x * scale; sx < x_end; ++sx) acc += img(sy, sx, c);
        }
        out(y, x, c) = acc / n;
      }
    }
  }
  return out;
}

inline FeatureMap extract_features(const Image& img, FeatureKind kind, int scale) {
  if (scale != 1 && scale != 2 && scale != 4) {
    throw Error(ErrorCode::InvalidArgument, "feature scale must be 1, 2 or 4");
  }
  switch (kind) {
    case FeatureKind::Intensity:
      return {box_downsample(to_gray(img), scale), scale};
    case FeatureKind::Rgb:
      if (img.channels() != 3) {
        throw Error(ErrorCode::ShapeMismatch, "rgb features need a 3-channel image");
      }
      return {box_downsample(img, scale), scale};
    case FeatureKind::Gradient: {
      const Image gray = box_downsample(to_gray(img), scale);
      const int h = gray.height();
      const int w = gray.width();
      Image out(h, w, 3);
      for (int y = 0; y < h; ++y) {
        const int ym = std::max(y - 1, 0);
        const int yp = std::min(y + 1, h - 1);
        for (int x = 0; x < w; ++x) {
          const int xm = std::max(x - 1, 0);
          const int xp = std::min(x + 1, w - 1);
          out(y, x, 0) = gray(y, x);
          out(y, x, 1) = 0.5 * (gray(y, xp) - gray(y, xm));
          out(y, x, 2) = 0.5 * (gray(yp, x) - gray(ym, x));
        }
      }
      return {std::move(out), scale};
    }
  }
  throw Error(ErrorCode::UnknownExtractor, "unhandled feature kind");
}

inline FeatureMap extract_features(const Image& img, std::string_view kind, int scale) {
  return extract_features(img, parse_feature_kind(kind), scale);
}

}  // namespace sweepdepth
