#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "sweepdepth/core.hpp"

namespace sweepdepth {

struct MetricsReport {
  double abs_rel = 0.0;
  double sq_rel = 0.0;
  double rmse = 0.0;
  double rmse_log = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  double delta3 = 0.0;
};

inline constexpr double kDefaultDepthCap = 80.0;
inline constexpr double kPredictionFloor = 1e-3;

namespace detail {
inline double median(std::vector<double> values) {
  const std::size_t n = values.size();
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  if (n % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}
}  // namespace detail

/// pred * median(gt[valid]) / median(pred[valid]).
inline DepthMap median_scale(const DepthMap& pred, const DepthMap& gt, const Mask& valid) {
  require_same_extent(pred, gt, ErrorCode::ShapeMismatch, "median scale depths");
  require_same_extent(pred, valid, ErrorCode::ShapeMismatch, "median scale mask");
  std::vector<double> p;
  std::vector<double> g;
  for (std::size_t i = 0; i < pred.data().size(); ++i) {
    if (!valid.data()[i]) continue;
    p.push_back(pred.data()[i]);
    g.push_back(gt.data()[i]);
  }
  if (p.empty()) throw Error(ErrorCode::EmptyValidSet, "median scaling needs a valid pixel");
  const double mp = detail::median(std::move(p));
  if (!(mp > 0.0)) throw Error(ErrorCode::NonPositiveDepth, "median prediction is not positive");
  const double ratio = detail::median(std::move(g)) / mp;
  DepthMap out = pred;
  for (double& d : out.data()) d *= ratio;
  return out;
}

/// Pixels with gt in (0, cap).
inline Mask evaluation_mask(const DepthMap& gt, double cap = kDefaultDepthCap) {
  Mask m(gt.height(), gt.width());
  for (std::size_t i = 0; i < gt.data().size(); ++i) {
    const double g = gt.data()[i];
    m.data()[i] = (g > 0.0 && g < cap) ? 1 : 0;
  }
  return m;
}

/**
 * Eigen-protocol metrics over gt in (0, cap) and, if given, `extra_valid`.
 * Predictions are clamped to [1e-3, cap]; delta thresholds are strict.
 */
inline MetricsReport depth_metrics(const DepthMap& pred, const DepthMap& gt,
                                   double cap = kDefaultDepthCap, const Mask* extra_valid = nullptr) {
  require_same_extent(pred, gt, ErrorCode::ShapeMismatch, "metric depths");
  if (extra_valid) require_same_extent(pred, *extra_valid, ErrorCode::ShapeMismatch, "metric mask");
  double abs_rel = 0, sq_rel = 0, sq = 0, sq_log = 0;
  std::array<std::size_t, 3> within{0, 0, 0};
  std::size_t n = 0;
  for (std::size_t i = 0; i < gt.data().size(); ++i) {
    const double g = gt.data()[i];
    if (!(g > 0.0 && g < cap)) continue;
    if (extra_valid && !extra_valid->data()[i]) continue;
    const double p = std::clamp(pred.data()[i], kPredictionFloor, cap);
    const double diff = p - g;
    abs_rel += std::abs(diff) / g;
    sq_rel += diff * diff / g;
    sq += diff * diff;
    const double dl = std::log(p) - std::log(g);
    sq_log += dl * dl;
    const double ratio = std::max(p / g, g / p);
    if (ratio < 1.25) ++within[0];
    if (ratio < 1.25 * 1.25) ++within[1];
    if (ratio < 1.25 * 1.25 * 1.25) ++within[2];
    ++n;
  }
  if (n == 0) throw Error(ErrorCode::EmptyValidSet, "no ground-truth pixel inside (0, cap)");
  const double nn = static_cast<double>(n);
  return MetricsReport{abs_rel / nn,
                       sq_rel / nn,
                       std::sqrt(sq / nn),
                       std::sqrt(sq_log / nn),
                       static_cast<double>(within[0]) / nn,
                       static_cast<double>(within[1]) / nn,
                       static_cast<double>(within[2]) / nn};
}

struct ErrorMap {
  DepthMap values;
  /// 0 where gt is not positive; values there are 0.
  Mask valid;
};

/// |pred - gt| / gt per pixel.
inline ErrorMap abs_rel_error_map(const DepthMap& pred, const DepthMap& gt) {
  require_same_extent(pred, gt, ErrorCode::ShapeMismatch, "error map depths");
  ErrorMap out{DepthMap(gt.height(), gt.width(), 1, 0.0), Mask(gt.height(), gt.width())};
  for (std::size_t i = 0; i < gt.data().size(); ++i) {
    const double g = gt.data()[i];
    if (!(g > 0.0)) continue;
    out.values.data()[i] = std::abs((pred.data()[i] - g) / g);
    out.valid.data()[i] = 1;
  }
  return out;
}

enum class CropScheme { None, CityscapesA, CityscapesB };

inline CropScheme parse_crop_scheme(std::string_view name) {
  if (name == "none") return CropScheme::None;
  if (name == "cityscapes_A") return CropScheme::CityscapesA;
  if (name == "cityscapes_B") return CropScheme::CityscapesB;
  throw Error(ErrorCode::InvalidArgument, "unknown crop scheme '" + std::string(name) + "'");
}

struct CropWindow {
  int y0 = 0;
  int x0 = 0;
  int height = 0;
  int width = 0;
};

/// Scheme A keeps the middle half of the rows and trims 3/32 of the width
/// (192 of 2048 columns) from each side; scheme B keeps the top three
/// quarters of the rows.
inline CropWindow crop_window(int height, int width, CropScheme scheme) {
  CropWindow w{0, 0, height, width};
  switch (scheme) {
    case CropScheme::None:
      break;
    case CropScheme::CityscapesA: {
      const int trim = width * 3 / 32;
      w = {height / 4, trim, height / 2, width - 2 * trim};
      break;
    }
    case CropScheme::CityscapesB:
      w = {0, 0, height * 3 / 4, width};
      break;
  }
  if (w.height < 1 || w.width < 1) {
    throw Error(ErrorCode::TooSmall, "input too small for the crop scheme");
  }
  return w;
}

template <class T>
Grid<T> crop(const Grid<T>& in, CropScheme scheme) {
  const CropWindow w = crop_window(in.height(), in.width(), scheme);
  Grid<T> out(w.height, w.width, in.channels());
  for (int y = 0; y < w.height; ++y) {
    for (int x = 0; x < w.width; ++x) {
      for (int c = 0; c < in.channels(); ++c) out(y, x, c) = in(y + w.y0, x + w.x0, c);
    }
  }
  return out;
}

/// RGB heatmap of an abs-rel error map: blue at 0, through cyan, green and
/// yellow, to red at 0.2 and above. Invalid pixels are black.
inline Image error_heatmap(const ErrorMap& err, double red_at = 0.2) {
  Image out(err.values.height(), err.values.width(), 3, 0.0);
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      if (!err.valid(y, x)) continue;
      const double t = std::clamp(err.values(y, x) / red_at, 0.0, 1.0);
      double r = 0, g = 0, b = 0;
      if (t < 0.25) {
        g = t / 0.25;
        b = 1.0;
      } else if (t < 0.5) {
        g = 1.0;
        b = 1.0 - (t - 0.25) / 0.25;
      } else if (t < 0.75) {
        r = (t - 0.5) / 0.25;
        g = 1.0;
      } else {
        r = 1.0;
        g = 1.0 - (t - 0.75) / 0.25;
      }
      out(y, x, 0) = r;
      out(y, x, 1) = g;
      out(y, x, 2) = b;
    }
  }
  return out;
}

}  // namespace sweepdepth
