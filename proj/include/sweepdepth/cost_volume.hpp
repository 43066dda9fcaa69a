#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "sweepdepth/core.hpp"
#include "sweepdepth/features.hpp"
#include "sweepdepth/geometry.hpp"
#include "sweepdepth/parallel.hpp"

namespace sweepdepth {

enum class PlaneSpacing { Linear, InverseDepth };

/// Ordered depth hypotheses; depths.front() == d_min, depths.back() == d_max.
struct DepthPlaneSet {
  std::vector<double> depths;
  double d_min = 0.0;
  double d_max = 0.0;

  int size() const noexcept { return static_cast<int>(depths.size()); }
  double midpoint() const noexcept { return 0.5 * (d_min + d_max); }
};

namespace detail {
inline void check_range(double d_min, double d_max, int count) {
  if (!(d_min > 0.0) || !(d_max > d_min) || !std::isfinite(d_max)) {
    throw Error(ErrorCode::InvalidRange, "need 0 < d_min < d_max");
  }
  if (count < 2) throw Error(ErrorCode::InvalidRange, "need at least two planes");
}
}  // namespace detail

/// depths[i] = d_min + i * (d_max - d_min) / (P - 1).
inline DepthPlaneSet linear_planes(double d_min, double d_max, int count) {
  detail::check_range(d_min, d_max, count);
  DepthPlaneSet set{std::vector<double>(count), d_min, d_max};
  const double step = (d_max - d_min) / (count - 1);
  for (int i = 0; i < count; ++i) set.depths[i] = d_min + i * step;
  set.depths.back() = d_max;
  return set;
}

/// Hypotheses uniformly spaced in 1/depth. Not the default.
inline DepthPlaneSet inverse_depth_planes(double d_min, double d_max, int count) {
  detail::check_range(d_min, d_max, count);
  DepthPlaneSet set{std::vector<double>(count), d_min, d_max};
  const double inv_near = 1.0 / d_min;
  const double inv_far = 1.0 / d_max;
  for (int i = 0; i < count; ++i) {
    const double a = static_cast<double>(i) / (count - 1);
    set.depths[i] = 1.0 / (inv_near + a * (inv_far - inv_near));
  }
  set.depths.front() = d_min;
  set.depths.back() = d_max;
  return set;
}

inline DepthPlaneSet make_planes(double d_min, double d_max, int count, PlaneSpacing spacing) {
  return spacing == PlaneSpacing::Linear ? linear_planes(d_min, d_max, count)
                                         : inverse_depth_planes(d_min, d_max, count);
}

/**
 * Matching cost per (pixel, plane), stored plane-major: index
 * (p * height + y) * width + x. Cells no source could observe hold
 * +infinity and have valid_count 0.
 */
class CostVolume {
 public:
  static constexpr double kNoObservation = std::numeric_limits<double>::infinity();

  CostVolume() = default;
  CostVolume(int height, int width, int planes)
      : height_(height), width_(width), planes_(planes),
        costs_(static_cast<std::size_t>(height) * width * planes, kNoObservation),
        valid_count_(costs_.size(), 0) {}

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  int planes() const noexcept { return planes_; }
  bool zeroed() const noexcept { return zeroed_; }

  double cost(int y, int x, int p) const { return costs_[index(y, x, p)]; }
  int valid_count(int y, int x, int p) const { return valid_count_[index(y, x, p)]; }

  const std::vector<double>& costs() const noexcept { return costs_; }
  const std::vector<int>& valid_counts() const noexcept { return valid_count_; }

  std::size_t index(int y, int x, int p) const noexcept {
    return (static_cast<std::size_t>(p) * height_ + y) * width_ + x;
  }

 private:
  friend struct CostVolumeAccess;

  int height_ = 0;
  int width_ = 0;
  int planes_ = 0;
  bool zeroed_ = false;
  std::vector<double> costs_;
  std::vector<int> valid_count_;
};

/// Construction-time write access; a built CostVolume is read-only.
struct CostVolumeAccess {
  static std::vector<double>& costs(CostVolume& cv) { return cv.costs_; }
  static std::vector<int>& counts(CostVolume& cv) { return cv.valid_count_; }
  static void mark_zeroed(CostVolume& cv) { cv.zeroed_ = true; }
};

struct SourceView {
  FeatureMap features;
  /// T_{target->source}.
  Pose target_to_source;
};

/**
 * Plane-sweep cost volume. For each plane, every source is warped into the
 * target through the plane homography and compared by channel-mean absolute
 * difference; the per-cell cost is the mean over sources that observed it.
 *
 * `k` must describe the feature resolution (see Intrinsics::scaled).
 * Planes are processed in parallel; the result does not depend on the
 * worker count.
 */
inline CostVolume build_cost_volume(const FeatureMap& target, const std::vector<SourceView>& sources,
                                    const Intrinsics& k, const DepthPlaneSet& planes,
                                    int threads = configured_threads()) {
  if (sources.empty()) throw Error(ErrorCode::EmptySourceList, "cost volume needs a source view");
  for (const auto& s : sources) {
    if (!s.features.data.same_shape(target.data) || s.features.scale != target.scale) {
      throw Error(ErrorCode::ShapeMismatch, "source features differ in shape from the target");
    }
  }
  if (k.width != target.width() || k.height != target.height()) {
    throw Error(ErrorCode::ShapeMismatch, "intrinsics do not match the feature resolution");
  }
  if (planes.size() < 2) throw Error(ErrorCode::InvalidRange, "need at least two planes");

  const int h = target.height();
  const int w = target.width();
  const int ch = target.channels();
  CostVolume cv(h, w, planes.size());
  auto& costs = CostVolumeAccess::costs(cv);
  auto& counts = CostVolumeAccess::counts(cv);

  parallel_for(
      planes.size(),
      [&](int p) {
        std::vector<double> sum(static_cast<std::size_t>(h) * w, 0.0);
        std::vector<int> n(sum.size(), 0);
        for (const auto& src : sources) {
          const PixelGrid grid = plane_warp_grid(planes.depths[p], src.target_to_source, k);
          const Sampled warped = bilinear_sample(src.features.data, grid);
          for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
              if (!warped.valid(y, x)) continue;
              double diff = 0.0;
              for (int c = 0; c < ch; ++c) {
                diff += std::abs(warped.values(y, x, c) - target.data(y, x, c));
              }
              const std::size_t i = static_cast<std::size_t>(y) * w + x;
              sum[i] += diff / ch;
              ++n[i];
            }
          }
        }
        for (std::size_t i = 0; i < sum.size(); ++i) {
          const std::size_t dst = static_cast<std::size_t>(p) * h * w + i;
          counts[dst] = n[i];
          costs[dst] = n[i] > 0 ? sum[i] / n[i] : CostVolume::kNoObservation;
        }
      },
      threads);
  return cv;
}

/// Stand-in volume for frames without usable sources: cost 0 everywhere.
inline CostVolume zero_volume(int height, int width, int planes) {
  if (height <= 0 || width <= 0 || planes <= 0) {
    throw Error(ErrorCode::InvalidArgument, "zero volume dimensions must be positive");
  }
  CostVolume cv(height, width, planes);
  std::fill(CostVolumeAccess::costs(cv).begin(), CostVolumeAccess::costs(cv).end(), 0.0);
  std::fill(CostVolumeAccess::counts(cv).begin(), CostVolumeAccess::counts(cv).end(), 1);
  CostVolumeAccess::mark_zeroed(cv);
  return cv;
}

struct ArgminResult {
  DepthMap depth;
  /// 1 where at least one plane had an observation.
  Mask valid;
};

/// Depth of the cheapest plane per cell. Ties resolve to the lowest plane
/// index; cells without observations get the range midpoint and valid = 0.
inline ArgminResult argmin_depth(const CostVolume& cv, const DepthPlaneSet& planes) {
  if (cv.planes() != planes.size()) {
    throw Error(ErrorCode::ShapeMismatch, "plane count differs from the cost volume");
  }
  ArgminResult out{DepthMap(cv.height(), cv.width()), Mask(cv.height(), cv.width())};
  for (int y = 0; y < cv.height(); ++y) {
    for (int x = 0; x < cv.width(); ++x) {
      int best = -1;
      double best_cost = CostVolume::kNoObservation;
      for (int p = 0; p < cv.planes(); ++p) {
        if (cv.valid_count(y, x, p) == 0) continue;
        const double c = cv.cost(y, x, p);
        if (best < 0 || c < best_cost) {
          best = p;
          best_cost = c;
        }
      }
      if (best < 0) {
        out.depth(y, x) = planes.midpoint();
      } else {
        out.depth(y, x) = planes.depths[best];
        out.valid(y, x) = 1;
      }
    }
  }
  return out;
}

/// EMA-tracked plane bounds.
struct AdaptiveRangeState {
  double d_min = 0.1;
  double d_max = 10.0;
  double momentum = 0.99;
  bool frozen = false;

  void validate() const {
    if (!(d_min > 0.0) || !(d_max > d_min)) {
      throw Error(ErrorCode::InvalidRange, "adaptive range needs 0 < d_min < d_max");
    }
    if (!(momentum >= 0.0 && momentum < 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "momentum must lie in [0, 1)");
    }
  }
};

/// One EMA step toward the batch-average per-map minimum and maximum.
inline AdaptiveRangeState adaptive_range_update(const AdaptiveRangeState& state,
                                                const std::vector<DepthMap>& batch) {
  if (state.frozen) throw Error(ErrorCode::FrozenState, "adaptive range is frozen");
  if (batch.empty()) throw Error(ErrorCode::EmptyBatch, "adaptive range update needs depth maps");
  double min_sum = 0.0;
  double max_sum = 0.0;
  for (const auto& d : batch) {
    if (d.empty()) throw Error(ErrorCode::EmptyBatch, "empty depth map in batch");
    require_positive(d, "adaptive range update needs positive depths");
    const auto [lo, hi] = std::minmax_element(d.data().begin(), d.data().end());
    min_sum += *lo;
    max_sum += *hi;
  }
  const double n = static_cast<double>(batch.size());
  const double batch_min = min_sum / n;
  const double batch_max = max_sum / n;
  const double m = state.momentum;
  AdaptiveRangeState next = state;
  next.d_min = m * state.d_min + (1.0 - m) * batch_min;
  next.d_max = m * state.d_max + (1.0 - m) * batch_max;
  next.validate();
  return next;
}

}  // namespace sweepdepth
