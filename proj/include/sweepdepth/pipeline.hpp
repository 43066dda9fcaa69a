#pragma once

#include <optional>
#include <vector>

#include "sweepdepth/cost_volume.hpp"
#include "sweepdepth/features.hpp"
#include "sweepdepth/geometry.hpp"
#include "sweepdepth/losses.hpp"

namespace sweepdepth {

struct DepthOptions {
  FeatureKind features = FeatureKind::Gradient;
  int scale = 4;
  int planes = 96;
  double d_min = 0.1;
  double d_max = 10.0;
  PlaneSpacing spacing = PlaneSpacing::Linear;
  /// Substitute a zero cost volume (no usable source frame).
  bool zero_cost_volume = false;
  int threads = configured_threads();
};

struct SourceFrame {
  const Image* image = nullptr;
  /// T_{target->source}.
  Pose target_to_source;
};

struct DepthEstimate {
  DepthPlaneSet planes;
  CostVolume cost_volume;
  /// Argmin depth and its validity at feature resolution.
  ArgminResult argmin;
  /// Argmin depth upsampled (nearest) to image resolution.
  DepthMap depth;
};

/// Features, plane sweep and argmin for one target frame. `k` describes the
/// full-resolution images.
inline DepthEstimate estimate_depth(const Image& target, const std::vector<SourceFrame>& sources,
                                    const Intrinsics& k, const DepthOptions& opt) {
  if (target.height() != k.height || target.width() != k.width) {
    throw Error(ErrorCode::DimensionMismatch, "target image does not match the intrinsics");
  }
  DepthEstimate out;
  out.planes = make_planes(opt.d_min, opt.d_max, opt.planes, opt.spacing);
  const FeatureMap target_features = extract_features(target, opt.features, opt.scale);
  if (opt.zero_cost_volume) {
    out.cost_volume = zero_volume(target_features.height(), target_features.width(), opt.planes);
  } else {
    if (sources.empty()) throw Error(ErrorCode::EmptySourceList, "depth estimation needs a source frame");
    std::vector<SourceView> views;
    views.reserve(sources.size());
    for (const auto& s : sources) {
      require_same_extent(*s.image, target, ErrorCode::ShapeMismatch, "source image vs target");
      views.push_back({extract_features(*s.image, opt.features, opt.scale), s.target_to_source});
    }
    out.cost_volume = build_cost_volume(target_features, views, k.scaled(opt.scale), out.planes, opt.threads);
  }
  out.argmin = argmin_depth(out.cost_volume, out.planes);
  out.depth = upsample_nearest(out.argmin.depth, k.height, k.width, opt.scale);
  return out;
}

/// Synthesized views of the target from each source through `depth`.
inline std::vector<SynthesizedView> synthesize_views(const std::vector<SourceFrame>& sources,
                                                     const DepthMap& depth, const Intrinsics& k) {
  std::vector<SynthesizedView> views;
  views.reserve(sources.size());
  for (const auto& s : sources) {
    Sampled sampled = synthesize_view(*s.image, depth, s.target_to_source, k);
    views.push_back({std::move(sampled.values), std::move(sampled.valid)});
  }
  return views;
}

}  // namespace sweepdepth
