#pragma once

#include <cstdint>
#include <functional>
#include <string_view>
#include <variant>

#include "sweepdepth/core.hpp"
#include "sweepdepth/cost_volume.hpp"

namespace sweepdepth {

/**
 * Counter-based generator: the stream for (seed, sample index) is a pure
 * function of both, so samples can be drawn in any order or concurrently.
 * Outputs are SplitMix64 finalisations of a Weyl sequence over the key.
 */
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t index)
      : key_(mix(seed ^ mix(index + 0x632BE59BD9B4E019ULL))) {}

  std::uint64_t next() { return mix(key_ + kGolden * ++counter_); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

  static std::uint64_t mix(std::uint64_t z) {
    z += kGolden;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Brightness is an additive delta; contrast and saturation are factors.
struct JitterRanges {
  Interval brightness{-0.2, 0.2};
  Interval contrast{0.8, 1.2};
  Interval saturation{0.8, 1.2};

  static JitterRanges identity() { return {{0.0, 0.0}, {1.0, 1.0}, {1.0, 1.0}}; }
};

struct JitterParams {
  double brightness = 0.0;
  double contrast = 1.0;
  double saturation = 1.0;

  bool operator==(const JitterParams&) const = default;
};

struct AugmentConfig {
  double p = 0.25;
  double q = 0.25;
  JitterRanges jitter;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(p >= 0.0 && p <= 1.0) || !(q >= 0.0 && q <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "augmentation probabilities must lie in [0, 1]");
    }
    if (p + q > 1.0 + 1e-12) {
      throw Error(ErrorCode::InvalidArgument, "p + q must not exceed 1");
    }
  }
};

enum class Augmentation { None, ZeroVolume, StaticSubstitute };

constexpr std::string_view to_string(Augmentation a) {
  switch (a) {
    case Augmentation::None: return "none";
    case Augmentation::ZeroVolume: return "zero_volume";
    case Augmentation::StaticSubstitute: return "static_substitute";
  }
  return "?";
}

/// The two substitutions are exclusive: one uniform draw u picks
/// ZeroVolume for u < p, StaticSubstitute for p <= u < p + q.
inline Augmentation draw_augmentation(const AugmentConfig& cfg, CounterRng& rng) {
  cfg.validate();
  const double u = rng.uniform();
  if (u < cfg.p) return Augmentation::ZeroVolume;
  if (u < cfg.p + cfg.q) return Augmentation::StaticSubstitute;
  return Augmentation::None;
}

inline Augmentation draw_augmentation(const AugmentConfig& cfg, std::uint64_t sample_index) {
  CounterRng rng(cfg.seed, sample_index);
  return draw_augmentation(cfg, rng);
}

inline JitterParams draw_jitter(CounterRng& rng, const JitterRanges& ranges) {
  JitterParams j;
  j.brightness = rng.uniform(ranges.brightness.lo, ranges.brightness.hi);
  j.contrast = rng.uniform(ranges.contrast.lo, ranges.contrast.hi);
  j.saturation = rng.uniform(ranges.saturation.lo, ranges.saturation.hi);
  return j;
}

/// Brightness, then contrast about the grey mean, then saturation against
/// per-pixel grey; clamped to [0, 1] after every step.
inline Image apply_jitter(const Image& img, const JitterParams& j) {
  Image out = img;
  for (double& v : out.data()) v = std::clamp(v + j.brightness, 0.0, 1.0);

  const Image grey = to_gray(out);
  double mean = 0.0;
  for (double v : grey.data()) mean += v;
  mean = grey.empty() ? 0.0 : mean / static_cast<double>(grey.data().size());
  for (double& v : out.data()) v = std::clamp(mean + j.contrast * (v - mean), 0.0, 1.0);

  if (out.channels() > 1) {
    const Image g = to_gray(out);
    for (int y = 0; y < out.height(); ++y) {
      for (int x = 0; x < out.width(); ++x) {
        for (int c = 0; c < out.channels(); ++c) {
          const double v = g(y, x) + j.saturation * (out(y, x, c) - g(y, x));
          out(y, x, c) = std::clamp(v, 0.0, 1.0);
        }
      }
    }
  }
  return out;
}

inline Image color_jitter(const Image& img, CounterRng& rng, const JitterRanges& ranges) {
  return apply_jitter(img, draw_jitter(rng, ranges));
}

struct CostVolumeShape {
  int height = 0;
  int width = 0;
  int planes = 0;
};

/**
 * What feeds the cost volume for one sample: the untouched previous frame
 * (by reference), a jittered copy of the target, or a zero volume. The
 * reprojection loss always uses the real frames, which this never touches.
 */
struct AugmentedInput {
  Augmentation decision = Augmentation::None;
  std::variant<std::reference_wrapper<const Image>, Image, CostVolume> payload;

  bool has_zero_volume() const { return std::holds_alternative<CostVolume>(payload); }
  const CostVolume& zero_cost_volume() const { return std::get<CostVolume>(payload); }

  /// Source image for the cost volume; throws for the zero-volume branch.
  const Image& source() const {
    if (const auto* ref = std::get_if<std::reference_wrapper<const Image>>(&payload)) {
      return ref->get();
    }
    if (const auto* img = std::get_if<Image>(&payload)) return *img;
    throw Error(ErrorCode::InvalidArgument, "zero-volume augmentation has no source image");
  }
};

/// `rng` supplies the jitter factors for StaticSubstitute; it should be the
/// generator the decision was drawn from so one sample index fixes both.
inline AugmentedInput apply_augmentation(Augmentation decision, const Image& target,
                                         const Image& previous, CostVolumeShape cv_shape,
                                         CounterRng& rng, const JitterRanges& ranges) {
  switch (decision) {
    case Augmentation::None:
      return {decision, std::cref(previous)};
    case Augmentation::StaticSubstitute:
      return {decision, color_jitter(target, rng, ranges)};
    case Augmentation::ZeroVolume:
      return {decision, zero_volume(cv_shape.height, cv_shape.width, cv_shape.planes)};
  }
  throw Error(ErrorCode::InvalidArgument, "unknown augmentation");
}

}  // namespace sweepdepth
