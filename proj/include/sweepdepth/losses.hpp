#pragma once

#include <cmath>
#include <vector>

#include "sweepdepth/core.hpp"

namespace sweepdepth {

struct SsimConstants {
  double c1 = 0.01 * 0.01;
  double c2 = 0.03 * 0.03;
};

/**
 * Per-pixel, per-channel SSIM over 3x3 windows with replicated borders.
 * Statistics are plain window means: sigma_a = E[a^2] - E[a]^2.
 */
inline Image ssim(const Image& a, const Image& b, SsimConstants k = {}) {
  if (!a.same_shape(b)) throw Error(ErrorCode::ShapeMismatch, "ssim inputs differ in shape");
  const int h = a.height();
  const int w = a.width();
  Image out(h, w, a.channels());
  for (int c = 0; c < a.channels(); ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double ma = 0, mb = 0, maa = 0, mbb = 0, mab = 0;
        for (int dy = -1; dy <= 1; ++dy) {
          const int yy = std::clamp(y + dy, 0, h - 1);
          for (int dx = -1; dx <= 1; ++dx) {
            const int xx = std::clamp(x + dx, 0, w - 1);
            const double va = a(yy, xx, c);
            const double vb = b(yy, xx, c);
            ma += va;
            mb += vb;
            maa += va * va;
            mbb += vb * vb;
            mab += va * vb;
          }
        }
        ma /= 9.0;
        mb /= 9.0;
        const double var_a = maa / 9.0 - ma * ma;
        const double var_b = mbb / 9.0 - mb * mb;
        const double cov = mab / 9.0 - ma * mb;
        const double num = (2.0 * ma * mb + k.c1) * (2.0 * cov + k.c2);
        const double den = (ma * ma + mb * mb + k.c1) * (var_a + var_b + k.c2);
        out(y, x, c) = num / den;
      }
    }
  }
  return out;
}

/// pe = alpha/2 (1 - SSIM) + (1 - alpha) |pred - target|, channel-averaged.
inline Image photometric_error(const Image& pred, const Image& target, double alpha = 0.85) {
  if (!pred.same_shape(target)) {
    throw Error(ErrorCode::ShapeMismatch, "photometric error inputs differ in shape");
  }
  const Image s = ssim(pred, target);
  const int ch = pred.channels();
  Image pe(pred.height(), pred.width(), 1);
  for (int y = 0; y < pred.height(); ++y) {
    for (int x = 0; x < pred.width(); ++x) {
      double acc = 0.0;
      for (int c = 0; c < ch; ++c) {
        acc += 0.5 * alpha * (1.0 - s(y, x, c)) +
               (1.0 - alpha) * std::abs(pred(y, x, c) - target(y, x, c));
      }
      pe(y, x) = acc / ch;
    }
  }
  return pe;
}

struct SynthesizedView {
  Image image;
  Mask valid;
};

struct ReprojectionLoss {
  double value = 0.0;
  /// Per-pixel minimum pe; 0 where no source was valid.
  Image per_pixel;
  /// 1 where at least one source was valid.
  Mask included;
};

/// Per-pixel minimum of pe over the sources valid at that pixel; the scalar
/// is the mean over pixels with at least one valid source.
inline ReprojectionLoss min_reprojection_loss(const Image& target,
                                              const std::vector<SynthesizedView>& views,
                                              double alpha = 0.85) {
  if (views.empty()) throw Error(ErrorCode::EmptySources, "need at least one synthesized view");
  const int h = target.height();
  const int w = target.width();
  ReprojectionLoss out{0.0, Image(h, w, 1, 0.0), Mask(h, w)};
  Image best(h, w, 1, 0.0);
  for (const auto& view : views) {
    if (!view.image.same_shape(target) || !view.valid.same_extent(target)) {
      throw Error(ErrorCode::ShapeMismatch, "synthesized view differs in shape from the target");
    }
    const Image pe = photometric_error(view.image, target, alpha);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (!view.valid(y, x)) continue;
        if (!out.included(y, x) || pe(y, x) < best(y, x)) best(y, x) = pe(y, x);
        out.included(y, x) = 1;
      }
    }
  }
  double sum = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!out.included(y, x)) continue;
      out.per_pixel(y, x) = best(y, x);
      sum += best(y, x);
      ++n;
    }
  }
  out.value = n > 0 ? sum / static_cast<double>(n) : 0.0;
  return out;
}

/// 1 where max((D_cv - D_hat) / D_hat, (D_hat - D_cv) / D_cv) > 1.
inline Mask consistency_mask(const DepthMap& cv_depth, const DepthMap& teacher) {
  require_same_extent(cv_depth, teacher, ErrorCode::ShapeMismatch, "consistency mask inputs");
  require_positive(cv_depth, "cost-volume depth must be positive");
  require_positive(teacher, "teacher depth must be positive");
  Mask m(cv_depth.height(), cv_depth.width());
  for (std::size_t i = 0; i < cv_depth.data().size(); ++i) {
    const double d_cv = cv_depth.data()[i];
    const double d_hat = teacher.data()[i];
    const double ratio = std::max((d_cv - d_hat) / d_hat, (d_hat - d_cv) / d_cv);
    m.data()[i] = ratio > 1.0 ? 1 : 0;
  }
  return m;
}

inline double mask_fraction(const Mask& m) {
  if (m.empty()) return 0.0;
  std::size_t on = 0;
  for (auto v : m.data()) on += v ? 1 : 0;
  return static_cast<double>(on) / static_cast<double>(m.data().size());
}

/// Mean over all pixels of M |D_t - D_hat|; the teacher is a constant.
inline double consistency_loss(const DepthMap& student, const DepthMap& teacher, const Mask& mask) {
  require_same_extent(student, teacher, ErrorCode::ShapeMismatch, "consistency loss depths");
  require_same_extent(student, mask, ErrorCode::ShapeMismatch, "consistency loss mask");
  if (student.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < student.data().size(); ++i) {
    if (mask.data()[i]) sum += std::abs(student.data()[i] - teacher.data()[i]);
  }
  return sum / static_cast<double>(student.data().size());
}

/**
 * Edge-aware first-order smoothness of mean-normalised inverse depth:
 * mean_x(|dx d*| e^{-|dx I|}) + mean_y(|dy d*| e^{-|dy I|}) with forward
 * differences and channel-averaged image gradients.
 */
inline double smoothness_loss(const DepthMap& depth, const Image& img) {
  require_same_extent(depth, img, ErrorCode::ShapeMismatch, "smoothness inputs");
  require_positive(depth, "smoothness needs positive depths");
  const int h = depth.height();
  const int w = depth.width();
  const int ch = img.channels();
  DepthMap disp(h, w);
  double mean = 0.0;
  for (std::size_t i = 0; i < depth.data().size(); ++i) {
    disp.data()[i] = 1.0 / depth.data()[i];
    mean += disp.data()[i];
  }
  mean /= static_cast<double>(depth.data().size());
  for (double& d : disp.data()) d /= mean;

  double sx = 0.0;
  double sy = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x + 1 < w; ++x) {
      double g = 0.0;
      for (int c = 0; c < ch; ++c) g += std::abs(img(y, x + 1, c) - img(y, x, c));
      sx += std::abs(disp(y, x + 1) - disp(y, x)) * std::exp(-g / ch);
    }
  }
  for (int y = 0; y + 1 < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double g = 0.0;
      for (int c = 0; c < ch; ++c) g += std::abs(img(y + 1, x, c) - img(y, x, c));
      sy += std::abs(disp(y + 1, x) - disp(y, x)) * std::exp(-g / ch);
    }
  }
  const double mx = w > 1 ? sx / (static_cast<double>(h) * (w - 1)) : 0.0;
  const double my = h > 1 ? sy / (static_cast<double>(h - 1) * w) : 0.0;
  return mx + my;
}

struct LossReport {
  double lp = 0.0;
  double lc = 0.0;
  double ls = 0.0;
  double total = 0.0;
  double mask_fraction = 0.0;
  Image per_pixel_lp;
  Mask mask;
};

struct LossWeights {
  double smoothness = 1e-3;
  double alpha = 0.85;
};

/**
 * Total loss (1 - M) L_p + L_consistency + lambda_s L_smooth.
 *
 * The masked reprojection term is averaged over pixels that at least one
 * source observed. `cv_depth` must already be at image resolution.
 */
inline LossReport total_loss(const Image& target, const std::vector<SynthesizedView>& views,
                             const DepthMap& student, const DepthMap& teacher,
                             const DepthMap& cv_depth, const Image& img, LossWeights weights = {}) {
  require_same_extent(student, target, ErrorCode::ShapeMismatch, "student depth vs target");
  require_same_extent(cv_depth, target, ErrorCode::ShapeMismatch, "cost-volume depth vs target");
  LossReport r;
  const ReprojectionLoss rep = min_reprojection_loss(target, views, weights.alpha);
  r.lp = rep.value;
  r.per_pixel_lp = rep.per_pixel;
  r.mask = consistency_mask(cv_depth, teacher);
  r.mask_fraction = sweepdepth::mask_fraction(r.mask);
  r.lc = consistency_loss(student, teacher, r.mask);
  r.ls = smoothness_loss(student, img);

  double masked = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < rep.per_pixel.data().size(); ++i) {
    if (!rep.included.data()[i]) continue;
    if (!r.mask.data()[i]) masked += rep.per_pixel.data()[i];
    ++n;
  }
  const double masked_lp = n > 0 ? masked / static_cast<double>(n) : 0.0;
  r.total = masked_lp + r.lc + weights.smoothness * r.ls;
  return r;
}

}  // namespace sweepdepth
