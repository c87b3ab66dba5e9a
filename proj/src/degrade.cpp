#include "irsr/degrade.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "irsr/errors.hpp"

namespace irsr {

void DegradationParams::validate() const {
  if (blur_sigma < 0.0) throw ValueError("DegradationParams: blur_sigma must be >= 0");
  if (down_factor < 1) throw ValueError("DegradationParams: down_factor must be >= 1");
}

void AugmentationParams::validate() const {
  if (rotation_max_deg < 0.0 || rotation_max_deg > 360.0)
    throw ValueError("AugmentationParams: rotation_max_deg outside [0, 360]");
  if (!(exp_min > 0.0) || !(exp_min <= exp_max))
    throw ValueError("AugmentationParams: need 0 < exp_min <= exp_max");
}

int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int m = 2 * (n - 1);
  i %= m;
  if (i < 0) i += m;
  return i < n ? i : m - i;
}

ImagePlane gaussian_blur(const ImagePlane& img, double sigma) {
  if (!(sigma > 0.0)) throw ValueError("gaussian_blur: sigma must be > 0");
  if (img.empty()) throw DimensionError("gaussian_blur: empty image");

  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * r + 1);
  double sum = 0.0;
  for (int d = -r; d <= r; ++d) {
    k[d + r] = std::exp(-0.5 * d * d / (sigma * sigma));
    sum += k[d + r];
  }
  for (auto& v : k) v /= sum;

  const int h = img.height(), w = img.width();
  ImagePlane tmp(h, w, img.range());
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      double acc = 0.0;
      for (int d = -r; d <= r; ++d) acc += k[d + r] * img.at(i, reflect_index(j + d, w));
      tmp.at(i, j) = acc;
    }
  }
  ImagePlane out(h, w, img.range());
  for (int j = 0; j < w; ++j) {
    for (int i = 0; i < h; ++i) {
      double acc = 0.0;
      for (int d = -r; d <= r; ++d) acc += k[d + r] * tmp.at(reflect_index(i + d, h), j);
      out.at(i, j) = acc;
    }
  }
  return out;
}

ImagePlane resize_bilinear(const ImagePlane& img, int out_h, int out_w) {
  if (out_h <= 0 || out_w <= 0) throw DimensionError("resize_bilinear: non-positive output size");
  const int h = img.height(), w = img.width();
  const double sy = static_cast<double>(h) / out_h;
  const double sx = static_cast<double>(w) / out_w;
  ImagePlane out(out_h, out_w, img.range());
  for (int i = 0; i < out_h; ++i) {
    const double y = (i + 0.5) * sy - 0.5;
    int i0 = static_cast<int>(std::floor(y));
    const double ty = y - i0;
    const int i0c = std::clamp(i0, 0, h - 1);
    const int i1c = std::clamp(i0 + 1, 0, h - 1);
    for (int j = 0; j < out_w; ++j) {
      const double x = (j + 0.5) * sx - 0.5;
      int j0 = static_cast<int>(std::floor(x));
      const double tx = x - j0;
      const int j0c = std::clamp(j0, 0, w - 1);
      const int j1c = std::clamp(j0 + 1, 0, w - 1);
      const double top = (1.0 - tx) * img.at(i0c, j0c) + tx * img.at(i0c, j1c);
      const double bot = (1.0 - tx) * img.at(i1c, j0c) + tx * img.at(i1c, j1c);
      out.at(i, j) = (1.0 - ty) * top + ty * bot;
    }
  }
  return out;
}

ImagePlane resize_nearest(const ImagePlane& img, int out_h, int out_w) {
  if (out_h <= 0 || out_w <= 0) throw DimensionError("resize_nearest: non-positive output size");
  const int h = img.height(), w = img.width();
  const double sy = static_cast<double>(h) / out_h;
  const double sx = static_cast<double>(w) / out_w;
  ImagePlane out(out_h, out_w, img.range());
  for (int i = 0; i < out_h; ++i) {
    const int si = std::min(h - 1, static_cast<int>(std::floor(i * sy)));
    for (int j = 0; j < out_w; ++j) {
      const int sj = std::min(w - 1, static_cast<int>(std::floor(j * sx)));
      out.at(i, j) = img.at(si, sj);
    }
  }
  return out;
}

ImagePlane resample_down(const ImagePlane& img, int factor, ResampleMode mode) {
  if (factor < 1) throw ValueError("resample_down: factor must be >= 1");
  if (img.height() % factor != 0 || img.width() % factor != 0)
    throw DimensionError("resample_down: dimensions not divisible by factor");
  const int oh = img.height() / factor, ow = img.width() / factor;
  return mode == ResampleMode::kBilinear ? resize_bilinear(img, oh, ow)
                                         : resize_nearest(img, oh, ow);
}

ImagePlane resample_up(const ImagePlane& img, int factor, ResampleMode mode) {
  if (factor < 1) throw ValueError("resample_up: factor must be >= 1");
  const int oh = img.height() * factor, ow = img.width() * factor;
  return mode == ResampleMode::kBilinear ? resize_bilinear(img, oh, ow)
                                         : resize_nearest(img, oh, ow);
}

namespace {

template <bool kNearest>
ImagePlane rotate_impl(const ImagePlane& img, double degrees) {
  if (img.empty()) throw DimensionError("rotate: empty image");
  const int h = img.height(), w = img.width();
  const double rad = degrees * M_PI / 180.0;
  const double cs = std::cos(rad), sn = std::sin(rad);
  const double cy = 0.5 * (h - 1), cx = 0.5 * (w - 1);
  ImagePlane out(h, w, img.range());
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      // Inverse map: rotate the output coordinate back into the source.
      const double dy = i - cy, dx = j - cx;
      const double sy = cy + cs * dy + sn * dx;
      const double sx = cx - sn * dy + cs * dx;
      if constexpr (kNearest) {
        const int si = reflect_index(static_cast<int>(std::floor(sy + 0.5)), h);
        const int sj = reflect_index(static_cast<int>(std::floor(sx + 0.5)), w);
        out.at(i, j) = img.at(si, sj);
      } else {
        const int i0 = static_cast<int>(std::floor(sy));
        const int j0 = static_cast<int>(std::floor(sx));
        const double ty = sy - i0, tx = sx - j0;
        const int i0r = reflect_index(i0, h), i1r = reflect_index(i0 + 1, h);
        const int j0r = reflect_index(j0, w), j1r = reflect_index(j0 + 1, w);
        const double top = (1.0 - tx) * img.at(i0r, j0r) + tx * img.at(i0r, j1r);
        const double bot = (1.0 - tx) * img.at(i1r, j0r) + tx * img.at(i1r, j1r);
        out.at(i, j) = (1.0 - ty) * top + ty * bot;
      }
    }
  }
  return out;
}

}  // namespace

ImagePlane rotate_bilinear(const ImagePlane& img, double degrees) {
  return rotate_impl<false>(img, degrees);
}

ImagePlane rotate_nearest(const ImagePlane& img, double degrees) {
  return rotate_impl<true>(img, degrees);
}

ClassMaskStack rotate_masks(const ClassMaskStack& masks, double degrees) {
  ClassMaskStack out;
  out.classes = masks.classes;
  out.planes.reserve(masks.planes.size());
  for (const auto& p : masks.planes) out.planes.push_back(rotate_nearest(p, degrees));
  return out;
}

std::pair<ImagePlane, ImagePlane> degrade_plane(const ImagePlane& plane, double exponent,
                                                const DegradationParams& params) {
  params.validate();
  if (!(exponent > 0.0)) throw ValueError("degrade_plane: exponent must be > 0");
  plane.require_range(RangeTag::kUnit, "degrade_plane");
  if (plane.height() % params.down_factor != 0 || plane.width() % params.down_factor != 0)
    throw DimensionError("degrade_plane: dimensions not divisible by down_factor");

  ImagePlane hr(plane.height(), plane.width(), RangeTag::kUnit);
  for (size_t i = 0; i < plane.size(); ++i) {
    const double v = params.invert ? 1.0 - plane.values()[i] : plane.values()[i];
    hr.values()[i] = std::pow(std::clamp(v, 0.0, 1.0), exponent);
  }

  ImagePlane lr = params.blur_sigma > 0.0 ? gaussian_blur(hr, params.blur_sigma) : hr;
  lr = resample_down(lr, params.down_factor, ResampleMode::kBilinear);
  lr = resample_up(lr, params.down_factor, ResampleMode::kNearest);
  return {std::move(lr), std::move(hr)};
}

std::pair<ImagePlane, ImagePlane> simulate_lr(const ColorImage& src,
                                              const DegradationParams& params,
                                              const AugmentationParams& aug, Rng& rng) {
  src.validate();
  aug.validate();
  const int channel = static_cast<int>(rng.uniform_int(0, 2));
  const double e = rng.uniform(aug.exp_min, aug.exp_max);
  return degrade_plane(src.ch[channel], e, params);
}

}  // namespace irsr
