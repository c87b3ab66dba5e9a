#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "irsr/errors.hpp"

namespace irsr {

// Declared value range of a plane. Storage and file formats use kUnit
// ([0,1]); the networks consume and emit kSigned ([-1,1]).
enum class RangeTag { kUnit, kSigned };

// Single-band 2-D image, row-major, double precision.
class ImagePlane {
 public:
  ImagePlane() = default;
  ImagePlane(int height, int width, RangeTag range = RangeTag::kUnit)
      : h_(height), w_(width), range_(range), v_(checked_size(height, width), 0.0) {}

  static ImagePlane full(int height, int width, double value, RangeTag range = RangeTag::kUnit) {
    ImagePlane p(height, width, range);
    for (auto& x : p.v_) x = value;
    return p;
  }

  int height() const { return h_; }
  int width() const { return w_; }
  RangeTag range() const { return range_; }
  void set_range(RangeTag r) { range_ = r; }
  size_t size() const { return v_.size(); }
  bool empty() const { return v_.empty(); }

  double& at(int i, int j) { return v_[static_cast<size_t>(i) * w_ + j]; }
  double at(int i, int j) const { return v_[static_cast<size_t>(i) * w_ + j]; }
  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }
  std::vector<double>& values() { return v_; }
  const std::vector<double>& values() const { return v_; }

  bool same_shape(const ImagePlane& o) const { return h_ == o.h_ && w_ == o.w_; }

  // True when every value lies inside the declared range.
  bool range_ok() const {
    const double lo = range_ == RangeTag::kUnit ? 0.0 : -1.0;
    for (double x : v_) {
      if (!(x >= lo && x <= 1.0)) return false;
    }
    return true;
  }

  void clamp_to_range() {
    const double lo = range_ == RangeTag::kUnit ? 0.0 : -1.0;
    for (auto& x : v_) {
      if (x < lo) x = lo;
      if (x > 1.0) x = 1.0;
    }
  }

  // Linear map between the unit and signed conventions.
  ImagePlane to_signed() const {
    require_range(RangeTag::kUnit, "to_signed");
    ImagePlane out(h_, w_, RangeTag::kSigned);
    for (size_t i = 0; i < v_.size(); ++i) out.v_[i] = 2.0 * v_[i] - 1.0;
    return out;
  }

  ImagePlane to_unit() const {
    require_range(RangeTag::kSigned, "to_unit");
    ImagePlane out(h_, w_, RangeTag::kUnit);
    for (size_t i = 0; i < v_.size(); ++i) out.v_[i] = 0.5 * (v_[i] + 1.0);
    return out;
  }

  void require_range(RangeTag r, const char* where) const {
    if (range_ != r) throw ValueError(std::string(where) + ": plane carries the wrong range tag");
  }

 private:
  static size_t checked_size(int h, int w) {
    if (h <= 0 || w <= 0) throw DimensionError("ImagePlane: non-positive dimensions");
    return static_cast<size_t>(h) * static_cast<size_t>(w);
  }

  int h_ = 0;
  int w_ = 0;
  RangeTag range_ = RangeTag::kUnit;
  std::vector<double> v_;
};

// Three-channel color image as separate planes (r, g, b), unit range.
struct ColorImage {
  std::array<ImagePlane, 3> ch;

  int height() const { return ch[0].height(); }
  int width() const { return ch[0].width(); }

  void validate() const {
    for (const auto& p : ch) {
      if (p.empty()) throw DimensionError("ColorImage: empty channel");
      if (!p.same_shape(ch[0])) throw DimensionError("ColorImage: channel shapes differ");
      p.require_range(RangeTag::kUnit, "ColorImage");
    }
  }
};

// Per-class binary masks aligned with an image. Plane k holds 1 where the
// pixel belongs to class k, 0 elsewhere; classes gives the fixed ordering.
struct ClassMaskStack {
  std::vector<std::string> classes;
  std::vector<ImagePlane> planes;

  int height() const { return planes.empty() ? 0 : planes[0].height(); }
  int width() const { return planes.empty() ? 0 : planes[0].width(); }
  size_t num_classes() const { return classes.size(); }

  void validate() const {
    if (classes.empty()) throw ConfigError("ClassMaskStack: empty class list");
    if (planes.size() != classes.size())
      throw DimensionError("ClassMaskStack: plane count differs from class count");
    for (const auto& p : planes) {
      if (!p.same_shape(planes[0])) throw DimensionError("ClassMaskStack: plane shapes differ");
      for (double x : p.values()) {
        if (x != 0.0 && x != 1.0) throw ValueError("ClassMaskStack: mask values must be 0 or 1");
      }
    }
  }
};

}  // namespace irsr
