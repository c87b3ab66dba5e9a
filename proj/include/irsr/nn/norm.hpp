#pragma once

#include <memory>
#include <string>
#include <vector>

#include "irsr/nn/layers.hpp"

namespace irsr {

// Nearest-neighbor resize of a mask tensor to a feature resolution. Exact
// for the power-of-two reductions used between network levels, and it
// preserves binary values.
template <typename S>
Tensor<S> resize_masks_nearest(const Tensor<S>& masks, int out_h, int out_w) {
  if (out_h <= 0 || out_w <= 0) throw DimensionError("resize_masks_nearest: bad output size");
  Tensor<S> out(masks.n(), masks.c(), out_h, out_w);
  const double sy = static_cast<double>(masks.h()) / out_h;
  const double sx = static_cast<double>(masks.w()) / out_w;
  for (int n = 0; n < masks.n(); ++n) {
    for (int c = 0; c < masks.c(); ++c) {
      const S* src = masks.chan(n, c);
      S* dst = out.chan(n, c);
      for (int i = 0; i < out_h; ++i) {
        const int si = std::min(masks.h() - 1, static_cast<int>(std::floor(i * sy)));
        for (int j = 0; j < out_w; ++j) {
          const int sj = std::min(masks.w() - 1, static_cast<int>(std::floor(j * sx)));
          dst[static_cast<long>(i) * out_w + j] = src[static_cast<long>(si) * masks.w() + sj];
        }
      }
    }
  }
  return out;
}

// Normalization slot used throughout the generator. The unconditioned
// variant is plain batch norm; the conditioned variant modulates the
// normalized activations with maps predicted from the class masks. Both
// expose the inner batch norm under the same parameter names, so weights
// transfer between the two network flavors by name matching.
template <typename S>
class NormLayer {
 public:
  virtual ~NormLayer() = default;
  // masks may be null for unconditioned layers; conditioned layers require
  // a stack already resized to the feature resolution.
  virtual Tensor<S> forward(const Tensor<S>& x, const Tensor<S>* masks, Mode mode) = 0;
  virtual Tensor<S> backward(const Tensor<S>& dy) = 0;
  virtual void collect(const std::string& prefix, std::vector<ParamRef<S>>& out) = 0;
  virtual void init(Rng& rng) = 0;
  virtual bool conditioned() const = 0;
};

template <typename S>
class PlainNorm final : public NormLayer<S> {
 public:
  explicit PlainNorm(int channels) : bn_(channels) {}

  Tensor<S> forward(const Tensor<S>& x, const Tensor<S>* /*masks*/, Mode mode) override {
    return bn_.forward(x, mode);
  }
  Tensor<S> backward(const Tensor<S>& dy) override { return bn_.backward(dy); }
  void collect(const std::string& prefix, std::vector<ParamRef<S>>& out) override {
    bn_.collect(prefix + "/bn", out);
  }
  void init(Rng& /*rng*/) override {}
  bool conditioned() const override { return false; }

 private:
  BatchNorm2d<S> bn_;
};

// y = BN(x) * scale(masks) + shift(masks). Each modulation branch is
// conv3x3(K -> hidden), ReLU, conv3x3(hidden -> C), evaluated per forward
// on the masks for this resolution.
template <typename S>
class CondNorm final : public NormLayer<S> {
 public:
  CondNorm(int channels, int num_classes, int hidden)
      : bn_(channels),
        scale1_(num_classes, hidden, 3),
        scale2_(hidden, channels, 3),
        shift1_(num_classes, hidden, 3),
        shift2_(hidden, channels, 3),
        num_classes_(num_classes) {}

  Tensor<S> forward(const Tensor<S>& x, const Tensor<S>* masks, Mode mode) override {
    if (!masks) throw InputError("CondNorm: conditioned layer called without masks");
    if (masks->c() != num_classes_) throw DimensionError("CondNorm: mask class-count mismatch");
    if (masks->n() != x.n() || masks->h() != x.h() || masks->w() != x.w())
      throw DimensionError("CondNorm: mask resolution mismatch");
    bnout_ = bn_.forward(x, mode);
    smap_ = scale2_.forward(srelu_.forward(scale1_.forward(*masks)));
    tmap_ = shift2_.forward(trelu_.forward(shift1_.forward(*masks)));
    Tensor<S> y(x.n(), x.c(), x.h(), x.w());
    for (size_t i = 0; i < y.size(); ++i) {
      y.values()[i] = bnout_.values()[i] * smap_.values()[i] + tmap_.values()[i];
    }
    return y;
  }

  Tensor<S> backward(const Tensor<S>& dy) override {
    Tensor<S> d_bn(dy.n(), dy.c(), dy.h(), dy.w());
    Tensor<S> d_s(dy.n(), dy.c(), dy.h(), dy.w());
    for (size_t i = 0; i < dy.size(); ++i) {
      d_bn.values()[i] = dy.values()[i] * smap_.values()[i];
      d_s.values()[i] = dy.values()[i] * bnout_.values()[i];
    }
    // Branch gradients end at the masks; mask gradients are discarded.
    scale1_.backward(srelu_.backward(scale2_.backward(d_s)));
    shift1_.backward(trelu_.backward(shift2_.backward(dy)));
    return bn_.backward(d_bn);
  }

  void collect(const std::string& prefix, std::vector<ParamRef<S>>& out) override {
    bn_.collect(prefix + "/bn", out);
    scale1_.collect(prefix + "/scale1", out);
    scale2_.collect(prefix + "/scale2", out);
    shift1_.collect(prefix + "/shift1", out);
    shift2_.collect(prefix + "/shift2", out);
  }

  void init(Rng& rng) override {
    scale1_.init_he(rng);
    scale2_.init_he(rng);
    shift1_.init_he(rng);
    shift2_.init_he(rng);
  }

  // Sets the branch outputs to scale 1 / shift 0 regardless of mask
  // content, making the layer numerically identical to plain batch norm.
  void set_neutral() {
    scale2_.w_.fill(S(0));
    scale2_.b_.fill(S(1));
    shift2_.w_.fill(S(0));
    shift2_.b_.fill(S(0));
  }

  bool conditioned() const override { return true; }

 private:
  BatchNorm2d<S> bn_;
  Conv2d<S> scale1_, scale2_, shift1_, shift2_;
  ReLU<S> srelu_, trelu_;
  int num_classes_ = 0;
  Tensor<S> bnout_, smap_, tmap_;
};

enum class GanMode { kUGan, kCGan };

template <typename S>
std::unique_ptr<NormLayer<S>> make_norm(GanMode mode, int channels, int num_classes, int hidden) {
  if (mode == GanMode::kCGan)
    return std::make_unique<CondNorm<S>>(channels, num_classes, hidden);
  return std::make_unique<PlainNorm<S>>(channels);
}

}  // namespace irsr
