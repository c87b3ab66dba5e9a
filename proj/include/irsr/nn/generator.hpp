#pragma once

#include <array>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "irsr/nn/norm.hpp"

namespace irsr {

// Channel widths for the four resolution levels (three encoder levels plus
// the bridge). The conditioned flavor modulates every normalization slot
// with class masks; the unconditioned flavor ignores masks entirely.
struct GeneratorConfig {
  GanMode mode = GanMode::kCGan;
  std::array<int, 4> widths = {64, 128, 256, 512};
  int num_classes = 3;
  int cond_hidden = 64;
  int in_channels = 1;
  int out_channels = 1;

  void validate() const {
    for (int w : widths) {
      if (w <= 0) throw ConfigError("GeneratorConfig: widths must be positive");
    }
    if (in_channels <= 0 || out_channels <= 0)
      throw ConfigError("GeneratorConfig: channel counts must be positive");
    if (mode == GanMode::kCGan) {
      if (num_classes < 1) throw ConfigError("GeneratorConfig: conditioned mode needs classes");
      if (cond_hidden < 1) throw ConfigError("GeneratorConfig: cond_hidden must be positive");
    }
  }
};

template <typename S>
Tensor<S> concat_channels(const Tensor<S>& a, const Tensor<S>& b) {
  if (a.n() != b.n() || a.h() != b.h() || a.w() != b.w())
    throw DimensionError("concat_channels: spatial shape mismatch");
  Tensor<S> out(a.n(), a.c() + b.c(), a.h(), a.w());
  const size_t plane = static_cast<size_t>(a.h()) * a.w();
  for (int n = 0; n < a.n(); ++n) {
    std::memcpy(out.item(n), a.item(n), a.c() * plane * sizeof(S));
    std::memcpy(out.item(n) + a.c() * plane, b.item(n), b.c() * plane * sizeof(S));
  }
  return out;
}

template <typename S>
std::pair<Tensor<S>, Tensor<S>> split_channels(const Tensor<S>& x, int c_first) {
  if (c_first <= 0 || c_first >= x.c()) throw DimensionError("split_channels: bad split point");
  Tensor<S> a(x.n(), c_first, x.h(), x.w());
  Tensor<S> b(x.n(), x.c() - c_first, x.h(), x.w());
  const size_t plane = static_cast<size_t>(x.h()) * x.w();
  for (int n = 0; n < x.n(); ++n) {
    std::memcpy(a.item(n), x.item(n), c_first * plane * sizeof(S));
    std::memcpy(b.item(n), x.item(n) + c_first * plane, (x.c() - c_first) * plane * sizeof(S));
  }
  return {std::move(a), std::move(b)};
}

// conv, norm, ReLU, conv, norm, plus the identity, then ReLU. Channel
// count is preserved.
template <typename S>
class ResidualBlock {
 public:
  ResidualBlock(int channels, GanMode mode, int num_classes, int hidden)
      : c1_(channels, channels, 3),
        c2_(channels, channels, 3),
        n1_(make_norm<S>(mode, channels, num_classes, hidden)),
        n2_(make_norm<S>(mode, channels, num_classes, hidden)) {}

  Tensor<S> forward(const Tensor<S>& x, const Tensor<S>* masks, Mode mode) {
    x_ = x;
    Tensor<S> t = r1_.forward(n1_->forward(c1_.forward(x), masks, mode));
    t = n2_->forward(c2_.forward(t), masks, mode);
    t.add(x);
    return rout_.forward(t);
  }

  Tensor<S> backward(const Tensor<S>& dy) {
    const Tensor<S> dsum = rout_.backward(dy);
    Tensor<S> dx = c1_.backward(n1_->backward(r1_.backward(c2_.backward(n2_->backward(dsum)))));
    dx.add(dsum);
    return dx;
  }

  void collect(const std::string& prefix, std::vector<ParamRef<S>>& out) {
    c1_.collect(prefix + "/c1", out);
    n1_->collect(prefix + "/n1", out);
    c2_.collect(prefix + "/c2", out);
    n2_->collect(prefix + "/n2", out);
  }

  void init(Rng& rng) {
    c1_.init_he(rng);
    n1_->init(rng);
    c2_.init_he(rng);
    n2_->init(rng);
  }

 private:
  Conv2d<S> c1_, c2_;
  std::unique_ptr<NormLayer<S>> n1_, n2_;
  ReLU<S> r1_, rout_;
  Tensor<S> x_;
};

// Entry conv widens the channels, a residual block refines, max pooling
// halves the resolution. The pre-pool features feed the skip path.
template <typename S>
class DownBlock {
 public:
  DownBlock(int in_ch, int out_ch, GanMode mode, int num_classes, int hidden)
      : entry_(in_ch, out_ch, 3), res_(out_ch, mode, num_classes, hidden) {}

  std::pair<Tensor<S>, Tensor<S>> forward(const Tensor<S>& x, const Tensor<S>* masks, Mode mode) {
    Tensor<S> skip = res_.forward(entry_.forward(x), masks, mode);
    Tensor<S> pooled = pool_.forward(skip);
    return {std::move(skip), std::move(pooled)};
  }

  Tensor<S> backward(const Tensor<S>& d_pooled, const Tensor<S>& d_skip) {
    Tensor<S> t = pool_.backward(d_pooled);
    t.add(d_skip);
    return entry_.backward(res_.backward(t));
  }

  void collect(const std::string& prefix, std::vector<ParamRef<S>>& out) {
    entry_.collect(prefix + "/entry", out);
    res_.collect(prefix + "/res", out);
  }

  void init(Rng& rng) {
    entry_.init_he(rng);
    res_.init(rng);
  }

 private:
  Conv2d<S> entry_;
  ResidualBlock<S> res_;
  MaxPool2<S> pool_;
};

// Bottom of the U: widen, refine, and upsample back toward the decoder.
template <typename S>
class Bridge {
 public:
  Bridge(int in_ch, int out_ch, GanMode mode, int num_classes, int hidden)
      : entry_(in_ch, out_ch, 3), res_(out_ch, mode, num_classes, hidden) {}

  Tensor<S> forward(const Tensor<S>& x, const Tensor<S>* masks, Mode mode) {
    return up_.forward(res_.forward(entry_.forward(x), masks, mode));
  }

  Tensor<S> backward(const Tensor<S>& dy) {
    return entry_.backward(res_.backward(up_.backward(dy)));
  }

  void collect(const std::string& prefix, std::vector<ParamRef<S>>& out) {
    entry_.collect(prefix + "/entry", out);
    res_.collect(prefix + "/res", out);
  }

  void init(Rng& rng) {
    entry_.init_he(rng);
    res_.init(rng);
  }

 private:
  Conv2d<S> entry_;
  ResidualBlock<S> res_;
  BilinearUp2<S> up_;
};

// Joins a skip path with upsampled decoder features: channel concat
// (skip first), then a conv that halves the combined width, norm, ReLU.
template <typename S>
class ConcatBlock {
 public:
  ConcatBlock(int skip_ch, int up_ch, GanMode mode, int num_classes, int hidden)
      : skip_ch_(skip_ch),
        conv_(skip_ch + up_ch, (skip_ch + up_ch) / 2, 3),
        norm_(make_norm<S>(mode, (skip_ch + up_ch) / 2, num_classes, hidden)) {
    if ((skip_ch + up_ch) / 2 < 1) throw ConfigError("ConcatBlock: fused width collapses to zero");
  }

  Tensor<S> forward(const Tensor<S>& x, const Tensor<S>& skip, const Tensor<S>* masks, Mode mode,
                    Tensor<S>* trace_skip_part = nullptr) {
    const Tensor<S> cat = concat_channels(skip, x);
    if (trace_skip_part) *trace_skip_part = split_channels(cat, skip_ch_).first;
    return relu_.forward(norm_->forward(conv_.forward(cat), masks, mode));
  }

  // Returns (d_x, d_skip).
  std::pair<Tensor<S>, Tensor<S>> backward(const Tensor<S>& dy) {
    const Tensor<S> dcat = conv_.backward(norm_->backward(relu_.backward(dy)));
    auto [dskip, dx] = split_channels(dcat, skip_ch_);
    return {std::move(dx), std::move(dskip)};
  }

  int out_channels() const { return conv_.out_channels(); }

  void collect(const std::string& prefix, std::vector<ParamRef<S>>& out) {
    conv_.collect(prefix + "/conv", out);
    norm_->collect(prefix + "/norm", out);
  }

  void init(Rng& rng) {
    conv_.init_he(rng);
    norm_->init(rng);
  }

 private:
  int skip_ch_;
  Conv2d<S> conv_;
  std::unique_ptr<NormLayer<S>> norm_;
  ReLU<S> relu_;
};

template <typename S>
class UpBlock {
 public:
  UpBlock(int skip_ch, int up_ch, bool upsample, GanMode mode, int num_classes, int hidden)
      : cat_(skip_ch, up_ch, mode, num_classes, hidden),
        res_(cat_.out_channels(), mode, num_classes, hidden),
        upsample_(upsample) {}

  Tensor<S> forward(const Tensor<S>& x, const Tensor<S>& skip, const Tensor<S>* masks, Mode mode,
                    Tensor<S>* trace_skip_part = nullptr) {
    Tensor<S> t = res_.forward(cat_.forward(x, skip, masks, mode, trace_skip_part), masks, mode);
    return upsample_ ? up_.forward(t) : std::move(t);
  }

  std::pair<Tensor<S>, Tensor<S>> backward(const Tensor<S>& dy) {
    return cat_.backward(res_.backward(upsample_ ? up_.backward(dy) : dy));
  }

  int out_channels() const { return cat_.out_channels(); }

  void collect(const std::string& prefix, std::vector<ParamRef<S>>& out) {
    cat_.collect(prefix + "/cat", out);
    res_.collect(prefix + "/res", out);
  }

  void init(Rng& rng) {
    cat_.init(rng);
    res_.init(rng);
  }

 private:
  ConcatBlock<S> cat_;
  ResidualBlock<S> res_;
  BilinearUp2<S> up_;
  bool upsample_;
};

// Captured intermediates for structural checks: the three encoder skip
// outputs and the skip slice each decoder concat actually consumed,
// indexed by level (0 = full resolution).
template <typename S>
struct GenTrace {
  std::array<Tensor<S>, 3> skip;
  std::array<Tensor<S>, 3> cat_skip;
};

// Encoder-decoder generator with three resolution halvings, residual
// refinement at every level, skip concatenations, and a tanh output head.
// Masks enter only through the conditioned normalization layers.
template <typename S>
class Generator {
 public:
  explicit Generator(const GeneratorConfig& cfg)
      : cfg_((cfg.validate(), cfg)),
        d1_(cfg.in_channels, cfg.widths[0], cfg.mode, cfg.num_classes, cfg.cond_hidden),
        d2_(cfg.widths[0], cfg.widths[1], cfg.mode, cfg.num_classes, cfg.cond_hidden),
        d3_(cfg.widths[1], cfg.widths[2], cfg.mode, cfg.num_classes, cfg.cond_hidden),
        bridge_(cfg.widths[2], cfg.widths[3], cfg.mode, cfg.num_classes, cfg.cond_hidden),
        u3_(cfg.widths[2], cfg.widths[3], true, cfg.mode, cfg.num_classes, cfg.cond_hidden),
        u2_(cfg.widths[1], u3_.out_channels(), true, cfg.mode, cfg.num_classes, cfg.cond_hidden),
        u1_(cfg.widths[0], u2_.out_channels(), false, cfg.mode, cfg.num_classes, cfg.cond_hidden),
        final_(u1_.out_channels(), cfg.out_channels, 3) {}

  const GeneratorConfig& config() const { return cfg_; }

  void init(uint64_t seed) {
    Rng rng(seed);
    d1_.init(rng);
    d2_.init(rng);
    d3_.init(rng);
    bridge_.init(rng);
    u3_.init(rng);
    u2_.init(rng);
    u1_.init(rng);
    final_.init_he(rng);
  }

  Tensor<S> forward(const Tensor<S>& x, const Tensor<S>* masks, Mode mode,
                    GenTrace<S>* trace = nullptr) {
    if (x.c() != cfg_.in_channels) throw DimensionError("Generator: input channel mismatch");
    if (x.h() % 8 != 0 || x.w() % 8 != 0)
      throw DimensionError("Generator: input size must be divisible by 8");
    const bool cond = cfg_.mode == GanMode::kCGan;
    if (cond) {
      if (!masks) throw InputError("Generator: conditioned mode requires masks");
      if (masks->n() != x.n() || masks->h() != x.h() || masks->w() != x.w())
        throw DimensionError("Generator: mask shape mismatch");
      if (masks->c() != cfg_.num_classes)
        throw DimensionError("Generator: mask class-count mismatch");
      m_[0] = *masks;
      m_[1] = resize_masks_nearest(*masks, x.h() / 2, x.w() / 2);
      m_[2] = resize_masks_nearest(*masks, x.h() / 4, x.w() / 4);
      m_[3] = resize_masks_nearest(*masks, x.h() / 8, x.w() / 8);
    }
    const Tensor<S>* m0 = cond ? &m_[0] : nullptr;
    const Tensor<S>* m1 = cond ? &m_[1] : nullptr;
    const Tensor<S>* m2 = cond ? &m_[2] : nullptr;
    const Tensor<S>* m3 = cond ? &m_[3] : nullptr;

    auto [s1, p1] = d1_.forward(x, m0, mode);
    auto [s2, p2] = d2_.forward(p1, m1, mode);
    auto [s3, p3] = d3_.forward(p2, m2, mode);
    if (trace) {
      trace->skip[0] = s1;
      trace->skip[1] = s2;
      trace->skip[2] = s3;
    }
    Tensor<S> t = bridge_.forward(p3, m3, mode);
    t = u3_.forward(t, s3, m2, mode, trace ? &trace->cat_skip[2] : nullptr);
    t = u2_.forward(t, s2, m1, mode, trace ? &trace->cat_skip[1] : nullptr);
    t = u1_.forward(t, s1, m0, mode, trace ? &trace->cat_skip[0] : nullptr);
    return tanh_.forward(final_.forward(t));
  }

  Tensor<S> backward(const Tensor<S>& dy) {
    Tensor<S> t = final_.backward(tanh_.backward(dy));
    auto [du2, ds1] = u1_.backward(t);
    auto [du3, ds2] = u2_.backward(du2);
    auto [db, ds3] = u3_.backward(du3);
    Tensor<S> dp3 = bridge_.backward(db);
    Tensor<S> dp2 = d3_.backward(dp3, ds3);
    Tensor<S> dp1 = d2_.backward(dp2, ds2);
    return d1_.backward(dp1, ds1);
  }

  std::vector<ParamRef<S>> params() {
    std::vector<ParamRef<S>> out;
    d1_.collect("d1", out);
    d2_.collect("d2", out);
    d3_.collect("d3", out);
    bridge_.collect("bridge", out);
    u3_.collect("u3", out);
    u2_.collect("u2", out);
    u1_.collect("u1", out);
    final_.collect("final", out);
    return out;
  }

  long trainable_count() {
    auto ps = params();
    return param_count(ps, true);
  }

 private:
  GeneratorConfig cfg_;
  DownBlock<S> d1_, d2_, d3_;
  Bridge<S> bridge_;
  UpBlock<S> u3_, u2_, u1_;
  Conv2d<S> final_;
  Tanh<S> tanh_;
  std::array<Tensor<S>, 4> m_;
};

}  // namespace irsr
