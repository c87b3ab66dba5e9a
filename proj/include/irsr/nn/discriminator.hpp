#pragma once

#include <array>
#include <string>
#include <vector>

#include "irsr/nn/layers.hpp"

namespace irsr {

// Binary real/fake critic. Eight 3x3 convolutions with stride alternating
// 1 and 2 and widths base*{1,1,2,2,4,4,8,8}, batch norm on all but the
// first, leaky-ReLU activations, then global average pooling and two fully
// connected layers ending in a sigmoid probability. The critic sees only
// the image, never the masks.
struct DiscriminatorConfig {
  int base = 64;
  int fc_dim = 1024;
  int in_channels = 1;

  void validate() const {
    if (base < 1 || fc_dim < 1 || in_channels < 1)
      throw ConfigError("DiscriminatorConfig: all sizes must be positive");
  }
};

template <typename S>
class Discriminator {
 public:
  explicit Discriminator(const DiscriminatorConfig& cfg) : cfg_((cfg.validate(), cfg)) {
    const std::array<int, 8> mult = {1, 1, 2, 2, 4, 4, 8, 8};
    const std::array<int, 8> stride = {1, 2, 1, 2, 1, 2, 1, 2};
    int in = cfg.in_channels;
    for (int i = 0; i < 8; ++i) {
      const int out = cfg.base * mult[i];
      convs_.emplace_back(in, out, 3, stride[i]);
      if (i > 0) bns_.emplace_back(out);
      acts_.emplace_back(0.2);
      in = out;
    }
    fc1_ = Linear<S>(cfg.base * 8, cfg.fc_dim);
    fc2_ = Linear<S>(cfg.fc_dim, 1);
    fc_act_ = LeakyReLU<S>(0.2);
  }

  const DiscriminatorConfig& config() const { return cfg_; }

  void init(uint64_t seed) {
    Rng rng(seed);
    for (auto& c : convs_) c.init_he(rng);
    fc1_.init_he(rng);
    fc2_.init_he(rng);
  }

  // Returns per-item probabilities, shape [N, 1, 1, 1].
  Tensor<S> forward(const Tensor<S>& x, Mode mode) {
    if (x.c() != cfg_.in_channels) throw DimensionError("Discriminator: channel mismatch");
    Tensor<S> t = x;
    for (int i = 0; i < 8; ++i) {
      t = convs_[i].forward(t);
      if (i > 0) t = bns_[i - 1].forward(t, mode);
      t = acts_[i].forward(t);
    }
    t = gap_.forward(t);
    t = fc_act_.forward(fc1_.forward(t));
    return sig_.forward(fc2_.forward(t));
  }

  Tensor<S> backward(const Tensor<S>& dprob) {
    Tensor<S> t = fc1_.backward(fc_act_.backward(fc2_.backward(sig_.backward(dprob))));
    t = gap_.backward(t);
    for (int i = 7; i >= 0; --i) {
      t = acts_[i].backward(t);
      if (i > 0) t = bns_[i - 1].backward(t);
      t = convs_[i].backward(t);
    }
    return t;
  }

  std::vector<ParamRef<S>> params() {
    std::vector<ParamRef<S>> out;
    for (int i = 0; i < 8; ++i) {
      convs_[i].collect("c" + std::to_string(i + 1), out);
      if (i > 0) bns_[i - 1].collect("bn" + std::to_string(i + 1), out);
    }
    fc1_.collect("fc1", out);
    fc2_.collect("fc2", out);
    return out;
  }

  long trainable_count() {
    auto ps = params();
    return param_count(ps, true);
  }

 private:
  DiscriminatorConfig cfg_;
  std::vector<Conv2d<S>> convs_;
  std::vector<BatchNorm2d<S>> bns_;
  std::vector<LeakyReLU<S>> acts_;
  GlobalAvgPool<S> gap_;
  Linear<S> fc1_, fc2_;
  LeakyReLU<S> fc_act_;
  Sigmoid<S> sig_;
};

}  // namespace irsr
