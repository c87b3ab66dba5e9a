#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "irsr/nn/layers.hpp"

namespace irsr {

// Frozen convolutional stack whose activations define the perceptual
// distance. Weights are either loaded from a file (a stand-in for an
// externally pretrained feature network) or drawn once from a fixed seed;
// in both cases they never change after construction, and the derived
// feature metric is deterministic across runs. Random frozen projections
// preserve texture-discriminative structure well enough for a feature-space
// distance while keeping the toolkit self-contained.
struct FeatureExtractorSpec {
  std::vector<int> channels = {8, 16, 32};
  std::vector<int> pool_after = {1, 1, 0};  // maxpool flag per conv
  int in_channels = 1;
  uint64_t seed = 0x1f5bfea7ULL;

  void validate() const {
    if (channels.empty()) throw ConfigError("FeatureExtractorSpec: empty conv list");
    if (pool_after.size() != channels.size())
      throw ConfigError("FeatureExtractorSpec: pool_after length mismatch");
    for (int c : channels) {
      if (c < 1) throw ConfigError("FeatureExtractorSpec: channels must be positive");
    }
    if (in_channels < 1) throw ConfigError("FeatureExtractorSpec: in_channels must be positive");
  }
};

template <typename S>
class FeatureExtractor {
 public:
  FeatureExtractor() = default;

  static FeatureExtractor random_init(const FeatureExtractorSpec& spec) {
    spec.validate();
    FeatureExtractor fx;
    fx.build(spec);
    Rng rng(spec.seed);
    for (auto& c : fx.convs_) c.init_he(rng);
    return fx;
  }

  // Consumes signed-range tensors. ReLU between convolutions; the output
  // is the last convolution's activation map, spatially reduced by the
  // interior pools so feature resolution differs from image resolution.
  Tensor<S> forward(const Tensor<S>& x) {
    Tensor<S> t = x;
    for (size_t i = 0; i < convs_.size(); ++i) {
      t = convs_[i].forward(t);
      if (i + 1 < convs_.size()) {
        t = relus_[i].forward(t);
        if (spec_.pool_after[i]) t = pools_[i].forward(t);
      }
    }
    return t;
  }

  Tensor<S> backward_to_input(const Tensor<S>& dfeat) {
    Tensor<S> t = dfeat;
    for (size_t ri = convs_.size(); ri-- > 0;) {
      if (ri + 1 < convs_.size()) {
        if (spec_.pool_after[ri]) t = pools_[ri].backward(t);
        t = relus_[ri].backward(t);
      }
      t = convs_[ri].backward(t);
    }
    return t;
  }

  // FNV-1a over the serialized weight bytes; identifies the frozen network.
  uint64_t fingerprint() const {
    uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](const Tensor<S>& t) {
      for (S v : t.values()) {
        const float f = static_cast<float>(v);
        uint32_t bits;
        std::memcpy(&bits, &f, 4);
        for (int b = 0; b < 4; ++b) {
          h ^= (bits >> (8 * b)) & 0xff;
          h *= 0x100000001b3ULL;
        }
      }
    };
    for (const auto& c : convs_) {
      mix(c.w_);
      mix(c.b_);
    }
    return h;
  }

  void save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open for writing: " + path);
    os.write("IRSRFEX1", 8);
    write_u32(os, 1);
    write_u32(os, static_cast<uint32_t>(spec_.channels.size()));
    write_u32(os, static_cast<uint32_t>(spec_.in_channels));
    for (size_t i = 0; i < spec_.channels.size(); ++i) {
      write_u32(os, static_cast<uint32_t>(spec_.channels[i]));
      write_u32(os, static_cast<uint32_t>(spec_.pool_after[i]));
    }
    for (const auto& c : convs_) {
      write_blob(os, c.w_);
      write_blob(os, c.b_);
    }
    if (!os) throw IoError("write failed: " + path);
  }

  static FeatureExtractor load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open for reading: " + path);
    char magic[8];
    is.read(magic, 8);
    if (is.gcount() != 8 || std::string(magic, 8) != "IRSRFEX1")
      throw IoError("not a feature-extractor file: " + path);
    if (read_u32(is, path) != 1) throw IoError("unsupported feature-extractor version: " + path);
    FeatureExtractorSpec spec;
    const uint32_t n = read_u32(is, path);
    if (n == 0 || n > 64) throw IoError("corrupt feature-extractor header: " + path);
    spec.in_channels = static_cast<int>(read_u32(is, path));
    spec.channels.resize(n);
    spec.pool_after.resize(n);
    for (uint32_t i = 0; i < n; ++i) {
      spec.channels[i] = static_cast<int>(read_u32(is, path));
      spec.pool_after[i] = static_cast<int>(read_u32(is, path));
    }
    spec.validate();
    FeatureExtractor fx;
    fx.build(spec);
    for (auto& c : fx.convs_) {
      read_blob(is, c.w_, path);
      read_blob(is, c.b_, path);
    }
    return fx;
  }

  const FeatureExtractorSpec& spec() const { return spec_; }
  std::vector<Conv2d<S>>& convs() { return convs_; }

 private:
  void build(const FeatureExtractorSpec& spec) {
    spec_ = spec;
    int in = spec.in_channels;
    for (size_t i = 0; i < spec.channels.size(); ++i) {
      convs_.emplace_back(in, spec.channels[i], 3);
      in = spec.channels[i];
    }
    relus_.resize(convs_.size());
    pools_.resize(convs_.size());
  }

  static void write_u32(std::ostream& os, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
  }

  static uint32_t read_u32(std::istream& is, const std::string& path) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (is.gcount() != 4) throw IoError("truncated feature-extractor file: " + path);
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
  }

  static void write_blob(std::ostream& os, const Tensor<S>& t) {
    for (S v : t.values()) {
      const float f = static_cast<float>(v);
      uint32_t bits;
      std::memcpy(&bits, &f, 4);
      write_u32(os, bits);
    }
  }

  static void read_blob(std::istream& is, Tensor<S>& t, const std::string& path) {
    for (auto& v : t.values()) {
      const uint32_t bits = read_u32(is, path);
      float f;
      std::memcpy(&f, &bits, 4);
      v = static_cast<S>(f);
    }
  }

  FeatureExtractorSpec spec_;
  std::vector<Conv2d<S>> convs_;
  std::vector<ReLU<S>> relus_;
  std::vector<MaxPool2<S>> pools_;
};

}  // namespace irsr
