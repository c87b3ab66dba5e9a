#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "irsr/errors.hpp"
#include "irsr/nn/tensor.hpp"
#include "irsr/rng.hpp"

namespace irsr {

enum class Mode { kTrain, kEval };

// Named view over one parameter or running-stat buffer of a network.
// Buffers carry no gradient and are skipped by the optimizer but still
// travel with checkpoints.
template <typename S>
struct ParamRef {
  std::string name;
  Tensor<S>* value = nullptr;
  Tensor<S>* grad = nullptr;  // null for buffers
  bool trainable = false;
};

template <typename S>
void zero_grads(const std::vector<ParamRef<S>>& ps) {
  for (const auto& p : ps) {
    if (p.grad) p.grad->fill(S(0));
  }
}

template <typename S>
long param_count(const std::vector<ParamRef<S>>& ps, bool trainable_only = true) {
  long n = 0;
  for (const auto& p : ps) {
    if (!trainable_only || p.trainable) n += static_cast<long>(p.value->size());
  }
  return n;
}

// Copies values for every name present in both lists; shapes must agree
// where names collide. Returns the number of tensors copied.
template <typename S>
int copy_matching_params(const std::vector<ParamRef<S>>& src, const std::vector<ParamRef<S>>& dst) {
  int copied = 0;
  for (const auto& d : dst) {
    for (const auto& s : src) {
      if (s.name != d.name) continue;
      if (!s.value->same_shape(*d.value))
        throw DimensionError("copy_matching_params: shape mismatch at " + d.name);
      d.value->values() = s.value->values();
      ++copied;
      break;
    }
  }
  return copied;
}

namespace detail {

template <typename S>
using RowMat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename S>
using MatMap = Eigen::Map<RowMat<S>>;
template <typename S>
using CMatMap = Eigen::Map<const RowMat<S>>;
template <typename S>
using VecMap = Eigen::Map<Eigen::Matrix<S, Eigen::Dynamic, 1>>;

// Inclusive output-coordinate range for which o*stride - pad + k_off lands
// inside [0, size).
inline std::pair<int, int> valid_out_range(int k_off, int pad, int stride, int size, int out_size) {
  int lo = 0;
  while (lo < out_size && lo * stride - pad + k_off < 0) ++lo;
  int hi = out_size - 1;
  while (hi >= 0 && hi * stride - pad + k_off >= size) --hi;
  return {lo, hi};
}

}  // namespace detail

// 2-D convolution, NCHW, square kernel. Lowered to a matrix product per
// batch item (im2col + GEMM). Gradients accumulate across backward calls
// until zero_grads.
template <typename S>
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(int in_ch, int out_ch, int ksize, int stride = 1, int pad = -1)
      : in_(in_ch), out_(out_ch), k_(ksize), stride_(stride), pad_(pad < 0 ? (ksize - 1) / 2 : pad) {
    if (in_ch <= 0 || out_ch <= 0 || ksize <= 0 || stride <= 0 || pad_ < 0)
      throw ConfigError("Conv2d: bad geometry");
    w_ = Tensor<S>(out_, in_, k_, k_);
    b_ = Tensor<S>(1, out_, 1, 1);
    gw_ = Tensor<S>(out_, in_, k_, k_);
    gb_ = Tensor<S>(1, out_, 1, 1);
  }

  void init_he(Rng& rng) {
    const double sd = std::sqrt(2.0 / (static_cast<double>(in_) * k_ * k_));
    for (auto& v : w_.values()) v = static_cast<S>(rng.normal(0.0, sd));
    b_.fill(S(0));
  }

  Tensor<S> forward(const Tensor<S>& x) {
    if (x.c() != in_) throw DimensionError("Conv2d: input channel mismatch");
    const int h = x.h(), w = x.w();
    const int ho = (h + 2 * pad_ - k_) / stride_ + 1;
    const int wo = (w + 2 * pad_ - k_) / stride_ + 1;
    if (h + 2 * pad_ < k_ || w + 2 * pad_ < k_ || ho <= 0 || wo <= 0)
      throw DimensionError("Conv2d: input smaller than kernel");
    x_ = x;
    Tensor<S> y(x.n(), out_, ho, wo);
    const int howo = ho * wo, ikk = in_ * k_ * k_;
    col_.assign(static_cast<size_t>(ikk) * howo, S(0));
    detail::CMatMap<S> wm(w_.data(), out_, ikk);
    detail::VecMap<S> bv(b_.data(), out_);
    for (int n = 0; n < x.n(); ++n) {
      im2col(x.item(n), h, w, ho, wo);
      detail::CMatMap<S> cm(col_.data(), ikk, howo);
      detail::MatMap<S> ym(y.item(n), out_, howo);
      ym.noalias() = wm * cm;
      ym.colwise() += bv;
    }
    return y;
  }

  Tensor<S> backward(const Tensor<S>& dy) {
    const int h = x_.h(), w = x_.w();
    const int ho = dy.h(), wo = dy.w();
    const int howo = ho * wo, ikk = in_ * k_ * k_;
    Tensor<S> dx(x_.n(), in_, h, w);
    col_.resize(static_cast<size_t>(ikk) * howo);
    colg_.resize(col_.size());
    detail::CMatMap<S> wm(w_.data(), out_, ikk);
    detail::MatMap<S> gwm(gw_.data(), out_, ikk);
    detail::VecMap<S> gbv(gb_.data(), out_);
    for (int n = 0; n < x_.n(); ++n) {
      im2col(x_.item(n), h, w, ho, wo);
      detail::CMatMap<S> cm(col_.data(), ikk, howo);
      detail::CMatMap<S> dym(dy.item(n), out_, howo);
      gwm.noalias() += dym * cm.transpose();
      gbv.noalias() += dym.rowwise().sum();
      detail::MatMap<S> cgm(colg_.data(), ikk, howo);
      cgm.noalias() = wm.transpose() * dym;
      col2im(dx.item(n), h, w, ho, wo);
    }
    return dx;
  }

  void collect(const std::string& prefix, std::vector<ParamRef<S>>& out) {
    out.push_back({prefix + "/w", &w_, &gw_, true});
    out.push_back({prefix + "/b", &b_, &gb_, true});
  }

  int in_channels() const { return in_; }
  int out_channels() const { return out_; }

  Tensor<S> w_, b_, gw_, gb_;

 private:
  void im2col(const S* x, int h, int w, int ho, int wo) {
    const int howo = ho * wo;
    std::fill(col_.begin(), col_.end(), S(0));
    for (int c = 0; c < in_; ++c) {
      const S* xc = x + static_cast<size_t>(c) * h * w;
      for (int ki = 0; ki < k_; ++ki) {
        const auto [oy0, oy1] = detail::valid_out_range(ki, pad_, stride_, h, ho);
        for (int kj = 0; kj < k_; ++kj) {
          const auto [ox0, ox1] = detail::valid_out_range(kj, pad_, stride_, w, wo);
          S* row = col_.data() + static_cast<size_t>((c * k_ + ki) * k_ + kj) * howo;
          if (ox1 < ox0) continue;
          for (int oy = oy0; oy <= oy1; ++oy) {
            const int iy = oy * stride_ - pad_ + ki;
            const S* src = xc + static_cast<size_t>(iy) * w;
            S* dst = row + static_cast<size_t>(oy) * wo;
            if (stride_ == 1) {
              std::memcpy(dst + ox0, src + (ox0 - pad_ + kj),
                          static_cast<size_t>(ox1 - ox0 + 1) * sizeof(S));
            } else {
              for (int ox = ox0; ox <= ox1; ++ox) dst[ox] = src[ox * stride_ - pad_ + kj];
            }
          }
        }
      }
    }
  }

  void col2im(S* dx, int h, int w, int ho, int wo) {
    const int howo = ho * wo;
    for (int c = 0; c < in_; ++c) {
      S* xc = dx + static_cast<size_t>(c) * h * w;
      for (int ki = 0; ki < k_; ++ki) {
        const auto [oy0, oy1] = detail::valid_out_range(ki, pad_, stride_, h, ho);
        for (int kj = 0; kj < k_; ++kj) {
          const auto [ox0, ox1] = detail::valid_out_range(kj, pad_, stride_, w, wo);
          const S* row = colg_.data() + static_cast<size_t>((c * k_ + ki) * k_ + kj) * howo;
          for (int oy = oy0; oy <= oy1; ++oy) {
            const int iy = oy * stride_ - pad_ + ki;
            S* dst = xc + static_cast<size_t>(iy) * w;
            const S* src = row + static_cast<size_t>(oy) * wo;
            for (int ox = ox0; ox <= ox1; ++ox) dst[ox * stride_ - pad_ + kj] += src[ox];
          }
        }
      }
    }
  }

  int in_ = 0, out_ = 0, k_ = 0, stride_ = 1, pad_ = 0;
  Tensor<S> x_;
  std::vector<S> col_, colg_;
};

// Per-channel batch normalization with learned gain/bias and running
// statistics. Training normalizes with biased batch moments; the running
// variance is updated with the unbiased estimate.
template <typename S>
class BatchNorm2d {
 public:
  BatchNorm2d() = default;
  explicit BatchNorm2d(int channels, double eps = 1e-5, double momentum = 0.1)
      : ch_(channels), eps_(eps), momentum_(momentum) {
    if (channels <= 0) throw ConfigError("BatchNorm2d: bad channel count");
    gain_ = Tensor<S>::full(1, ch_, 1, 1, S(1));
    bias_ = Tensor<S>(1, ch_, 1, 1);
    ggain_ = Tensor<S>(1, ch_, 1, 1);
    gbias_ = Tensor<S>(1, ch_, 1, 1);
    run_mean_ = Tensor<S>(1, ch_, 1, 1);
    run_var_ = Tensor<S>::full(1, ch_, 1, 1, S(1));
  }

  Tensor<S> forward(const Tensor<S>& x, Mode mode) {
    if (x.c() != ch_) throw DimensionError("BatchNorm2d: channel mismatch");
    const int n = x.n(), h = x.h(), w = x.w();
    const long m = static_cast<long>(n) * h * w;
    mode_ = mode;
    xhat_ = Tensor<S>(n, ch_, h, w);
    invstd_.assign(ch_, 0.0);
    Tensor<S> y(n, ch_, h, w);
    for (int c = 0; c < ch_; ++c) {
      double mean, var;
      if (mode == Mode::kTrain) {
        double sum = 0.0, sumsq = 0.0;
        for (int b = 0; b < n; ++b) {
          const S* p = x.chan(b, c);
          for (long i = 0; i < static_cast<long>(h) * w; ++i) {
            sum += p[i];
            sumsq += static_cast<double>(p[i]) * p[i];
          }
        }
        mean = sum / m;
        var = std::max(0.0, sumsq / m - mean * mean);
        const double unbiased = m > 1 ? var * m / (m - 1.0) : var;
        run_mean_.values()[c] =
            static_cast<S>((1.0 - momentum_) * run_mean_.values()[c] + momentum_ * mean);
        run_var_.values()[c] =
            static_cast<S>((1.0 - momentum_) * run_var_.values()[c] + momentum_ * unbiased);
      } else {
        mean = run_mean_.values()[c];
        var = run_var_.values()[c];
      }
      const double is = 1.0 / std::sqrt(var + eps_);
      invstd_[c] = is;
      const S g = gain_.values()[c], bb = bias_.values()[c];
      for (int b = 0; b < n; ++b) {
        const S* p = x.chan(b, c);
        S* xh = xhat_.chan(b, c);
        S* yo = y.chan(b, c);
        for (long i = 0; i < static_cast<long>(h) * w; ++i) {
          const S xi = static_cast<S>((p[i] - mean) * is);
          xh[i] = xi;
          yo[i] = g * xi + bb;
        }
      }
    }
    return y;
  }

  Tensor<S> backward(const Tensor<S>& dy) {
    if (!dy.same_shape(xhat_)) throw DimensionError("BatchNorm2d: grad shape mismatch");
    const int n = dy.n(), h = dy.h(), w = dy.w();
    const double m = static_cast<double>(n) * h * w;
    Tensor<S> dx(n, ch_, h, w);
    for (int c = 0; c < ch_; ++c) {
      double sum_dy = 0.0, sum_dy_xhat = 0.0;
      for (int b = 0; b < n; ++b) {
        const S* d = dy.chan(b, c);
        const S* xh = xhat_.chan(b, c);
        for (long i = 0; i < static_cast<long>(h) * w; ++i) {
          sum_dy += d[i];
          sum_dy_xhat += static_cast<double>(d[i]) * xh[i];
        }
      }
      ggain_.values()[c] += static_cast<S>(sum_dy_xhat);
      gbias_.values()[c] += static_cast<S>(sum_dy);
      const double g_is = gain_.values()[c] * invstd_[c];
      for (int b = 0; b < n; ++b) {
        const S* d = dy.chan(b, c);
        const S* xh = xhat_.chan(b, c);
        S* o = dx.chan(b, c);
        if (mode_ == Mode::kTrain) {
          for (long i = 0; i < static_cast<long>(h) * w; ++i) {
            o[i] = static_cast<S>(g_is * (d[i] - sum_dy / m - xh[i] * sum_dy_xhat / m));
          }
        } else {
          for (long i = 0; i < static_cast<long>(h) * w; ++i) {
            o[i] = static_cast<S>(g_is * d[i]);
          }
        }
      }
    }
    return dx;
  }

  void collect(const std::string& prefix, std::vector<ParamRef<S>>& out) {
    out.push_back({prefix + "/gain", &gain_, &ggain_, true});
    out.push_back({prefix + "/bias", &bias_, &gbias_, true});
    out.push_back({prefix + "/run_mean", &run_mean_, nullptr, false});
    out.push_back({prefix + "/run_var", &run_var_, nullptr, false});
  }

  int channels() const { return ch_; }

  Tensor<S> gain_, bias_, ggain_, gbias_, run_mean_, run_var_;

 private:
  int ch_ = 0;
  double eps_ = 1e-5, momentum_ = 0.1;
  Mode mode_ = Mode::kTrain;
  Tensor<S> xhat_;
  std::vector<double> invstd_;
};

template <typename S>
class ReLU {
 public:
  Tensor<S> forward(const Tensor<S>& x) {
    x_ = x;
    Tensor<S> y = x;
    for (auto& v : y.values()) v = v > S(0) ? v : S(0);
    return y;
  }
  Tensor<S> backward(const Tensor<S>& dy) {
    Tensor<S> dx = dy;
    for (size_t i = 0; i < dx.size(); ++i) {
      if (x_.values()[i] <= S(0)) dx.values()[i] = S(0);
    }
    return dx;
  }

 private:
  Tensor<S> x_;
};

template <typename S>
class LeakyReLU {
 public:
  LeakyReLU() = default;
  explicit LeakyReLU(double slope) : slope_(static_cast<S>(slope)) {}
  Tensor<S> forward(const Tensor<S>& x) {
    x_ = x;
    Tensor<S> y = x;
    for (auto& v : y.values()) v = v > S(0) ? v : slope_ * v;
    return y;
  }
  Tensor<S> backward(const Tensor<S>& dy) {
    Tensor<S> dx = dy;
    for (size_t i = 0; i < dx.size(); ++i) {
      if (x_.values()[i] <= S(0)) dx.values()[i] *= slope_;
    }
    return dx;
  }

 private:
  S slope_ = S(0.2);
  Tensor<S> x_;
};

template <typename S>
class Tanh {
 public:
  Tensor<S> forward(const Tensor<S>& x) {
    y_ = x;
    for (auto& v : y_.values()) v = std::tanh(v);
    return y_;
  }
  Tensor<S> backward(const Tensor<S>& dy) {
    Tensor<S> dx = dy;
    for (size_t i = 0; i < dx.size(); ++i) {
      const S y = y_.values()[i];
      dx.values()[i] *= (S(1) - y * y);
    }
    return dx;
  }

 private:
  Tensor<S> y_;
};

template <typename S>
class Sigmoid {
 public:
  Tensor<S> forward(const Tensor<S>& x) {
    y_ = x;
    for (auto& v : y_.values()) v = S(1) / (S(1) + std::exp(-v));
    return y_;
  }
  Tensor<S> backward(const Tensor<S>& dy) {
    Tensor<S> dx = dy;
    for (size_t i = 0; i < dx.size(); ++i) {
      const S y = y_.values()[i];
      dx.values()[i] *= y * (S(1) - y);
    }
    return dx;
  }

 private:
  Tensor<S> y_;
};

// 2x2 max pooling, stride 2. Ties resolve to the earliest index, which
// keeps the backward routing deterministic.
template <typename S>
class MaxPool2 {
 public:
  Tensor<S> forward(const Tensor<S>& x) {
    if (x.h() < 2 || x.w() < 2) throw DimensionError("MaxPool2: input smaller than window");
    const int ho = x.h() / 2, wo = x.w() / 2;
    in_n_ = x.n();
    in_c_ = x.c();
    in_h_ = x.h();
    in_w_ = x.w();
    Tensor<S> y(x.n(), x.c(), ho, wo);
    argmax_.assign(y.size(), 0);
    size_t oi = 0;
    for (int n = 0; n < x.n(); ++n) {
      for (int c = 0; c < x.c(); ++c) {
        const S* p = x.chan(n, c);
        for (int i = 0; i < ho; ++i) {
          for (int j = 0; j < wo; ++j, ++oi) {
            S best = p[(2 * i) * x.w() + 2 * j];
            long arg = (2 * i) * x.w() + 2 * j;
            for (int di = 0; di < 2; ++di) {
              for (int dj = 0; dj < 2; ++dj) {
                const long idx = (2 * i + di) * static_cast<long>(x.w()) + 2 * j + dj;
                if (p[idx] > best) {
                  best = p[idx];
                  arg = idx;
                }
              }
            }
            y.values()[oi] = best;
            argmax_[oi] = arg;
          }
        }
      }
    }
    return y;
  }

  Tensor<S> backward(const Tensor<S>& dy) {
    Tensor<S> dx(in_n_, in_c_, in_h_, in_w_);
    size_t oi = 0;
    for (int n = 0; n < dy.n(); ++n) {
      for (int c = 0; c < dy.c(); ++c) {
        S* d = dx.chan(n, c);
        for (long i = 0; i < static_cast<long>(dy.h()) * dy.w(); ++i, ++oi) {
          d[argmax_[oi]] += dy.values()[oi];
        }
      }
    }
    return dx;
  }

 private:
  int in_n_ = 0, in_c_ = 0, in_h_ = 0, in_w_ = 0;
  std::vector<long> argmax_;
};

// Bilinear 2x upsampling on the half-pixel-center grid (the same sampling
// convention as resize_bilinear). Parameter-free; backward is the exact
// transpose of the interpolation.
template <typename S>
class BilinearUp2 {
 public:
  Tensor<S> forward(const Tensor<S>& x) {
    in_h_ = x.h();
    in_w_ = x.w();
    const int ho = 2 * x.h(), wo = 2 * x.w();
    build_axis(in_h_, ho, y0_, y1_, ty_);
    build_axis(in_w_, wo, x0_, x1_, tx_);
    Tensor<S> y(x.n(), x.c(), ho, wo);
    for (int n = 0; n < x.n(); ++n) {
      for (int c = 0; c < x.c(); ++c) {
        const S* p = x.chan(n, c);
        S* o = y.chan(n, c);
        for (int i = 0; i < ho; ++i) {
          for (int j = 0; j < wo; ++j) {
            const double top = (1.0 - tx_[j]) * p[y0_[i] * in_w_ + x0_[j]] +
                               tx_[j] * p[y0_[i] * in_w_ + x1_[j]];
            const double bot = (1.0 - tx_[j]) * p[y1_[i] * in_w_ + x0_[j]] +
                               tx_[j] * p[y1_[i] * in_w_ + x1_[j]];
            o[static_cast<long>(i) * wo + j] = static_cast<S>((1.0 - ty_[i]) * top + ty_[i] * bot);
          }
        }
      }
    }
    return y;
  }

  Tensor<S> backward(const Tensor<S>& dy) {
    Tensor<S> dx(dy.n(), dy.c(), in_h_, in_w_);
    const int ho = dy.h(), wo = dy.w();
    for (int n = 0; n < dy.n(); ++n) {
      for (int c = 0; c < dy.c(); ++c) {
        const S* d = dy.chan(n, c);
        S* o = dx.chan(n, c);
        for (int i = 0; i < ho; ++i) {
          for (int j = 0; j < wo; ++j) {
            const double g = d[static_cast<long>(i) * wo + j];
            o[y0_[i] * in_w_ + x0_[j]] += static_cast<S>((1.0 - ty_[i]) * (1.0 - tx_[j]) * g);
            o[y0_[i] * in_w_ + x1_[j]] += static_cast<S>((1.0 - ty_[i]) * tx_[j] * g);
            o[y1_[i] * in_w_ + x0_[j]] += static_cast<S>(ty_[i] * (1.0 - tx_[j]) * g);
            o[y1_[i] * in_w_ + x1_[j]] += static_cast<S>(ty_[i] * tx_[j] * g);
          }
        }
      }
    }
    return dx;
  }

 private:
  static void build_axis(int in, int out, std::vector<int>& a0, std::vector<int>& a1,
                         std::vector<double>& t) {
    a0.resize(out);
    a1.resize(out);
    t.resize(out);
    for (int i = 0; i < out; ++i) {
      const double s = (i + 0.5) * 0.5 - 0.5;
      const int f = static_cast<int>(std::floor(s));
      t[i] = s - f;
      a0[i] = std::clamp(f, 0, in - 1);
      a1[i] = std::clamp(f + 1, 0, in - 1);
    }
  }

  int in_h_ = 0, in_w_ = 0;
  std::vector<int> y0_, y1_, x0_, x1_;
  std::vector<double> ty_, tx_;
};

template <typename S>
class GlobalAvgPool {
 public:
  Tensor<S> forward(const Tensor<S>& x) {
    in_h_ = x.h();
    in_w_ = x.w();
    Tensor<S> y(x.n(), x.c(), 1, 1);
    const double inv = 1.0 / (static_cast<double>(x.h()) * x.w());
    for (int n = 0; n < x.n(); ++n) {
      for (int c = 0; c < x.c(); ++c) {
        const S* p = x.chan(n, c);
        double sum = 0.0;
        for (long i = 0; i < static_cast<long>(x.h()) * x.w(); ++i) sum += p[i];
        y.at(n, c, 0, 0) = static_cast<S>(sum * inv);
      }
    }
    return y;
  }

  Tensor<S> backward(const Tensor<S>& dy) {
    Tensor<S> dx(dy.n(), dy.c(), in_h_, in_w_);
    const S inv = static_cast<S>(1.0 / (static_cast<double>(in_h_) * in_w_));
    for (int n = 0; n < dy.n(); ++n) {
      for (int c = 0; c < dy.c(); ++c) {
        const S g = dy.at(n, c, 0, 0) * inv;
        S* p = dx.chan(n, c);
        for (long i = 0; i < static_cast<long>(in_h_) * in_w_; ++i) p[i] = g;
      }
    }
    return dx;
  }

 private:
  int in_h_ = 0, in_w_ = 0;
};

// Fully connected layer over flattened features; input [N, C, H, W] with
// C*H*W == in_features, output [N, out_features, 1, 1].
template <typename S>
class Linear {
 public:
  Linear() = default;
  Linear(int in_features, int out_features) : in_(in_features), out_(out_features) {
    if (in_features <= 0 || out_features <= 0) throw ConfigError("Linear: bad geometry");
    w_ = Tensor<S>(1, 1, out_, in_);
    b_ = Tensor<S>(1, out_, 1, 1);
    gw_ = Tensor<S>(1, 1, out_, in_);
    gb_ = Tensor<S>(1, out_, 1, 1);
  }

  void init_he(Rng& rng) {
    const double sd = std::sqrt(2.0 / in_);
    for (auto& v : w_.values()) v = static_cast<S>(rng.normal(0.0, sd));
    b_.fill(S(0));
  }

  Tensor<S> forward(const Tensor<S>& x) {
    if (x.c() * x.h() * x.w() != in_) throw DimensionError("Linear: feature size mismatch");
    x_ = x;
    Tensor<S> y(x.n(), out_, 1, 1);
    detail::CMatMap<S> xm(x.data(), x.n(), in_);
    detail::CMatMap<S> wm(w_.data(), out_, in_);
    detail::MatMap<S> ym(y.data(), x.n(), out_);
    ym.noalias() = xm * wm.transpose();
    detail::VecMap<S> bv(b_.data(), out_);
    ym.rowwise() += bv.transpose();
    return y;
  }

  Tensor<S> backward(const Tensor<S>& dy) {
    Tensor<S> dx(x_.n(), x_.c(), x_.h(), x_.w());
    detail::CMatMap<S> dym(dy.data(), dy.n(), out_);
    detail::CMatMap<S> xm(x_.data(), x_.n(), in_);
    detail::MatMap<S> gwm(gw_.data(), out_, in_);
    gwm.noalias() += dym.transpose() * xm;
    detail::VecMap<S> gbv(gb_.data(), out_);
    gbv.noalias() += dym.colwise().sum().transpose();
    detail::CMatMap<S> wm(w_.data(), out_, in_);
    detail::MatMap<S> dxm(dx.data(), dx.n(), in_);
    dxm.noalias() = dym * wm;
    return dx;
  }

  void collect(const std::string& prefix, std::vector<ParamRef<S>>& out) {
    out.push_back({prefix + "/w", &w_, &gw_, true});
    out.push_back({prefix + "/b", &b_, &gb_, true});
  }

  Tensor<S> w_, b_, gw_, gb_;

 private:
  int in_ = 0, out_ = 0;
  Tensor<S> x_;
};

}  // namespace irsr
