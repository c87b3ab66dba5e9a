#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "irsr/errors.hpp"

namespace irsr {

// Dense NCHW tensor with scalar type S. float is the production type;
// double is used by the gradient-check tests, where finite differences
// need the extra precision.
template <typename S>
class Tensor {
 public:
  Tensor() = default;
  Tensor(int n, int c, int h, int w)
      : n_(n), c_(c), h_(h), w_(w), v_(checked_size(n, c, h, w), S(0)) {}

  static Tensor full(int n, int c, int h, int w, S value) {
    Tensor t(n, c, h, w);
    for (auto& x : t.v_) x = value;
    return t;
  }

  int n() const { return n_; }
  int c() const { return c_; }
  int h() const { return h_; }
  int w() const { return w_; }
  size_t size() const { return v_.size(); }
  bool empty() const { return v_.empty(); }

  bool same_shape(const Tensor& o) const {
    return n_ == o.n_ && c_ == o.c_ && h_ == o.h_ && w_ == o.w_;
  }

  S* data() { return v_.data(); }
  const S* data() const { return v_.data(); }
  std::vector<S>& values() { return v_; }
  const std::vector<S>& values() const { return v_; }

  // Pointer to the start of item n / channel (n, c).
  S* item(int n) { return v_.data() + static_cast<size_t>(n) * c_ * h_ * w_; }
  const S* item(int n) const { return v_.data() + static_cast<size_t>(n) * c_ * h_ * w_; }
  S* chan(int n, int c) { return item(n) + static_cast<size_t>(c) * h_ * w_; }
  const S* chan(int n, int c) const { return item(n) + static_cast<size_t>(c) * h_ * w_; }

  S& at(int n, int c, int i, int j) {
    return v_[((static_cast<size_t>(n) * c_ + c) * h_ + i) * w_ + j];
  }
  S at(int n, int c, int i, int j) const {
    return v_[((static_cast<size_t>(n) * c_ + c) * h_ + i) * w_ + j];
  }

  void fill(S value) {
    for (auto& x : v_) x = value;
  }

  void add(const Tensor& o) {
    if (!same_shape(o)) throw DimensionError("Tensor::add: shape mismatch");
    for (size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
  }

  void axpy(S a, const Tensor& o) {
    if (!same_shape(o)) throw DimensionError("Tensor::axpy: shape mismatch");
    for (size_t i = 0; i < v_.size(); ++i) v_[i] += a * o.v_[i];
  }

  void scale(S a) {
    for (auto& x : v_) x *= a;
  }

  bool all_finite() const {
    for (S x : v_) {
      if (!std::isfinite(static_cast<double>(x))) return false;
    }
    return true;
  }

  template <typename T>
  Tensor<T> cast() const {
    Tensor<T> out(n_, c_, h_, w_);
    for (size_t i = 0; i < v_.size(); ++i) out.values()[i] = static_cast<T>(v_[i]);
    return out;
  }

 private:
  static size_t checked_size(int n, int c, int h, int w) {
    if (n <= 0 || c <= 0 || h <= 0 || w <= 0)
      throw DimensionError("Tensor: non-positive dimensions");
    return static_cast<size_t>(n) * c * h * w;
  }

  int n_ = 0;
  int c_ = 0;
  int h_ = 0;
  int w_ = 0;
  std::vector<S> v_;
};

}  // namespace irsr
