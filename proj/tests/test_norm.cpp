#include <cmath>
#include <functional>

#include "doctest.h"
#include "irsr/nn/norm.hpp"

using namespace irsr;

namespace {

Tensor<double> randn(int n, int c, int h, int w, Rng& rng) {
  Tensor<double> t(n, c, h, w);
  for (auto& v : t.values()) v = rng.normal();
  return t;
}

Tensor<double> checker_masks(int n, int k, int h, int w) {
  Tensor<double> m(n, k, h, w);
  for (int b = 0; b < n; ++b) {
    for (int i = 0; i < h; ++i) {
      for (int j = 0; j < w; ++j) {
        const int cls = (i / 2 + j / 2 + b) % k;
        m.at(b, cls, i, j) = 1.0;
      }
    }
  }
  return m;
}

double weighted_sum(const Tensor<double>& y, const Tensor<double>& w) {
  double acc = 0.0;
  for (size_t i = 0; i < y.size(); ++i) acc += y.values()[i] * w.values()[i];
  return acc;
}

void check_grad(Tensor<double>& target, const Tensor<double>& analytic,
                const std::function<double()>& loss, double rtol = 1e-5, double atol = 1e-8) {
  const double h = 1e-5;
  for (size_t i = 0; i < target.size(); ++i) {
    const double keep = target.values()[i];
    target.values()[i] = keep + h;
    const double up = loss();
    target.values()[i] = keep - h;
    const double dn = loss();
    target.values()[i] = keep;
    const double num = (up - dn) / (2.0 * h);
    const double ana = analytic.values()[i];
    CHECK(std::abs(num - ana) <= atol + rtol * std::max(std::abs(num), std::abs(ana)));
  }
}

}  // namespace

TEST_CASE("mask resize is exact block selection for power-of-two levels") {
  const auto m = checker_masks(1, 3, 16, 16);
  const auto half = resize_masks_nearest(m, 8, 8);
  const auto quarter = resize_masks_nearest(m, 4, 4);
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < 8; ++i) {
      for (int j = 0; j < 8; ++j) {
        CHECK(half.at(0, c, i, j) == m.at(0, c, 2 * i, 2 * j));
      }
    }
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        CHECK(quarter.at(0, c, i, j) == m.at(0, c, 4 * i, 4 * j));
      }
    }
  }
  // Still one-hot after resizing.
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) {
      double s = 0.0;
      for (int c = 0; c < 3; ++c) s += half.at(0, c, i, j);
      CHECK(s == 1.0);
    }
  }
}

TEST_CASE("neutralized conditioning reduces exactly to plain batch norm") {
  Rng rng(101);
  const int ch = 4, k = 3;
  CondNorm<double> cond(ch, k, 8);
  PlainNorm<double> plain(ch);
  cond.init(rng);
  cond.set_neutral();

  // Align the inner batch-norm parameters by name.
  std::vector<ParamRef<double>> pc, pp;
  cond.collect("n", pc);
  plain.collect("n", pp);
  for (auto& ref : pc) {
    if (ref.name == "n/bn/gain") ref.value->values() = {1.2, 0.8, 1.0, 1.5};
  }
  copy_matching_params(pc, pp);

  const auto x = randn(2, ch, 6, 6, rng);
  const auto masks = checker_masks(2, k, 6, 6);
  const auto yc = cond.forward(x, &masks, Mode::kTrain);
  const auto yp = plain.forward(x, nullptr, Mode::kTrain);
  for (size_t i = 0; i < yc.size(); ++i) {
    CHECK(yc.values()[i] == yp.values()[i]);
  }
}

TEST_CASE("conditioning applies an analytic scale and shift") {
  const int ch = 2, k = 2;
  CondNorm<double> cond(ch, k, 4);
  std::vector<ParamRef<double>> ps;
  cond.collect("n", ps);
  // Freeze the batch norm to a pass-through and pin both branches to
  // constants: hidden = 0*masks + 2 (ReLU passes), out = 0*hidden + const.
  for (auto& ref : ps) {
    if (ref.name == "n/bn/run_mean") ref.value->fill(0.0);
    if (ref.name == "n/bn/run_var") ref.value->fill(1.0 - 1e-5);
    if (ref.name == "n/scale1/b") ref.value->fill(2.0);
    if (ref.name == "n/scale2/b") ref.value->fill(3.0);
    if (ref.name == "n/shift1/b") ref.value->fill(2.0);
    if (ref.name == "n/shift2/b") ref.value->fill(-0.25);
    if (ref.name == "n/scale1/w" || ref.name == "n/scale2/w" || ref.name == "n/shift1/w" ||
        ref.name == "n/shift2/w")
      ref.value->fill(0.0);
  }
  Rng rng(102);
  const auto x = randn(1, ch, 4, 4, rng);
  const auto masks = checker_masks(1, k, 4, 4);
  const auto y = cond.forward(x, &masks, Mode::kEval);
  for (size_t i = 0; i < x.size(); ++i) {
    CHECK(y.values()[i] == doctest::Approx(3.0 * x.values()[i] - 0.25).epsilon(1e-9));
  }
}

TEST_CASE("conditioning responds to mask content") {
  Rng rng(103);
  const int ch = 3, k = 2;
  CondNorm<double> cond(ch, k, 8);
  cond.init(rng);
  const auto x = randn(1, ch, 8, 8, rng);
  auto ma = checker_masks(1, k, 8, 8);
  Tensor<double> mb(1, k, 8, 8);
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) mb.at(0, 0, i, j) = 1.0;  // all one class
  }
  const auto ya = cond.forward(x, &ma, Mode::kTrain);
  const auto yb = cond.forward(x, &mb, Mode::kTrain);
  double diff = 0.0;
  for (size_t i = 0; i < ya.size(); ++i) diff = std::max(diff, std::abs(ya.values()[i] - yb.values()[i]));
  CHECK(diff > 1e-3);
}

TEST_CASE("conditioned norm gradients pass finite differences") {
  Rng rng(104);
  const int ch = 2, k = 2;
  CondNorm<double> cond(ch, k, 3);
  cond.init(rng);
  auto x = randn(2, ch, 4, 4, rng);
  const auto masks = checker_masks(2, k, 4, 4);
  const auto probe = randn(2, ch, 4, 4, rng);

  std::vector<ParamRef<double>> ps;
  cond.collect("n", ps);
  auto loss = [&] { return weighted_sum(cond.forward(x, &masks, Mode::kTrain), probe); };
  loss();
  zero_grads(ps);
  auto dx = cond.backward(probe);
  check_grad(x, dx, loss);
  for (auto& ref : ps) {
    if (!ref.trainable) continue;
    CAPTURE(ref.name);
    check_grad(*ref.value, *ref.grad, loss);
  }
}

TEST_CASE("conditioned norm validates its mask input") {
  CondNorm<double> cond(2, 3, 4);
  Rng rng(105);
  cond.init(rng);
  const auto x = randn(1, 2, 4, 4, rng);
  CHECK_THROWS_AS(cond.forward(x, nullptr, Mode::kTrain), InputError);
  const auto wrong_k = checker_masks(1, 2, 4, 4);
  CHECK_THROWS_AS(cond.forward(x, &wrong_k, Mode::kTrain), DimensionError);
  const auto wrong_res = checker_masks(1, 3, 8, 8);
  CHECK_THROWS_AS(cond.forward(x, &wrong_res, Mode::kTrain), DimensionError);
}
