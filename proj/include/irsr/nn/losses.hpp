#pragma once

#include <cmath>
#include <utility>

#include "irsr/image.hpp"
#include "irsr/nn/tensor.hpp"

namespace irsr {

// Probabilities are clamped away from {0, 1} by this margin before any
// logarithm, bounding the adversarial losses and their gradients.
inline constexpr double kProbEps = 1e-7;

// Phase-2 generator objective weights: alpha scales the perceptual term,
// gamma the adversarial term.
struct LossWeights {
  double alpha = 0.01;
  double gamma = 0.005;

  void validate() const {
    if (alpha < 0.0 || gamma < 0.0) throw ValueError("LossWeights: weights must be >= 0");
  }
};

inline double mse_loss(const ImagePlane& target, const ImagePlane& gen) {
  if (!target.same_shape(gen)) throw DimensionError("mse_loss: shape mismatch");
  double acc = 0.0;
  for (size_t i = 0; i < target.size(); ++i) {
    const double d = target.values()[i] - gen.values()[i];
    acc += d * d;
  }
  return acc / static_cast<double>(target.size());
}

template <typename S>
double mse_loss(const Tensor<S>& target, const Tensor<S>& gen) {
  if (!target.same_shape(gen)) throw DimensionError("mse_loss: shape mismatch");
  double acc = 0.0;
  for (size_t i = 0; i < target.size(); ++i) {
    const double d = static_cast<double>(target.values()[i]) - gen.values()[i];
    acc += d * d;
  }
  return acc / static_cast<double>(target.size());
}

// Gradient with respect to the generated tensor.
template <typename S>
Tensor<S> mse_grad(const Tensor<S>& target, const Tensor<S>& gen) {
  if (!target.same_shape(gen)) throw DimensionError("mse_grad: shape mismatch");
  Tensor<S> g(gen.n(), gen.c(), gen.h(), gen.w());
  const double scale = 2.0 / static_cast<double>(gen.size());
  for (size_t i = 0; i < gen.size(); ++i) {
    g.values()[i] = static_cast<S>(scale * (gen.values()[i] - target.values()[i]));
  }
  return g;
}

// Mean squared distance between the frozen extractor's activations for the
// target and generated images, averaged over every feature element.
template <typename S, typename FX>
double perceptual_loss(const Tensor<S>& target, const Tensor<S>& gen, FX& fx) {
  if (!target.same_shape(gen)) throw DimensionError("perceptual_loss: shape mismatch");
  const Tensor<S> ft = fx.forward(target);
  const Tensor<S> fg = fx.forward(gen);
  return mse_loss(ft, fg);
}

// Same value plus the gradient with respect to the generated image,
// obtained by running the extractor backward from the feature residual.
template <typename S, typename FX>
std::pair<double, Tensor<S>> perceptual_loss_grad(const Tensor<S>& target, const Tensor<S>& gen,
                                                  FX& fx) {
  if (!target.same_shape(gen)) throw DimensionError("perceptual_loss_grad: shape mismatch");
  const Tensor<S> ft = fx.forward(target);
  const Tensor<S> fg = fx.forward(gen);  // extractor caches this pass
  double acc = 0.0;
  Tensor<S> dfeat(fg.n(), fg.c(), fg.h(), fg.w());
  const double scale = 2.0 / static_cast<double>(fg.size());
  for (size_t i = 0; i < fg.size(); ++i) {
    const double d = static_cast<double>(fg.values()[i]) - ft.values()[i];
    acc += d * d;
    dfeat.values()[i] = static_cast<S>(scale * d);
  }
  return {acc / static_cast<double>(fg.size()), fx.backward_to_input(dfeat)};
}

namespace detail {
inline double checked_prob(double p, const char* what) {
  if (std::isnan(p)) throw NumericError(std::string(what) + ": probability is NaN");
  if (p < 0.0 || p > 1.0) throw InputError(std::string(what) + ": probability outside [0, 1]");
  return std::min(1.0 - kProbEps, std::max(kProbEps, p));
}
}  // namespace detail

// Generator adversarial term: -log D(generated).
inline double adv_gen_loss(double p_fake) {
  return -std::log(detail::checked_prob(p_fake, "adv_gen_loss"));
}

// Critic objective: -log D(real) - log(1 - D(generated)).
inline double adv_disc_loss(double p_real, double p_fake) {
  return -std::log(detail::checked_prob(p_real, "adv_disc_loss")) -
         std::log(1.0 - detail::checked_prob(p_fake, "adv_disc_loss"));
}

// Batch forms: mean loss over items plus d(loss)/d(probability). The
// gradient uses the clamped probability, so it stays bounded when the
// critic saturates.
template <typename S>
std::pair<double, Tensor<S>> adv_gen_loss_batch(const Tensor<S>& probs) {
  const double n = static_cast<double>(probs.size());
  double acc = 0.0;
  Tensor<S> g(probs.n(), probs.c(), probs.h(), probs.w());
  for (size_t i = 0; i < probs.size(); ++i) {
    const double p = detail::checked_prob(probs.values()[i], "adv_gen_loss");
    acc += -std::log(p);
    g.values()[i] = static_cast<S>(-1.0 / (p * n));
  }
  return {acc / n, std::move(g)};
}

template <typename S>
std::pair<double, Tensor<S>> adv_disc_real_batch(const Tensor<S>& probs) {
  const double n = static_cast<double>(probs.size());
  double acc = 0.0;
  Tensor<S> g(probs.n(), probs.c(), probs.h(), probs.w());
  for (size_t i = 0; i < probs.size(); ++i) {
    const double p = detail::checked_prob(probs.values()[i], "adv_disc_loss");
    acc += -std::log(p);
    g.values()[i] = static_cast<S>(-1.0 / (p * n));
  }
  return {acc / n, std::move(g)};
}

template <typename S>
std::pair<double, Tensor<S>> adv_disc_fake_batch(const Tensor<S>& probs) {
  const double n = static_cast<double>(probs.size());
  double acc = 0.0;
  Tensor<S> g(probs.n(), probs.c(), probs.h(), probs.w());
  for (size_t i = 0; i < probs.size(); ++i) {
    const double p = detail::checked_prob(probs.values()[i], "adv_disc_loss");
    acc += -std::log(1.0 - p);
    g.values()[i] = static_cast<S>(1.0 / ((1.0 - p) * n));
  }
  return {acc / n, std::move(g)};
}

// Phase-2 generator total. The pixel term is deliberately absent here; it
// drives phase 1 alone.
inline double total_gen_loss(double l_perceptual, double l_adv, const LossWeights& w) {
  w.validate();
  if (!std::isfinite(l_perceptual) || !std::isfinite(l_adv))
    throw NumericError("total_gen_loss: non-finite component");
  return w.alpha * l_perceptual + w.gamma * l_adv;
}

}  // namespace irsr
