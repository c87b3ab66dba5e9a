#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "irsr/nn/layers.hpp"

namespace irsr {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const {
    if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0 || eps <= 0.0)
      throw ConfigError("AdamConfig: betas must be in [0, 1), eps > 0");
  }
};

// Adam with per-parameter first/second moment state, keyed by parameter
// name so the state survives checkpointing and reattaches by name.
template <typename S>
class Adam {
 public:
  Adam() = default;
  explicit Adam(const AdamConfig& cfg) : cfg_((cfg.validate(), cfg)) {}

  void step(const std::vector<ParamRef<S>>& params, double lr) {
    if (!(lr > 0.0)) throw ValueError("Adam: learning rate must be > 0");
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (const auto& p : params) {
      if (!p.trainable || !p.grad) continue;
      auto& [m, v] = state_[p.name];
      if (m.size() != p.value->size()) {
        m.assign(p.value->size(), S(0));
        v.assign(p.value->size(), S(0));
      }
      S* w = p.value->data();
      const S* g = p.grad->data();
      for (size_t i = 0; i < p.value->size(); ++i) {
        m[i] = static_cast<S>(cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i]);
        v[i] = static_cast<S>(cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i]);
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        w[i] = static_cast<S>(w[i] - lr * mhat / (std::sqrt(vhat) + cfg_.eps));
      }
    }
  }

  long t() const { return t_; }
  void set_t(long t) { t_ = t; }
  const AdamConfig& config() const { return cfg_; }

  // Moment vectors for one parameter; created zeroed on first access so
  // checkpointing can enumerate state before the first step.
  std::pair<std::vector<S>&, std::vector<S>&> moments(const std::string& name, size_t size) {
    auto& [m, v] = state_[name];
    if (m.size() != size) {
      m.assign(size, S(0));
      v.assign(size, S(0));
    }
    return {m, v};
  }

 private:
  AdamConfig cfg_;
  long t_ = 0;
  std::map<std::string, std::pair<std::vector<S>, std::vector<S>>> state_;
};

}  // namespace irsr
