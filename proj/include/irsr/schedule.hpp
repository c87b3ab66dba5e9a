#pragma once

#include "irsr/degrade.hpp"
#include "irsr/errors.hpp"
#include "irsr/nn/adam.hpp"
#include "irsr/nn/losses.hpp"

namespace irsr {

// Two-phase training plan. Phase 1 fits the generator alone on the pixel
// loss; phase 2 runs the adversarial game with the feature and
// adversarial terms, stepping the discriminator once every g_per_d
// generator updates at lr_g * lr_d_ratio.
struct TrainingSchedule {
  long phase1_iters = 50000;
  long phase2_iters = 100000;  // generator updates in phase 2
  int g_per_d = 6;
  double lr_g = 1e-4;
  double lr_d_ratio = 0.1;
  int batch_size = 12;
  int patch_size = 96;
  long validate_every = 500;
  long checkpoint_every = 1000;
  LossWeights weights;
  AdamConfig adam;
  DegradationParams degrade;
  AugmentationParams aug;

  void validate() const {
    if (phase1_iters < 0 || phase2_iters < 0)
      throw ConfigError("TrainingSchedule: negative iteration counts");
    if (g_per_d < 1) throw ConfigError("TrainingSchedule: g_per_d must be >= 1");
    if (!(lr_g > 0.0)) throw ConfigError("TrainingSchedule: lr_g must be positive");
    if (!(lr_d_ratio > 0.0)) throw ConfigError("TrainingSchedule: lr_d_ratio must be positive");
    if (batch_size < 1) throw ConfigError("TrainingSchedule: batch_size must be >= 1");
    if (patch_size < 8 || patch_size % 8 != 0)
      throw ConfigError("TrainingSchedule: patch_size must be a positive multiple of 8");
    if (validate_every < 1 || checkpoint_every < 1)
      throw ConfigError("TrainingSchedule: event periods must be >= 1");
    weights.validate();
    adam.validate();
    degrade.validate();
    aug.validate();
  }
};

}  // namespace irsr
