#pragma once

#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "irsr/dataset.hpp"
#include "irsr/nn/adam.hpp"
#include "irsr/nn/discriminator.hpp"
#include "irsr/nn/feature_extractor.hpp"
#include "irsr/nn/generator.hpp"
#include "irsr/schedule.hpp"

namespace irsr {

struct TrainerCounters {
  long phase1_updates = 0;
  long phase2_g_updates = 0;
  long phase2_d_updates = 0;

  long total() const { return phase1_updates + phase2_g_updates; }
};

// Loss values from the most recent updates, for logging.
struct LastLosses {
  std::optional<double> pixel;
  std::optional<double> perceptual;
  std::optional<double> adversarial;
  std::optional<double> total;
  std::optional<double> disc;
};

struct ValidationScore {
  double mse_val = 0.0;
  double psnr_val = 0.0;
  double ssim_val = 0.0;
};

// Drives the two-phase schedule over a generator/critic pair: phase 1 is
// pixel-loss pretraining of the generator, phase 2 the adversarial game
// with the frozen extractor's feature loss. Owns the data stream (epoch
// iterator plus one RNG) so a checkpoint pins the entire future of a run.
class Trainer {
 public:
  Trainer(const GeneratorConfig& gen_cfg, const DiscriminatorConfig& disc_cfg,
          const FeatureExtractorSpec& fx_spec, const TrainingSchedule& schedule, uint64_t seed,
          std::string out_dir);

  // Replaces the spec-built extractor, e.g. with one loaded from a file.
  void set_extractor(FeatureExtractor<float> fx);

  void attach_data(const TrainingSet& train, const TrainingSet& val);

  // One generator update plus any discriminator update and periodic
  // events it triggers. run() loops until the schedule is complete.
  void step();
  void run();
  long planned_updates() const { return sched_.phase1_iters + sched_.phase2_iters; }

  ValidationScore validate();

  void save_checkpoint(const std::string& path);
  void load_checkpoint(const std::string& path);

  struct Batch {
    Tensor<float> x;      // degraded band, signed range
    Tensor<float> y;      // clean band, signed range
    Tensor<float> masks;  // class planes, 0/1
  };
  // Assembles patches for the given item indices, drawing rotation,
  // channel, exponent, and crop window from the data RNG per item.
  Batch make_batch(const std::vector<size_t>& indices);

  const TrainerCounters& counters() const { return counters_; }
  const LastLosses& last_losses() const { return last_; }
  const TrainingSchedule& schedule() const { return sched_; }
  Generator<float>& generator() { return gen_; }
  Discriminator<float>& discriminator() { return disc_; }
  FeatureExtractor<float>& extractor() { return fx_; }
  Rng& data_rng() { return data_rng_; }
  EpochIterator& iterator();
  const std::string& out_dir() const { return out_dir_; }
  void set_log(std::ostream* log) { log_ = log; }

 private:
  void phase1_step();
  void phase2_step();
  void disc_step();
  void handle_events();
  void validate_and_log();
  void require_data(const char* where) const;
  void check_finite(double loss, const char* what) const;
  void check_params_finite(const std::vector<ParamRef<float>>& params) const;
  std::string phase_position() const;

  GeneratorConfig gen_cfg_;
  DiscriminatorConfig disc_cfg_;
  FeatureExtractorSpec fx_spec_;
  TrainingSchedule sched_;
  uint64_t seed_ = 0;
  std::string out_dir_;

  Generator<float> gen_;
  Discriminator<float> disc_;
  FeatureExtractor<float> fx_;
  Adam<float> adam_g_;
  Adam<float> adam_d_;
  Rng data_rng_;

  TrainingSet train_;
  std::vector<Batch> val_pairs_;  // one full-image example each
  std::unique_ptr<EpochIterator> iter_;
  bool has_data_ = false;

  TrainerCounters counters_;
  LastLosses last_;
  std::ostream* log_ = nullptr;
};

}  // namespace irsr
