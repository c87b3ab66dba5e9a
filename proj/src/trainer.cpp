#include "irsr/trainer.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "irsr/checkpoint.hpp"
#include "irsr/degrade.hpp"
#include "irsr/metrics.hpp"
#include "irsr/nn/losses.hpp"

namespace irsr {
namespace {

void copy_crop_signed(const ImagePlane& src, const PatchWindow& win, float* dst) {
  for (int i = 0; i < win.size; ++i) {
    for (int j = 0; j < win.size; ++j) {
      dst[i * win.size + j] =
          static_cast<float>(2.0 * src.at(win.row + i, win.col + j) - 1.0);
    }
  }
}

ImagePlane plane_from_signed(const float* src, int h, int w) {
  ImagePlane out(h, w, RangeTag::kUnit);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      const double u = 0.5 * (static_cast<double>(src[i * w + j]) + 1.0);
      out.at(i, j) = u < 0.0 ? 0.0 : (u > 1.0 ? 1.0 : u);
    }
  }
  return out;
}

const Json& section(const Json& h, const char* key, const std::string& path) {
  const auto it = h.find(key);
  if (it == h.end()) throw IoError("checkpoint header lacks '" + std::string(key) + "': " + path);
  return *it;
}

}  // namespace

Trainer::Trainer(const GeneratorConfig& gen_cfg, const DiscriminatorConfig& disc_cfg,
                 const FeatureExtractorSpec& fx_spec, const TrainingSchedule& schedule,
                 uint64_t seed, std::string out_dir)
    : gen_cfg_(gen_cfg),
      disc_cfg_(disc_cfg),
      fx_spec_(fx_spec),
      sched_(schedule),
      seed_(seed),
      out_dir_(std::move(out_dir)),
      gen_((gen_cfg.validate(), gen_cfg)),
      disc_((disc_cfg.validate(), disc_cfg)),
      adam_g_(schedule.adam),
      adam_d_(schedule.adam),
      data_rng_(seed) {
  sched_.validate();
  if (gen_cfg_.in_channels != 1 || gen_cfg_.out_channels != 1 || disc_cfg_.in_channels != 1)
    throw ConfigError("Trainer: the pipeline trains on a single band");
  if (fx_spec.in_channels != 1)
    throw ConfigError("Trainer: extractor must consume a single band");
  if (out_dir_.empty()) throw ConfigError("Trainer: empty output directory");
  std::filesystem::create_directories(out_dir_);
  gen_.init(seed + 1);
  disc_.init(seed + 2);
  fx_ = FeatureExtractor<float>::random_init(fx_spec_);
}

void Trainer::set_extractor(FeatureExtractor<float> fx) {
  if (fx.spec().in_channels != 1)
    throw ConfigError("Trainer: extractor must consume a single band");
  fx_ = std::move(fx);
  fx_spec_ = fx_.spec();
}

void Trainer::attach_data(const TrainingSet& train, const TrainingSet& val) {
  train.validate();
  val.validate();
  if (train.classes != val.classes)
    throw ConfigError("Trainer: training and validation class lists differ");
  if (gen_cfg_.mode == GanMode::kCGan &&
      static_cast<size_t>(gen_cfg_.num_classes) != train.classes.size())
    throw ConfigError("Trainer: generator class count differs from the dataset");

  const int factor = sched_.degrade.down_factor;
  for (const auto& item : train.items) {
    const int h = item.image.height(), w = item.image.width();
    if (h % factor != 0 || w % factor != 0 || h % 8 != 0 || w % 8 != 0)
      throw DimensionError("Trainer: training image size must be divisible by 8 and the "
                           "degradation factor");
    if (h < sched_.patch_size || w < sched_.patch_size)
      throw DimensionError("Trainer: training image smaller than the patch size");
  }

  train_ = train;
  iter_ = std::make_unique<EpochIterator>(train_.items.size(), sched_.batch_size);
  has_data_ = true;

  // Deterministic validation protocol: channel cycles with the item index,
  // neutral exponent, no rotation, whole image.
  val_pairs_.clear();
  for (size_t i = 0; i < val.items.size(); ++i) {
    const auto& item = val.items[i];
    const int h = item.image.height(), w = item.image.width();
    if (h % factor != 0 || w % factor != 0 || h % 8 != 0 || w % 8 != 0)
      throw DimensionError("Trainer: validation image size must be divisible by 8 and the "
                           "degradation factor");
    const auto [lr, hr] = degrade_plane(item.image.ch[i % 3], 1.0, sched_.degrade);
    Batch pair{Tensor<float>(1, 1, h, w), Tensor<float>(1, 1, h, w),
               Tensor<float>(1, static_cast<int>(val.classes.size()), h, w)};
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        pair.x.at(0, 0, r, c) = static_cast<float>(2.0 * lr.at(r, c) - 1.0);
        pair.y.at(0, 0, r, c) = static_cast<float>(2.0 * hr.at(r, c) - 1.0);
      }
    }
    for (size_t k = 0; k < val.classes.size(); ++k) {
      for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
          pair.masks.at(0, static_cast<int>(k), r, c) =
              static_cast<float>(item.masks.planes[k].at(r, c));
        }
      }
    }
    val_pairs_.push_back(std::move(pair));
  }
}

EpochIterator& Trainer::iterator() {
  require_data("iterator");
  return *iter_;
}

void Trainer::require_data(const char* where) const {
  if (!has_data_) throw ConfigError(std::string("Trainer: ") + where + " before attach_data");
}

void Trainer::check_finite(double loss, const char* what) const {
  if (!std::isfinite(loss))
    throw NumericError(std::string("Trainer: ") + what + " is non-finite at " + phase_position());
}

// NaN can be absorbed by relu and pooling before it reaches a loss, so a
// finite loss does not prove healthy parameters; scan them after each
// optimizer step.
void Trainer::check_params_finite(const std::vector<ParamRef<float>>& params) const {
  for (const auto& p : params) {
    if (!p.value->all_finite())
      throw NumericError("Trainer: parameter " + p.name + " became non-finite at " +
                         phase_position());
  }
}

std::string Trainer::phase_position() const {
  if (counters_.phase1_updates < sched_.phase1_iters)
    return "phase 1 update " + std::to_string(counters_.phase1_updates);
  return "phase 2 update " + std::to_string(counters_.phase2_g_updates) + " (global " +
         std::to_string(counters_.total()) + ")";
}

Trainer::Batch Trainer::make_batch(const std::vector<size_t>& indices) {
  require_data("make_batch");
  if (indices.empty()) throw ValueError("Trainer: empty batch");
  const int p = sched_.patch_size;
  const int n = static_cast<int>(indices.size());
  const int k = static_cast<int>(train_.classes.size());
  Batch b{Tensor<float>(n, 1, p, p), Tensor<float>(n, 1, p, p), Tensor<float>(n, k, p, p)};

  for (int bi = 0; bi < n; ++bi) {
    const auto& item = train_.items.at(indices[static_cast<size_t>(bi)]);

    double theta = 0.0;
    if (sched_.aug.rotation_max_deg > 0.0)
      theta = data_rng_.uniform(0.0, sched_.aug.rotation_max_deg);
    const int chn = static_cast<int>(data_rng_.uniform_int(0, 2));
    const double e = data_rng_.uniform(sched_.aug.exp_min, sched_.aug.exp_max);

    ImagePlane src = item.image.ch[chn];
    ClassMaskStack masks = item.masks;
    if (theta != 0.0) {
      src = rotate_bilinear(src, theta);
      masks = rotate_masks(masks, theta);
    }
    const auto [lr, hr] = degrade_plane(src, e, sched_.degrade);
    const auto win = sample_window(data_rng_, lr.height(), lr.width(), p);

    copy_crop_signed(lr, win, b.x.chan(bi, 0));
    copy_crop_signed(hr, win, b.y.chan(bi, 0));
    for (int kc = 0; kc < k; ++kc) {
      float* dst = b.masks.chan(bi, kc);
      const auto& mp = masks.planes[static_cast<size_t>(kc)];
      for (int i = 0; i < p; ++i) {
        for (int j = 0; j < p; ++j)
          dst[i * p + j] = static_cast<float>(mp.at(win.row + i, win.col + j));
      }
    }
  }
  return b;
}

void Trainer::phase1_step() {
  const auto batch = make_batch(iter_->next(data_rng_));
  const Tensor<float>* masks = gen_cfg_.mode == GanMode::kCGan ? &batch.masks : nullptr;

  auto params = gen_.params();
  zero_grads(params);
  const Tensor<float> out = gen_.forward(batch.x, masks, Mode::kTrain);
  const double loss = mse_loss(batch.y, out);
  check_finite(loss, "phase 1 pixel loss");
  gen_.backward(mse_grad(batch.y, out));
  adam_g_.step(params, sched_.lr_g);
  check_params_finite(params);
  ++counters_.phase1_updates;
  last_.pixel = loss;
}

void Trainer::phase2_step() {
  const auto batch = make_batch(iter_->next(data_rng_));
  const Tensor<float>* masks = gen_cfg_.mode == GanMode::kCGan ? &batch.masks : nullptr;

  auto params = gen_.params();
  zero_grads(params);
  const Tensor<float> fake = gen_.forward(batch.x, masks, Mode::kTrain);
  auto [l_perc, d_perc] = perceptual_loss_grad(batch.y, fake, fx_);
  const Tensor<float> probs = disc_.forward(fake, Mode::kTrain);
  auto [l_adv, d_prob] = adv_gen_loss_batch(probs);
  const Tensor<float> d_fake = disc_.backward(d_prob);
  const double total = total_gen_loss(l_perc, l_adv, sched_.weights);
  check_finite(total, "phase 2 generator loss");

  Tensor<float> dt(fake.n(), fake.c(), fake.h(), fake.w());
  for (size_t i = 0; i < dt.size(); ++i) {
    dt.values()[i] = static_cast<float>(sched_.weights.alpha * d_perc.values()[i] +
                                        sched_.weights.gamma * d_fake.values()[i]);
  }
  gen_.backward(dt);
  adam_g_.step(params, sched_.lr_g);
  check_params_finite(params);
  ++counters_.phase2_g_updates;
  last_.perceptual = l_perc;
  last_.adversarial = l_adv;
  last_.total = total;

  if (counters_.phase2_g_updates % sched_.g_per_d == 0) disc_step();
}

void Trainer::disc_step() {
  // A fresh batch for the critic; the generator is only run forward here.
  const auto batch = make_batch(iter_->next(data_rng_));
  const Tensor<float>* masks = gen_cfg_.mode == GanMode::kCGan ? &batch.masks : nullptr;

  auto params = disc_.params();
  zero_grads(params);
  const Tensor<float> p_real = disc_.forward(batch.y, Mode::kTrain);
  auto [l_real, g_real] = adv_disc_real_batch(p_real);
  disc_.backward(g_real);

  const Tensor<float> fake = gen_.forward(batch.x, masks, Mode::kTrain);
  const Tensor<float> p_fake = disc_.forward(fake, Mode::kTrain);
  auto [l_fake, g_fake] = adv_disc_fake_batch(p_fake);
  disc_.backward(g_fake);

  const double loss = l_real + l_fake;
  check_finite(loss, "critic loss");
  adam_d_.step(params, sched_.lr_g * sched_.lr_d_ratio);
  check_params_finite(params);
  ++counters_.phase2_d_updates;
  last_.disc = loss;
}

void Trainer::step() {
  require_data("step");
  if (counters_.total() >= planned_updates())
    throw ConfigError("Trainer: schedule already complete");
  if (counters_.phase1_updates < sched_.phase1_iters) {
    phase1_step();
  } else {
    phase2_step();
  }
  handle_events();
}

void Trainer::run() {
  require_data("run");
  while (counters_.total() < planned_updates()) step();
  save_checkpoint(out_dir_ + "/checkpoint_final.ckpt");
}

void Trainer::handle_events() {
  const long g = counters_.total();
  const bool last = g == planned_updates();
  if (g % sched_.validate_every == 0 || last) validate_and_log();
  if (g % sched_.checkpoint_every == 0 || last)
    save_checkpoint(out_dir_ + "/checkpoint_latest.ckpt");
}

ValidationScore Trainer::validate() {
  require_data("validate");
  ValidationScore score;
  if (val_pairs_.empty()) return score;
  for (auto& pair : val_pairs_) {
    const Tensor<float>* masks = gen_cfg_.mode == GanMode::kCGan ? &pair.masks : nullptr;
    const Tensor<float> out = gen_.forward(pair.x, masks, Mode::kEval);
    const ImagePlane got = plane_from_signed(out.chan(0, 0), out.h(), out.w());
    const ImagePlane want = plane_from_signed(pair.y.chan(0, 0), pair.y.h(), pair.y.w());
    score.mse_val += mse(want, got);
    score.psnr_val += psnr(want, got);
    score.ssim_val += ssim(want, got);
  }
  const double n = static_cast<double>(val_pairs_.size());
  score.mse_val /= n;
  score.psnr_val /= n;
  score.ssim_val /= n;
  return score;
}

void Trainer::validate_and_log() {
  const ValidationScore score = validate();
  Json row{{"update", counters_.total()},
           {"phase", counters_.phase1_updates < sched_.phase1_iters ? 1 : 2},
           {"epoch", iter_->epoch()},
           {"val_mse", score.mse_val},
           {"val_psnr", score.psnr_val},
           {"val_ssim", score.ssim_val}};
  if (last_.pixel) row["pixel"] = *last_.pixel;
  if (last_.perceptual) row["perceptual"] = *last_.perceptual;
  if (last_.adversarial) row["adversarial"] = *last_.adversarial;
  if (last_.total) row["total"] = *last_.total;
  if (last_.disc) row["disc"] = *last_.disc;

  std::ofstream os(out_dir_ + "/metrics.jsonl", std::ios::app);
  if (!os) throw IoError("cannot append metrics log in " + out_dir_);
  os << row.dump() << "\n";

  if (log_) {
    *log_ << "update " << counters_.total() << "/" << planned_updates() << " "
          << phase_position() << "  val_psnr " << score.psnr_val << "  val_ssim "
          << score.ssim_val << "\n";
  }
}

void Trainer::save_checkpoint(const std::string& path) {
  require_data("save_checkpoint");
  CheckpointWriter w;
  auto& h = w.header();
  h["gen"] = gen_cfg_;
  h["disc"] = disc_cfg_;
  h["fx"] = fx_spec_;
  h["schedule"] = sched_;
  h["classes"] = train_.classes;
  h["seed"] = seed_;
  h["counters"] = Json{{"phase1_updates", counters_.phase1_updates},
                       {"phase2_g_updates", counters_.phase2_g_updates},
                       {"phase2_d_updates", counters_.phase2_d_updates}};
  h["data_rng"] = data_rng_.serialize();
  h["iterator"] = Json{{"perm", iter_->permutation()},
                       {"cursor", iter_->cursor()},
                       {"epoch", iter_->epoch()}};
  h["adam_g_t"] = adam_g_.t();
  h["adam_d_t"] = adam_d_.t();

  for (auto& p : gen_.params()) w.add_blob("gen/" + p.name, p.value->values());
  for (auto& p : gen_.params()) {
    if (!p.trainable) continue;
    auto [m, v] = adam_g_.moments(p.name, p.value->size());
    w.add_blob("adam_g/" + p.name + "/m", m);
    w.add_blob("adam_g/" + p.name + "/v", v);
  }
  for (auto& p : disc_.params()) w.add_blob("disc/" + p.name, p.value->values());
  for (auto& p : disc_.params()) {
    if (!p.trainable) continue;
    auto [m, v] = adam_d_.moments(p.name, p.value->size());
    w.add_blob("adam_d/" + p.name + "/m", m);
    w.add_blob("adam_d/" + p.name + "/v", v);
  }
  for (size_t i = 0; i < fx_.convs().size(); ++i) {
    w.add_blob("fx/c" + std::to_string(i) + "/w", fx_.convs()[i].w_.values());
    w.add_blob("fx/c" + std::to_string(i) + "/b", fx_.convs()[i].b_.values());
  }

  const std::string tmp = path + ".tmp";
  w.write(tmp);
  std::filesystem::rename(tmp, path);
}

void Trainer::load_checkpoint(const std::string& path) {
  require_data("load_checkpoint");
  const auto ck = CheckpointFile::open(path);
  const Json& h = ck.header();

  GeneratorConfig gcfg = section(h, "gen", path).get<GeneratorConfig>();
  DiscriminatorConfig dcfg = section(h, "disc", path).get<DiscriminatorConfig>();
  FeatureExtractorSpec fspec = section(h, "fx", path).get<FeatureExtractorSpec>();
  TrainingSchedule sched = section(h, "schedule", path).get<TrainingSchedule>();
  gcfg.validate();
  dcfg.validate();
  fspec.validate();
  sched.validate();

  const auto classes = section(h, "classes", path).get<std::vector<std::string>>();
  if (classes != train_.classes)
    throw ConfigError("Trainer: checkpoint classes differ from the attached dataset");
  seed_ = section(h, "seed", path).get<uint64_t>();

  gen_cfg_ = gcfg;
  disc_cfg_ = dcfg;
  fx_spec_ = fspec;
  sched_ = sched;
  gen_ = Generator<float>(gen_cfg_);
  disc_ = Discriminator<float>(disc_cfg_);
  fx_ = FeatureExtractor<float>::random_init(fx_spec_);

  auto restore_params = [&](const std::string& prefix, std::vector<ParamRef<float>> params) {
    for (auto& p : params) {
      const auto& blob = ck.blob(prefix + p.name);
      if (blob.size() != p.value->size())
        throw IoError("checkpoint blob size mismatch for " + prefix + p.name + ": " + path);
      p.value->values().assign(blob.begin(), blob.end());
    }
  };
  restore_params("gen/", gen_.params());
  restore_params("disc/", disc_.params());
  for (size_t i = 0; i < fx_.convs().size(); ++i) {
    auto& conv = fx_.convs()[i];
    const auto& wb = ck.blob("fx/c" + std::to_string(i) + "/w");
    const auto& bb = ck.blob("fx/c" + std::to_string(i) + "/b");
    if (wb.size() != conv.w_.size() || bb.size() != conv.b_.size())
      throw IoError("checkpoint extractor blob size mismatch: " + path);
    conv.w_.values().assign(wb.begin(), wb.end());
    conv.b_.values().assign(bb.begin(), bb.end());
  }

  adam_g_ = Adam<float>(sched_.adam);
  adam_d_ = Adam<float>(sched_.adam);
  adam_g_.set_t(section(h, "adam_g_t", path).get<long>());
  adam_d_.set_t(section(h, "adam_d_t", path).get<long>());
  auto restore_moments = [&](const std::string& prefix, Adam<float>& opt,
                             std::vector<ParamRef<float>> params) {
    for (auto& p : params) {
      if (!p.trainable) continue;
      auto [m, v] = opt.moments(p.name, p.value->size());
      const auto& mb = ck.blob(prefix + p.name + "/m");
      const auto& vb = ck.blob(prefix + p.name + "/v");
      if (mb.size() != m.size() || vb.size() != v.size())
        throw IoError("checkpoint moment size mismatch for " + prefix + p.name + ": " + path);
      m.assign(mb.begin(), mb.end());
      v.assign(vb.begin(), vb.end());
    }
  };
  restore_moments("adam_g/", adam_g_, gen_.params());
  restore_moments("adam_d/", adam_d_, disc_.params());

  const Json& counters = section(h, "counters", path);
  counters_.phase1_updates = section(counters, "phase1_updates", path).get<long>();
  counters_.phase2_g_updates = section(counters, "phase2_g_updates", path).get<long>();
  counters_.phase2_d_updates = section(counters, "phase2_d_updates", path).get<long>();

  data_rng_.deserialize(section(h, "data_rng", path).get<std::string>());
  const Json& it = section(h, "iterator", path);
  iter_ = std::make_unique<EpochIterator>(train_.items.size(), sched_.batch_size);
  iter_->restore(section(it, "perm", path).get<std::vector<size_t>>(),
                 section(it, "cursor", path).get<size_t>(),
                 section(it, "epoch", path).get<long>());
  last_ = LastLosses{};
}

}  // namespace irsr
