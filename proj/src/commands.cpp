#include "irsr/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <utility>
#include <vector>

#include "irsr/dataset.hpp"
#include "irsr/degrade.hpp"
#include "irsr/image_io.hpp"
#include "irsr/infer.hpp"
#include "irsr/metrics.hpp"
#include "irsr/synth.hpp"
#include "irsr/trainer.hpp"

namespace irsr {

namespace {

std::string get_str(const Json& cfg, const char* key, const std::string& fallback) {
  if (!cfg.contains(key)) return fallback;
  if (!cfg.at(key).is_string())
    throw ConfigError(std::string("config field ") + key + " must be a string");
  return cfg.at(key).get<std::string>();
}

std::string need_str(const Json& cfg, const char* key) {
  const std::string v = get_str(cfg, key, "");
  if (v.empty()) throw ConfigError(std::string("config field ") + key + " is required");
  return v;
}

int get_int(const Json& cfg, const char* key, int fallback) {
  if (!cfg.contains(key)) return fallback;
  if (!cfg.at(key).is_number())
    throw ConfigError(std::string("config field ") + key + " must be a number");
  return cfg.at(key).get<int>();
}

uint64_t get_u64(const Json& cfg, const char* key, uint64_t fallback) {
  if (!cfg.contains(key)) return fallback;
  if (!cfg.at(key).is_number())
    throw ConfigError(std::string("config field ") + key + " must be a number");
  return cfg.at(key).get<uint64_t>();
}

// Sub-struct from an optional config object; absent keys keep defaults.
template <class T>
T get_obj(const Json& cfg, const char* key) {
  T t{};
  if (!cfg.contains(key)) return t;
  if (!cfg.at(key).is_object())
    throw ConfigError(std::string("config field ") + key + " must be an object");
  cfg.at(key).get_to(t);
  return t;
}

void echo_config(const Json& resolved, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  save_json_file(resolved, out_dir + "/resolved_config.json");
}

// Side-by-side panel: parts left to right with a 2 px white separator.
ImagePlane hconcat(const std::vector<const ImagePlane*>& parts) {
  const int sep = 2;
  const int h = parts[0]->height();
  int w = sep * (static_cast<int>(parts.size()) - 1);
  for (const auto* p : parts) w += p->width();
  ImagePlane panel = ImagePlane::full(h, w, 1.0);
  int x0 = 0;
  for (const auto* p : parts) {
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < p->width(); ++j) panel.at(i, x0 + j) = p->at(i, j);
    x0 += p->width() + sep;
  }
  return panel;
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ValueError*>(&e) || dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const InputError*>(&e) || dynamic_cast<const DimensionError*>(&e)) return 3;
  if (dynamic_cast<const NumericError*>(&e)) return 4;
  if (dynamic_cast<const IoError*>(&e)) return 5;
  return 1;
}

int run_simulate(const Json& cfg, std::ostream& out, std::ostream& err) {
  const std::string manifest_path = need_str(cfg, "manifest");
  const std::string data_root = get_str(cfg, "data_root", "");
  const std::string out_dir = need_str(cfg, "out");
  const uint64_t seed = get_u64(cfg, "seed", 1);
  const DegradationParams degrade = get_obj<DegradationParams>(cfg, "degrade");
  const AugmentationParams aug = get_obj<AugmentationParams>(cfg, "aug");
  degrade.validate();
  aug.validate();
  const Manifest manifest = Manifest::load(manifest_path, data_root);

  echo_config(Json{{"command", "simulate"},
                   {"manifest", manifest_path},
                   {"data_root", data_root},
                   {"out", out_dir},
                   {"seed", seed},
                   {"degrade", degrade},
                   {"aug", aug}},
              out_dir);

  // The channel and exponent draws happen inside simulate_lr, one pair per
  // readable entry, so a fixed seed reproduces the output byte for byte.
  Rng rng(seed);
  Json items = Json::array();
  int failures = 0;
  for (size_t i = 0; i < manifest.items.size(); ++i) {
    const ManifestItem& item = manifest.items[i];
    char lr_name[32], hr_name[32];
    std::snprintf(lr_name, sizeof lr_name, "lr_%04d.pgm", static_cast<int>(i));
    std::snprintf(hr_name, sizeof hr_name, "hr_%04d.pgm", static_cast<int>(i));
    try {
      const ColorImage src = read_color(manifest.resolve(item.image));
      const auto [lr, hr] = simulate_lr(src, degrade, aug, rng);
      write_pgm16(lr, out_dir + "/" + lr_name);
      write_pgm16(hr, out_dir + "/" + hr_name);
    } catch (const Error& e) {
      err << "entry " << i << " (" << item.image << "): " << e.what() << "\n";
      ++failures;
      continue;
    }
    items.push_back(Json{{"lr", lr_name}, {"hr", hr_name}, {"source", item.image}});
  }
  save_json_file(Json{{"classes", manifest.classes}, {"items", items}}, out_dir + "/pairs.json");
  out << "materialized " << items.size() << " of " << manifest.items.size() << " pairs -> "
      << out_dir << "\n";
  if (failures > 0) {
    err << failures << " entries failed\n";
    return 5;
  }
  return 0;
}

int run_train(const Json& cfg, std::ostream& out) {
  const std::string manifest_path = need_str(cfg, "manifest");
  const std::string val_path = get_str(cfg, "val_manifest", manifest_path);
  const std::string data_root = get_str(cfg, "data_root", "");
  const std::string out_dir = need_str(cfg, "out");
  const std::string resume = get_str(cfg, "checkpoint", "");
  const uint64_t seed = get_u64(cfg, "seed", 1);
  GeneratorConfig gen = get_obj<GeneratorConfig>(cfg, "gen");
  const DiscriminatorConfig disc = get_obj<DiscriminatorConfig>(cfg, "disc");
  const FeatureExtractorSpec fx = get_obj<FeatureExtractorSpec>(cfg, "fx");
  const TrainingSchedule sched = get_obj<TrainingSchedule>(cfg, "schedule");
  if (cfg.contains("mode")) gen.mode = gan_mode_from_name(need_str(cfg, "mode"));

  const TrainingSet train = TrainingSet::load(Manifest::load(manifest_path, data_root));
  const bool same_split = val_path == manifest_path;
  const TrainingSet val =
      same_split ? TrainingSet{} : TrainingSet::load(Manifest::load(val_path, data_root));
  // The class count follows the dataset unless the config pins it.
  if (!(cfg.contains("gen") && cfg.at("gen").contains("num_classes")))
    gen.num_classes = static_cast<int>(train.classes.size());

  Trainer trainer(gen, disc, fx, sched, seed, out_dir);
  trainer.attach_data(train, same_split ? train : val);
  if (!resume.empty()) trainer.load_checkpoint(resume);

  echo_config(Json{{"command", "train"},
                   {"manifest", manifest_path},
                   {"val_manifest", val_path},
                   {"data_root", data_root},
                   {"out", out_dir},
                   {"seed", seed},
                   {"mode", gan_mode_name(gen.mode)},
                   {"checkpoint", resume},
                   {"gen", gen},
                   {"disc", disc},
                   {"fx", fx},
                   {"schedule", sched}},
              out_dir);

  trainer.set_log(&out);
  trainer.run();
  const TrainerCounters& c = trainer.counters();
  out << "done: " << c.phase1_updates << " phase-1, " << c.phase2_g_updates << " phase-2, "
      << c.phase2_d_updates << " critic updates; final state " << out_dir
      << "/checkpoint_final.ckpt\n";
  return 0;
}

int run_infer(const Json& cfg, std::ostream& out) {
  const std::string band = need_str(cfg, "band");
  const std::string mask = get_str(cfg, "mask", "");
  const std::string ckpt = need_str(cfg, "checkpoint");
  const std::string out_dir = need_str(cfg, "out");
  const std::string out_name = get_str(cfg, "out_name", "sr.pgm");
  const InferOptions opt = get_obj<InferOptions>(cfg, "infer");
  opt.validate();

  echo_config(Json{{"command", "infer"},
                   {"band", band},
                   {"mask", mask},
                   {"checkpoint", ckpt},
                   {"out", out_dir},
                   {"out_name", out_name},
                   {"infer", opt}},
              out_dir);

  const InferResult r = infer(band, mask, ckpt, out_dir + "/" + out_name, opt);
  out << "wrote " << out_dir << "/" << out_name << ": " << r.sr.height() << "x" << r.sr.width()
      << " (" << r.megapixels << " MPx) in " << r.seconds << " s, " << r.tiles_y << "x"
      << r.tiles_x << " tiles\n";
  return 0;
}

int run_eval(const Json& cfg, std::ostream& out) {
  const std::string sr_path = need_str(cfg, "sr");
  const std::string ref_path = need_str(cfg, "ref");
  const std::string input_path = get_str(cfg, "input", "");
  const std::string out_dir = need_str(cfg, "out");

  const ImagePlane sr = read_gray(sr_path);
  const ImagePlane ref = read_gray(ref_path);
  if (!sr.same_shape(ref)) throw DimensionError("eval: enhanced and reference dimensions differ");
  ImagePlane input;
  std::vector<const ImagePlane*> parts;
  if (!input_path.empty()) {
    input = read_gray(input_path);
    if (!input.same_shape(ref)) throw DimensionError("eval: input and reference dimensions differ");
    parts.push_back(&input);
  }
  parts.push_back(&sr);
  parts.push_back(&ref);

  echo_config(Json{{"command", "eval"},
                   {"sr", sr_path},
                   {"ref", ref_path},
                   {"input", input_path},
                   {"out", out_dir}},
              out_dir);

  const double m = mse(ref, sr);
  const double p = psnr(ref, sr);
  const double s = ssim(ref, sr);
  Json metrics{{"sr", sr_path}, {"ref", ref_path}, {"mse", m}};
  // JSON has no infinity, so identical images store a string sentinel.
  if (std::isfinite(p))
    metrics["psnr_db"] = p;
  else
    metrics["psnr_db"] = "inf";
  metrics["ssim"] = s;
  save_json_file(metrics, out_dir + "/metrics.json");
  write_pgm16(hconcat(parts), out_dir + "/panel.pgm");
  out << "psnr " << p << " dB  ssim " << s << "  mse " << m << "\n";
  return 0;
}

int run_synth(const Json& cfg, std::ostream& out) {
  const std::string out_dir = need_str(cfg, "out");
  const uint64_t seed = get_u64(cfg, "seed", 1);
  const SynthConfig synth = get_obj<SynthConfig>(cfg, "synth");
  const int band_h = get_int(cfg, "band_height", 0);
  const int band_w = get_int(cfg, "band_width", 0);
  synth.validate();
  if ((band_h > 0) != (band_w > 0))
    throw ConfigError("synth: band_height and band_width must be given together");

  echo_config(Json{{"command", "synth"},
                   {"out", out_dir},
                   {"seed", seed},
                   {"synth", synth},
                   {"band_height", band_h},
                   {"band_width", band_w}},
              out_dir);

  const std::string manifest = generate_dataset(synth, seed, out_dir);
  out << "wrote " << synth.count << " image/mask pairs, manifest " << manifest << "\n";
  if (band_h > 0) {
    write_pfm(synth_band(band_h, band_w, seed), out_dir + "/band.pfm");
    out << "wrote " << out_dir << "/band.pfm (" << band_h << "x" << band_w << ")\n";
  }
  return 0;
}

}  // namespace irsr
