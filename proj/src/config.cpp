#include "irsr/config.hpp"

#include <fstream>

#include "irsr/errors.hpp"

namespace irsr {
namespace {

template <typename T>
void read_field(const Json& j, const char* key, T& out) {
  if (!j.is_object()) throw ConfigError("config: expected an object");
  const auto it = j.find(key);
  if (it == j.end()) return;
  try {
    it->get_to(out);
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("config: bad value for '") + key + "'");
  }
}

}  // namespace

std::string gan_mode_name(GanMode mode) {
  return mode == GanMode::kCGan ? "cgan" : "ugan";
}

GanMode gan_mode_from_name(const std::string& name) {
  if (name == "cgan") return GanMode::kCGan;
  if (name == "ugan") return GanMode::kUGan;
  throw ConfigError("config: unknown mode '" + name + "' (expected cgan or ugan)");
}

void to_json(Json& j, const GeneratorConfig& c) {
  j = Json{{"mode", gan_mode_name(c.mode)},
           {"widths", c.widths},
           {"num_classes", c.num_classes},
           {"cond_hidden", c.cond_hidden},
           {"in_channels", c.in_channels},
           {"out_channels", c.out_channels}};
}

void from_json(const Json& j, GeneratorConfig& c) {
  std::string mode = gan_mode_name(c.mode);
  read_field(j, "mode", mode);
  c.mode = gan_mode_from_name(mode);
  read_field(j, "widths", c.widths);
  read_field(j, "num_classes", c.num_classes);
  read_field(j, "cond_hidden", c.cond_hidden);
  read_field(j, "in_channels", c.in_channels);
  read_field(j, "out_channels", c.out_channels);
}

void to_json(Json& j, const DiscriminatorConfig& c) {
  j = Json{{"base", c.base}, {"fc_dim", c.fc_dim}, {"in_channels", c.in_channels}};
}

void from_json(const Json& j, DiscriminatorConfig& c) {
  read_field(j, "base", c.base);
  read_field(j, "fc_dim", c.fc_dim);
  read_field(j, "in_channels", c.in_channels);
}

void to_json(Json& j, const FeatureExtractorSpec& c) {
  j = Json{{"channels", c.channels},
           {"pool_after", c.pool_after},
           {"in_channels", c.in_channels},
           {"seed", c.seed}};
}

void from_json(const Json& j, FeatureExtractorSpec& c) {
  read_field(j, "channels", c.channels);
  read_field(j, "pool_after", c.pool_after);
  read_field(j, "in_channels", c.in_channels);
  read_field(j, "seed", c.seed);
}

void to_json(Json& j, const LossWeights& c) {
  j = Json{{"alpha", c.alpha}, {"gamma", c.gamma}};
}

void from_json(const Json& j, LossWeights& c) {
  read_field(j, "alpha", c.alpha);
  read_field(j, "gamma", c.gamma);
}

void to_json(Json& j, const AdamConfig& c) {
  j = Json{{"beta1", c.beta1}, {"beta2", c.beta2}, {"eps", c.eps}};
}

void from_json(const Json& j, AdamConfig& c) {
  read_field(j, "beta1", c.beta1);
  read_field(j, "beta2", c.beta2);
  read_field(j, "eps", c.eps);
}

void to_json(Json& j, const DegradationParams& c) {
  j = Json{{"blur_sigma", c.blur_sigma}, {"down_factor", c.down_factor}, {"invert", c.invert}};
}

void from_json(const Json& j, DegradationParams& c) {
  read_field(j, "blur_sigma", c.blur_sigma);
  read_field(j, "down_factor", c.down_factor);
  read_field(j, "invert", c.invert);
}

void to_json(Json& j, const AugmentationParams& c) {
  j = Json{{"rotation_max_deg", c.rotation_max_deg},
           {"exp_min", c.exp_min},
           {"exp_max", c.exp_max}};
}

void from_json(const Json& j, AugmentationParams& c) {
  read_field(j, "rotation_max_deg", c.rotation_max_deg);
  read_field(j, "exp_min", c.exp_min);
  read_field(j, "exp_max", c.exp_max);
}

void to_json(Json& j, const TrainingSchedule& c) {
  j = Json{{"phase1_iters", c.phase1_iters},
           {"phase2_iters", c.phase2_iters},
           {"g_per_d", c.g_per_d},
           {"lr_g", c.lr_g},
           {"lr_d_ratio", c.lr_d_ratio},
           {"batch_size", c.batch_size},
           {"patch_size", c.patch_size},
           {"validate_every", c.validate_every},
           {"checkpoint_every", c.checkpoint_every},
           {"weights", c.weights},
           {"adam", c.adam},
           {"degrade", c.degrade},
           {"aug", c.aug}};
}

void from_json(const Json& j, TrainingSchedule& c) {
  read_field(j, "phase1_iters", c.phase1_iters);
  read_field(j, "phase2_iters", c.phase2_iters);
  read_field(j, "g_per_d", c.g_per_d);
  read_field(j, "lr_g", c.lr_g);
  read_field(j, "lr_d_ratio", c.lr_d_ratio);
  read_field(j, "batch_size", c.batch_size);
  read_field(j, "patch_size", c.patch_size);
  read_field(j, "validate_every", c.validate_every);
  read_field(j, "checkpoint_every", c.checkpoint_every);
  read_field(j, "weights", c.weights);
  read_field(j, "adam", c.adam);
  read_field(j, "degrade", c.degrade);
  read_field(j, "aug", c.aug);
}

void to_json(Json& j, const InferOptions& c) {
  j = Json{{"tile", c.tile}, {"overlap", c.overlap}, {"percentile", c.percentile}};
}

void from_json(const Json& j, InferOptions& c) {
  read_field(j, "tile", c.tile);
  read_field(j, "overlap", c.overlap);
  read_field(j, "percentile", c.percentile);
}

void to_json(Json& j, const SynthConfig& c) {
  j = Json{{"count", c.count},
           {"height", c.height},
           {"width", c.width},
           {"blobs_per_class", c.blobs_per_class},
           {"stripe_min_wavelength", c.stripe_min_wavelength},
           {"stripe_max_wavelength", c.stripe_max_wavelength},
           {"nuclei_per_kpx", c.nuclei_per_kpx},
           {"speckle", c.speckle}};
}

void from_json(const Json& j, SynthConfig& c) {
  read_field(j, "count", c.count);
  read_field(j, "height", c.height);
  read_field(j, "width", c.width);
  read_field(j, "blobs_per_class", c.blobs_per_class);
  read_field(j, "stripe_min_wavelength", c.stripe_min_wavelength);
  read_field(j, "stripe_max_wavelength", c.stripe_max_wavelength);
  read_field(j, "nuclei_per_kpx", c.nuclei_per_kpx);
  read_field(j, "speckle", c.speckle);
}

Json load_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config file: " + path);
  try {
    Json j;
    is >> j;
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config parse failure in " + path + ": " + e.what());
  }
}

void save_json_file(const Json& j, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write file: " + path);
  os << j.dump(2) << "\n";
  if (!os) throw IoError("write failure: " + path);
}

}  // namespace irsr
