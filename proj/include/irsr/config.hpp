#pragma once

#include <string>

#include "json.hpp"

#include "irsr/degrade.hpp"
#include "irsr/infer.hpp"
#include "irsr/nn/adam.hpp"
#include "irsr/nn/discriminator.hpp"
#include "irsr/nn/feature_extractor.hpp"
#include "irsr/nn/generator.hpp"
#include "irsr/nn/losses.hpp"
#include "irsr/schedule.hpp"
#include "irsr/synth.hpp"

namespace irsr {

// Key-ordered documents so emitted files and checkpoint headers are
// byte-stable across runs.
using Json = nlohmann::ordered_json;

// JSON mapping for every tunable. Reading is lenient: absent keys keep
// the struct's defaults, unknown keys are ignored, and a value of the
// wrong shape raises ConfigError. Reading never validates; callers run
// validate() once the full document is assembled.
std::string gan_mode_name(GanMode mode);
GanMode gan_mode_from_name(const std::string& name);

void to_json(Json& j, const GeneratorConfig& c);
void from_json(const Json& j, GeneratorConfig& c);
void to_json(Json& j, const DiscriminatorConfig& c);
void from_json(const Json& j, DiscriminatorConfig& c);
void to_json(Json& j, const FeatureExtractorSpec& c);
void from_json(const Json& j, FeatureExtractorSpec& c);
void to_json(Json& j, const LossWeights& c);
void from_json(const Json& j, LossWeights& c);
void to_json(Json& j, const AdamConfig& c);
void from_json(const Json& j, AdamConfig& c);
void to_json(Json& j, const DegradationParams& c);
void from_json(const Json& j, DegradationParams& c);
void to_json(Json& j, const AugmentationParams& c);
void from_json(const Json& j, AugmentationParams& c);
void to_json(Json& j, const TrainingSchedule& c);
void from_json(const Json& j, TrainingSchedule& c);
void to_json(Json& j, const InferOptions& c);
void from_json(const Json& j, InferOptions& c);
void to_json(Json& j, const SynthConfig& c);
void from_json(const Json& j, SynthConfig& c);

Json load_json_file(const std::string& path);
void save_json_file(const Json& j, const std::string& path);

}  // namespace irsr
