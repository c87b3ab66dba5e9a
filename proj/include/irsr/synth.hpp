#pragma once

#include <cstdint>
#include <string>

#include "irsr/errors.hpp"
#include "irsr/image.hpp"
#include "irsr/rng.hpp"

namespace irsr {

// Procedural stand-in for stained tissue scans: smooth three-class label
// fields (stroma / epithelium / other) with a class-distinct texture in
// each region, plus matching indexed masks and a manifest, so the whole
// training stack can run without any proprietary source data.
struct SynthConfig {
  int count = 64;
  int height = 96;
  int width = 96;
  int blobs_per_class = 3;
  double stripe_min_wavelength = 4.0;  // stroma fiber period, pixels
  double stripe_max_wavelength = 8.0;
  double nuclei_per_kpx = 12.0;  // epithelium nucleus density per 1000 px
  double speckle = 0.02;         // background noise amplitude

  void validate() const {
    if (count < 1) throw ConfigError("SynthConfig: count must be >= 1");
    if (height < 16 || height % 8 != 0 || width < 16 || width % 8 != 0)
      throw ConfigError("SynthConfig: dimensions must be multiples of 8, at least 16");
    if (blobs_per_class < 1) throw ConfigError("SynthConfig: blobs_per_class must be >= 1");
    if (stripe_min_wavelength < 2.0 || stripe_max_wavelength < stripe_min_wavelength)
      throw ConfigError("SynthConfig: bad stripe wavelength range");
    if (nuclei_per_kpx < 0.0) throw ConfigError("SynthConfig: nuclei density must be >= 0");
    if (speckle < 0.0 || speckle > 0.5) throw ConfigError("SynthConfig: speckle outside [0, 0.5]");
  }
};

// Class order used by every synthetic dataset.
const std::vector<std::string>& synth_classes();

// One-hot label field: per-class gaussian bump mixtures composited by
// argmax, giving smooth contiguous regions at a scale the degradation
// pipeline cannot erase.
ClassMaskStack synth_label_field(int height, int width, int blobs_per_class, Rng& rng);

// Color texture matching the label field: striped fibers over stroma,
// dark nuclei over epithelium, near-white speckle elsewhere.
ColorImage synth_texture(const ClassMaskStack& masks, const SynthConfig& cfg, Rng& rng);

// Materializes count image/mask pairs plus manifest.json under out_dir.
// Byte-deterministic for a fixed seed. Returns the manifest path.
std::string generate_dataset(const SynthConfig& cfg, uint64_t seed, const std::string& out_dir);

// Single-band absorbance-like field of arbitrary size for inference and
// throughput exercises: smooth lobes plus fine stripes, values in [0, 2].
ImagePlane synth_band(int height, int width, uint64_t seed);

}  // namespace irsr
