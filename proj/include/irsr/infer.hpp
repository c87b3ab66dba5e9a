#pragma once

#include <string>
#include <vector>

#include "irsr/image.hpp"
#include "irsr/nn/generator.hpp"

namespace irsr {

// Tiled application of a trained generator to real absorbance bands.
struct InferOptions {
  int tile = 256;
  int overlap = 32;
  double percentile = 90.0;  // band normalization reference

  void validate() const {
    if (tile < 8 || tile % 8 != 0)
      throw ConfigError("InferOptions: tile must be a positive multiple of 8");
    if (overlap < 0 || overlap >= tile / 2)
      throw ConfigError("InferOptions: overlap must lie in [0, tile/2)");
    if (!(percentile > 0.0 && percentile <= 100.0))
      throw ConfigError("InferOptions: percentile must lie in (0, 100]");
  }
};

// Divides the band by its p-th percentile value and clamps to [0, 1], so
// the bulk of the dynamic range maps onto what the network was trained on
// and rare hot pixels saturate instead of overflowing it.
ImagePlane normalize_band(const ImagePlane& band, double pct = 90.0);

// Top-left offsets of length-`tile` windows covering [0, len) with
// `overlap` shared pixels between neighbors; the last window is shifted
// flush with the end.
std::vector<int> tile_positions(int len, int tile, int overlap);

// Runs the generator over overlapping tiles in eval mode and blends the
// overlaps with a trapezoid feather, so seams carry no discontinuity and
// a single-tile image reproduces the direct forward exactly. Images
// smaller than the tile are reflect-padded up to it. masks must be null
// for an unconditioned generator's input and aligned with img otherwise.
ImagePlane tile_and_stitch(const ImagePlane& img, const ClassMaskStack* masks,
                           Generator<float>& gen, int tile, int overlap);

// Standalone mask description for inference: a JSON object with "classes"
// plus either "mask" (indexed) or "mask_planes", paths resolved against
// the file's directory. Field names match the dataset manifest.
ClassMaskStack load_mask_spec(const std::string& path);

// Rebuilds a generator from a training checkpoint. classes_out, when non
// null, receives the class order the model was trained with.
Generator<float> load_generator(const std::string& checkpoint_path,
                                std::vector<std::string>* classes_out = nullptr);

struct InferResult {
  ImagePlane sr;  // unit range, same dimensions as the input band
  double seconds = 0.0;
  double megapixels = 0.0;
  int tiles_y = 0;
  int tiles_x = 0;
  double divisor = 0.0;  // percentile value the band was divided by
};

// Full pipeline: band and optional masks from disk, generator from a
// checkpoint, normalize, tile, write the enhanced band (PFM when out_path
// ends in .pfm, 16-bit PGM otherwise) plus a JSON sidecar with throughput,
// tile layout, and a checkpoint digest. mask_path may be empty for an
// unconditioned checkpoint and is ignored by one.
InferResult infer(const std::string& band_path, const std::string& mask_path,
                  const std::string& checkpoint_path, const std::string& out_path,
                  const InferOptions& opt = {});

}  // namespace irsr
