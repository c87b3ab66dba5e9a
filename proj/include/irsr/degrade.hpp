#pragma once

#include <utility>

#include "irsr/image.hpp"
#include "irsr/rng.hpp"

namespace irsr {

// Forward model that turns a high-resolution color source into the
// (low-resolution input, high-resolution target) pair used for training.
// The low branch is blur, bilinear downsampling, then nearest-neighbor
// upsampling back to the original grid, so both images share one grid and
// differ only in resolved detail.
struct DegradationParams {
  double blur_sigma = 3.0;  // 0 disables the blur stage
  int down_factor = 8;
  bool invert = true;  // absorbance-style flip v -> 1-v before the exponent

  void validate() const;
};

// Stochastic augmentation ranges drawn once per training sample.
struct AugmentationParams {
  double rotation_max_deg = 180.0;
  double exp_min = 0.25;  // contrast exponent, shared by both branches
  double exp_max = 4.0;

  void validate() const;
};

enum class ResampleMode { kBilinear, kNearest };

// np.pad-style mirror: the edge sample is not repeated, period 2(n-1).
int reflect_index(int i, int n);

// Dense 2-D gaussian, separable implementation, kernel truncated at
// radius ceil(3*sigma) and renormalized; mirrored borders.
ImagePlane gaussian_blur(const ImagePlane& img, double sigma);

// General resizes. Bilinear samples at (i+0.5)*scale-0.5 with edge clamp;
// nearest takes floor(i*scale) so integer upscales replicate blocks.
ImagePlane resize_bilinear(const ImagePlane& img, int out_h, int out_w);
ImagePlane resize_nearest(const ImagePlane& img, int out_h, int out_w);

ImagePlane resample_down(const ImagePlane& img, int factor, ResampleMode mode);
ImagePlane resample_up(const ImagePlane& img, int factor, ResampleMode mode);

// Rotation about the image center by degrees (counterclockwise), output on
// the same grid, mirrored borders. The nearest variant keeps masks binary.
ImagePlane rotate_bilinear(const ImagePlane& img, double degrees);
ImagePlane rotate_nearest(const ImagePlane& img, double degrees);
ClassMaskStack rotate_masks(const ClassMaskStack& masks, double degrees);

// Deterministic core: invert (optional), apply the contrast exponent, then
// run the low-resolution branch. Returns (lr, hr), both unit range and the
// same size as the input plane.
std::pair<ImagePlane, ImagePlane> degrade_plane(const ImagePlane& plane, double exponent,
                                                const DegradationParams& params);

// Full stochastic forward model: draws the channel and the exponent from
// rng (in that order), then defers to degrade_plane.
std::pair<ImagePlane, ImagePlane> simulate_lr(const ColorImage& src,
                                              const DegradationParams& params,
                                              const AugmentationParams& aug, Rng& rng);

}  // namespace irsr
