#pragma once

#include <vector>

#include "irsr/image.hpp"

namespace irsr {

double mse(const ImagePlane& a, const ImagePlane& b);

// Peak signal-to-noise ratio in dB; +infinity for identical inputs.
double psnr(const ImagePlane& a, const ImagePlane& b, double peak = 1.0);

// Mean structural similarity with an 11-tap gaussian window (sigma 1.5),
// symmetric border handling, and a border crop of the window radius.
// Inputs must be at least 11x11.
double ssim(const ImagePlane& a, const ImagePlane& b, double data_range = 1.0);

// Mean squared 4-neighbor laplacian response over the interior; a cheap
// monotone proxy for high-frequency content.
double laplacian_energy(const ImagePlane& img);

// p-th percentile (0..100) with linear interpolation between order
// statistics.
double percentile(std::vector<double> values, double p);

}  // namespace irsr
