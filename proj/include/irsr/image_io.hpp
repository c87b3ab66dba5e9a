#pragma once

#include <string>
#include <vector>

#include "irsr/image.hpp"

namespace irsr {

// Raster I/O. Grayscale bands travel as PGM (P5, 8- or 16-bit) or PFM
// (Pf, float32); color sources as PPM (P6, 8- or 16-bit). All formats are
// lossless containers; integer samples map linearly to [0, 1] via maxval.
// read_gray / read_color sniff the magic, so the extension is cosmetic.

ImagePlane read_gray(const std::string& path);
ColorImage read_color(const std::string& path);

void write_pgm8(const ImagePlane& img, const std::string& path);
void write_pgm16(const ImagePlane& img, const std::string& path);
void write_ppm8(const ColorImage& img, const std::string& path);
void write_ppm16(const ColorImage& img, const std::string& path);
void write_pfm(const ImagePlane& img, const std::string& path);

// Class masks on disk. Indexed form: an 8-bit PGM whose pixel value is the
// class index (must be < classes.size()). Plane form: one binary PGM per
// class, in class order.
ClassMaskStack read_mask_indexed(const std::string& path, const std::vector<std::string>& classes);
ClassMaskStack read_mask_planes(const std::vector<std::string>& paths,
                                const std::vector<std::string>& classes);
void write_mask_indexed(const ClassMaskStack& masks, const std::string& path);

}  // namespace irsr
