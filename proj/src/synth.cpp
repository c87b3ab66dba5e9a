#include "irsr/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "irsr/config.hpp"
#include "irsr/image_io.hpp"

namespace irsr {
namespace {

namespace fs = std::filesystem;

struct Blob {
  double cy, cx, sigma, amp;
};

double blob_sum(const std::vector<Blob>& blobs, int i, int j) {
  double s = 0.0;
  for (const auto& b : blobs) {
    const double dy = i - b.cy, dx = j - b.cx;
    s += b.amp * std::exp(-(dy * dy + dx * dx) / (2.0 * b.sigma * b.sigma));
  }
  return s;
}

}  // namespace

const std::vector<std::string>& synth_classes() {
  static const std::vector<std::string> k = {"stroma", "epithelium", "other"};
  return k;
}

ClassMaskStack synth_label_field(int height, int width, int blobs_per_class, Rng& rng) {
  if (height < 1 || width < 1) throw DimensionError("synth_label_field: bad size");
  if (blobs_per_class < 1) throw ValueError("synth_label_field: blobs_per_class must be >= 1");
  const double lo = std::min(height, width) / 6.0;
  const double hi = std::min(height, width) / 3.0;
  std::vector<std::vector<Blob>> blobs(3);
  for (auto& cls : blobs) {
    for (int b = 0; b < blobs_per_class; ++b) {
      Blob bl;
      bl.cy = rng.uniform(0.0, height);
      bl.cx = rng.uniform(0.0, width);
      bl.sigma = rng.uniform(lo, hi);
      bl.amp = rng.uniform(0.6, 1.0);
      cls.push_back(bl);
    }
  }

  ClassMaskStack m;
  m.classes = synth_classes();
  m.planes.assign(3, ImagePlane(height, width));
  for (int i = 0; i < height; ++i) {
    for (int j = 0; j < width; ++j) {
      // The floor keeps "other" the default wherever no bump dominates.
      double best = -1.0;
      int arg = 0;
      for (int c = 0; c < 3; ++c) {
        const double s = blob_sum(blobs[static_cast<size_t>(c)], i, j) + (c == 2 ? 0.25 : 0.0);
        if (s > best) {
          best = s;
          arg = c;
        }
      }
      m.planes[static_cast<size_t>(arg)].at(i, j) = 1.0;
    }
  }
  return m;
}

ColorImage synth_texture(const ClassMaskStack& masks, const SynthConfig& cfg, Rng& rng) {
  if (masks.num_classes() != 3) throw DimensionError("synth_texture: expects three classes");
  const int h = masks.height(), w = masks.width();

  // Every stochastic field draws unconditionally and in a fixed order, so
  // the stream position never depends on mask content.
  const double theta = rng.uniform(0.0, M_PI);
  const double lam = rng.uniform(cfg.stripe_min_wavelength, cfg.stripe_max_wavelength);
  const double phase = rng.uniform(0.0, 2.0 * M_PI);

  const int n_nuclei = static_cast<int>(std::lround(cfg.nuclei_per_kpx * h * w / 1000.0));
  std::vector<Blob> nuclei;
  for (int n = 0; n < n_nuclei; ++n) {
    Blob b;
    b.cy = rng.uniform(0.0, h);
    b.cx = rng.uniform(0.0, w);
    b.sigma = rng.uniform(1.2, 2.4);
    b.amp = rng.uniform(0.35, 0.55);
    nuclei.push_back(b);
  }

  ImagePlane noise(h, w);
  for (auto& v : noise.values()) v = rng.uniform() - 0.5;

  static const double tint[3][3] = {
      {1.00, 0.72, 0.82},  // stroma: eosin pink
      {0.80, 0.62, 0.95},  // epithelium: hematoxylin purple
      {1.00, 1.00, 1.00},  // other: unstained
  };

  ColorImage img;
  for (auto& p : img.ch) p = ImagePlane(h, w);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      int cls = 2;
      for (int c = 0; c < 3; ++c) {
        if (masks.planes[static_cast<size_t>(c)].at(i, j) == 1.0) {
          cls = c;
          break;
        }
      }
      double gray;
      if (cls == 0) {
        const double t = (i * std::sin(theta) + j * std::cos(theta)) * 2.0 * M_PI / lam;
        gray = 0.55 + 0.25 * std::sin(t + phase);
      } else if (cls == 1) {
        gray = std::max(0.15, 0.78 - blob_sum(nuclei, i, j));
      } else {
        gray = 0.93 + 2.0 * cfg.speckle * noise.at(i, j);
      }
      for (int c = 0; c < 3; ++c) {
        img.ch[static_cast<size_t>(c)].at(i, j) = std::clamp(gray * tint[cls][c], 0.0, 1.0);
      }
    }
  }
  return img;
}

std::string generate_dataset(const SynthConfig& cfg, uint64_t seed, const std::string& out_dir) {
  cfg.validate();
  fs::create_directories(out_dir);
  Rng rng(seed);

  Json items = Json::array();
  char name[32];
  for (int n = 0; n < cfg.count; ++n) {
    const auto masks = synth_label_field(cfg.height, cfg.width, cfg.blobs_per_class, rng);
    const auto img = synth_texture(masks, cfg, rng);
    std::snprintf(name, sizeof name, "img_%04d.ppm", n);
    const std::string img_name = name;
    write_ppm8(img, (fs::path(out_dir) / img_name).string());
    std::snprintf(name, sizeof name, "mask_%04d.pgm", n);
    const std::string mask_name = name;
    write_mask_indexed(masks, (fs::path(out_dir) / mask_name).string());
    items.push_back(Json{{"image", img_name}, {"mask", mask_name}});
  }

  const Json manifest{{"classes", synth_classes()}, {"items", items}};
  const std::string path = (fs::path(out_dir) / "manifest.json").string();
  save_json_file(manifest, path);
  return path;
}

ImagePlane synth_band(int height, int width, uint64_t seed) {
  if (height < 1 || width < 1) throw DimensionError("synth_band: bad size");
  Rng rng(seed);
  const double lo = std::min(height, width) / 8.0;
  const double hi = std::min(height, width) / 3.0;
  std::vector<Blob> lobes;
  for (int n = 0; n < 6; ++n) {
    Blob b;
    b.cy = rng.uniform(0.0, height);
    b.cx = rng.uniform(0.0, width);
    b.sigma = rng.uniform(lo, hi);
    b.amp = rng.uniform(0.4, 1.2);
    lobes.push_back(b);
  }
  double th[2], lam[2], ph[2];
  for (int s = 0; s < 2; ++s) {
    th[s] = rng.uniform(0.0, M_PI);
    lam[s] = rng.uniform(3.0, 9.0);
    ph[s] = rng.uniform(0.0, 2.0 * M_PI);
  }

  ImagePlane band(height, width);
  for (int i = 0; i < height; ++i) {
    for (int j = 0; j < width; ++j) {
      double v = 0.3 + blob_sum(lobes, i, j);
      for (int s = 0; s < 2; ++s) {
        const double t = (i * std::sin(th[s]) + j * std::cos(th[s])) * 2.0 * M_PI / lam[s];
        v += 0.25 * std::sin(t + ph[s]);
      }
      band.at(i, j) = std::clamp(v, 0.0, 2.0);
    }
  }
  return band;
}

}  // namespace irsr
