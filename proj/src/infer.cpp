#include "irsr/infer.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>

#include "irsr/checkpoint.hpp"
#include "irsr/config.hpp"
#include "irsr/degrade.hpp"
#include "irsr/image_io.hpp"
#include "irsr/metrics.hpp"

namespace irsr {
namespace {

namespace fs = std::filesystem;

// Padded read: coordinates beyond the plane mirror back inside.
double sample_reflect(const ImagePlane& p, int i, int j) {
  return p.at(reflect_index(i, p.height()), reflect_index(j, p.width()));
}

// Per-axis feather: ramps over overlap+1 samples at both tile ends, flat 1
// between. With a single tile on an axis there is nothing to blend against,
// so the weight stays 1 and the stitched result divides out exactly.
std::vector<double> feather(int tile, int overlap, bool single) {
  std::vector<double> w(static_cast<size_t>(tile), 1.0);
  if (single || overlap == 0) return w;
  for (int i = 0; i < tile; ++i) {
    const int side = std::min(i + 1, tile - i);
    w[static_cast<size_t>(i)] = std::min(side, overlap + 1) / static_cast<double>(overlap + 1);
  }
  return w;
}

uint64_t fnv1a64_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint for digest: " + path);
  uint64_t h = 0xcbf29ce484222325ull;
  char buf[4096];
  while (is.read(buf, sizeof buf), is.gcount() > 0) {
    for (std::streamsize i = 0; i < is.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ull;
    }
  }
  return h;
}

std::string hex64(uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<size_t>(i)] = digits[v & 0xf];
  return s;
}

}  // namespace

ImagePlane normalize_band(const ImagePlane& band, double pct) {
  if (band.empty()) throw DimensionError("normalize_band: empty plane");
  if (!(pct > 0.0 && pct <= 100.0))
    throw ValueError("normalize_band: percentile must lie in (0, 100]");
  const double divisor = percentile(band.values(), pct);
  if (!(divisor > 0.0))
    throw InputError("normalize_band: percentile value is not positive, band is degenerate");
  ImagePlane out(band.height(), band.width());
  for (size_t i = 0; i < band.size(); ++i) {
    out.values()[i] = std::clamp(band.values()[i] / divisor, 0.0, 1.0);
  }
  return out;
}

std::vector<int> tile_positions(int len, int tile, int overlap) {
  if (tile < 1) throw ValueError("tile_positions: tile must be positive");
  if (overlap < 0 || overlap >= tile) throw ValueError("tile_positions: bad overlap");
  std::vector<int> ps;
  const int stride = tile - overlap;
  for (int p = 0;; p += stride) {
    if (p + tile >= len) {
      const int last = std::max(0, len - tile);
      if (ps.empty() || ps.back() != last) ps.push_back(last);
      break;
    }
    ps.push_back(p);
  }
  return ps;
}

ImagePlane tile_and_stitch(const ImagePlane& img, const ClassMaskStack* masks,
                           Generator<float>& gen, int tile, int overlap) {
  if (tile < 8 || tile % 8 != 0)
    throw ValueError("tile_and_stitch: tile must be a positive multiple of 8");
  if (overlap < 0 || overlap >= tile / 2)
    throw ValueError("tile_and_stitch: overlap must lie in [0, tile/2)");
  const int h = img.height(), w = img.width();
  if (h < 2 || w < 2) throw DimensionError("tile_and_stitch: image too small to pad");
  const bool cond = gen.config().mode == GanMode::kCGan;
  if (cond) {
    if (!masks) throw InputError("tile_and_stitch: conditioned generator requires masks");
    if (masks->height() != h || masks->width() != w)
      throw DimensionError("tile_and_stitch: mask resolution differs from the image");
  }
  const int classes = cond ? static_cast<int>(masks->num_classes()) : 0;

  const auto ys = tile_positions(std::max(h, tile), tile, overlap);
  const auto xs = tile_positions(std::max(w, tile), tile, overlap);
  const auto wy = feather(tile, overlap, ys.size() == 1);
  const auto wx = feather(tile, overlap, xs.size() == 1);

  ImagePlane acc(h, w, RangeTag::kSigned);
  ImagePlane wsum(h, w);
  Tensor<float> x(1, 1, tile, tile);
  Tensor<float> m(1, std::max(classes, 1), tile, tile);  // unused when unconditioned
  for (int py : ys) {
    for (int px : xs) {
      for (int i = 0; i < tile; ++i) {
        for (int j = 0; j < tile; ++j) {
          x.chan(0, 0)[static_cast<long>(i) * tile + j] =
              static_cast<float>(sample_reflect(img, py + i, px + j));
        }
      }
      if (cond) {
        for (int c = 0; c < classes; ++c) {
          for (int i = 0; i < tile; ++i) {
            for (int j = 0; j < tile; ++j) {
              m.chan(0, c)[static_cast<long>(i) * tile + j] = static_cast<float>(
                  sample_reflect(masks->planes[static_cast<size_t>(c)], py + i, px + j));
            }
          }
        }
      }
      const Tensor<float> y = gen.forward(x, cond ? &m : nullptr, Mode::kEval);
      for (int i = 0; i < tile && py + i < h; ++i) {
        for (int j = 0; j < tile && px + j < w; ++j) {
          const double wt = wy[static_cast<size_t>(i)] * wx[static_cast<size_t>(j)];
          acc.at(py + i, px + j) += wt * y.chan(0, 0)[static_cast<long>(i) * tile + j];
          wsum.at(py + i, px + j) += wt;
        }
      }
    }
  }
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) acc.at(i, j) /= wsum.at(i, j);
  }
  return acc;
}

ClassMaskStack load_mask_spec(const std::string& path) {
  const Json j = load_json_file(path);
  if (!j.is_object()) throw ConfigError("mask spec must be a JSON object: " + path);
  const auto dir = fs::path(path).parent_path();
  const auto resolve = [&](const std::string& rel) {
    fs::path p(rel);
    return p.is_absolute() ? p.string() : (dir / p).string();
  };
  try {
    const auto classes = j.at("classes").get<std::vector<std::string>>();
    if (classes.empty()) throw ConfigError("mask spec lists no classes: " + path);
    if (j.contains("mask") == j.contains("mask_planes"))
      throw ConfigError("mask spec needs exactly one of mask or mask_planes: " + path);
    if (j.contains("mask"))
      return read_mask_indexed(resolve(j.at("mask").get<std::string>()), classes);
    std::vector<std::string> paths;
    for (const auto& rel : j.at("mask_planes").get<std::vector<std::string>>())
      paths.push_back(resolve(rel));
    return read_mask_planes(paths, classes);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("mask spec structure error in " + path + ": " + e.what());
  }
}

Generator<float> load_generator(const std::string& checkpoint_path,
                                std::vector<std::string>* classes_out) {
  const auto ck = CheckpointFile::open(checkpoint_path);
  const Json& h = ck.header();
  if (!h.contains("gen"))
    throw IoError("checkpoint header lacks a generator section: " + checkpoint_path);
  GeneratorConfig cfg = h.at("gen").get<GeneratorConfig>();
  cfg.validate();
  Generator<float> gen(cfg);
  for (auto& p : gen.params()) {
    const auto& blob = ck.blob("gen/" + p.name);
    if (blob.size() != p.value->size())
      throw IoError("checkpoint blob size mismatch for gen/" + p.name + ": " + checkpoint_path);
    p.value->values().assign(blob.begin(), blob.end());
  }
  if (classes_out) {
    if (!h.contains("classes"))
      throw IoError("checkpoint header lacks the class list: " + checkpoint_path);
    *classes_out = h.at("classes").get<std::vector<std::string>>();
  }
  return gen;
}

InferResult infer(const std::string& band_path, const std::string& mask_path,
                  const std::string& checkpoint_path, const std::string& out_path,
                  const InferOptions& opt) {
  opt.validate();
  std::vector<std::string> classes;
  Generator<float> gen = load_generator(checkpoint_path, &classes);
  const bool cond = gen.config().mode == GanMode::kCGan;

  const ImagePlane band = read_gray(band_path);
  ClassMaskStack masks;
  if (cond) {
    if (mask_path.empty()) throw InputError("infer: conditioned checkpoint requires masks");
    masks = load_mask_spec(mask_path);
    if (masks.classes != classes)
      throw ConfigError("infer: mask classes do not match the checkpoint class order");
  }

  InferResult res;
  const double divisor = percentile(band.values(), opt.percentile);
  res.divisor = divisor;
  const ImagePlane unit = normalize_band(band, opt.percentile);
  const ImagePlane x = unit.to_signed();
  res.tiles_y = static_cast<int>(tile_positions(std::max(band.height(), opt.tile), opt.tile, opt.overlap).size());
  res.tiles_x = static_cast<int>(tile_positions(std::max(band.width(), opt.tile), opt.tile, opt.overlap).size());

  const auto t0 = std::chrono::steady_clock::now();
  ImagePlane sr = tile_and_stitch(x, cond ? &masks : nullptr, gen, opt.tile, opt.overlap);
  const auto t1 = std::chrono::steady_clock::now();
  res.seconds = std::chrono::duration<double>(t1 - t0).count();
  res.megapixels = band.size() / 1e6;

  res.sr = sr.to_unit();
  res.sr.clamp_to_range();
  if (fs::path(out_path).extension() == ".pfm") {
    write_pfm(res.sr, out_path);
  } else {
    write_pgm16(res.sr, out_path);
  }

  Json side{{"band", band_path},
            {"checkpoint", checkpoint_path},
            {"checkpoint_fnv1a64", hex64(fnv1a64_file(checkpoint_path))},
            {"mode", gan_mode_name(gen.config().mode)},
            {"height", band.height()},
            {"width", band.width()},
            {"tile", opt.tile},
            {"overlap", opt.overlap},
            {"tiles_y", res.tiles_y},
            {"tiles_x", res.tiles_x},
            {"percentile", opt.percentile},
            {"divisor", res.divisor},
            {"seconds", res.seconds},
            {"megapixels", res.megapixels},
            {"mpx_per_second", res.seconds > 0.0 ? res.megapixels / res.seconds : 0.0}};
  save_json_file(side, out_path + ".json");
  return res;
}

}  // namespace irsr
