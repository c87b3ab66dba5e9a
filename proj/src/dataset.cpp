#include "irsr/dataset.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "json.hpp"

#include "irsr/errors.hpp"
#include "irsr/image_io.hpp"

namespace irsr {

Manifest Manifest::load(const std::string& path, const std::string& data_root) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open manifest: " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("manifest parse failure in " + path + ": " + e.what());
  }

  Manifest m;
  m.root = data_root.empty() ? std::filesystem::path(path).parent_path().string() : data_root;
  try {
    m.classes = j.at("classes").get<std::vector<std::string>>();
    for (const auto& it : j.at("items")) {
      ManifestItem item;
      item.image = it.at("image").get<std::string>();
      if (it.contains("mask")) item.mask_indexed = it["mask"].get<std::string>();
      if (it.contains("mask_planes"))
        item.mask_planes = it["mask_planes"].get<std::vector<std::string>>();
      m.items.push_back(std::move(item));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("manifest structure invalid in " + path + ": " + e.what());
  }
  m.validate();
  return m;
}

void Manifest::validate() const {
  if (classes.empty()) throw ConfigError("manifest: empty class list");
  std::set<std::string> uniq(classes.begin(), classes.end());
  if (uniq.size() != classes.size()) throw ConfigError("manifest: duplicate class names");
  if (items.empty()) throw ConfigError("manifest: no items");
  for (const auto& it : items) {
    if (it.image.empty()) throw ConfigError("manifest: item without image path");
    const bool has_idx = !it.mask_indexed.empty();
    const bool has_pl = !it.mask_planes.empty();
    if (has_idx == has_pl)
      throw ConfigError("manifest: item needs exactly one of mask / mask_planes: " + it.image);
    if (has_pl && it.mask_planes.size() != classes.size())
      throw ConfigError("manifest: mask_planes count differs from class count: " + it.image);
  }
}

std::string Manifest::resolve(const std::string& rel) const {
  const std::filesystem::path p(rel);
  if (p.is_absolute() || root.empty()) return rel;
  return (std::filesystem::path(root) / p).string();
}

TrainingSet TrainingSet::load(const Manifest& manifest) {
  manifest.validate();
  TrainingSet set;
  set.classes = manifest.classes;
  for (const auto& it : manifest.items) {
    TrainItem item;
    item.image = read_color(manifest.resolve(it.image));
    if (!it.mask_indexed.empty()) {
      item.masks = read_mask_indexed(manifest.resolve(it.mask_indexed), manifest.classes);
    } else {
      std::vector<std::string> paths;
      for (const auto& p : it.mask_planes) paths.push_back(manifest.resolve(p));
      item.masks = read_mask_planes(paths, manifest.classes);
    }
    if (item.masks.height() != item.image.height() || item.masks.width() != item.image.width())
      throw DimensionError("dataset: mask size differs from image size for " + it.image);
    set.items.push_back(std::move(item));
  }
  set.validate();
  return set;
}

void TrainingSet::validate() const {
  if (items.empty()) throw ConfigError("dataset: no items");
  for (const auto& it : items) {
    it.image.validate();
    it.masks.validate();
    if (it.masks.classes != classes) throw ConfigError("dataset: item class order mismatch");
  }
}

PatchWindow sample_window(Rng& rng, int height, int width, int size) {
  if (size <= 0) throw ValueError("sample_window: non-positive size");
  if (height < size || width < size)
    throw DimensionError("sample_window: image smaller than patch");
  PatchWindow w;
  w.size = size;
  w.row = static_cast<int>(rng.uniform_int(0, height - size));
  w.col = static_cast<int>(rng.uniform_int(0, width - size));
  return w;
}

ImagePlane crop_plane(const ImagePlane& img, const PatchWindow& win) {
  if (win.row < 0 || win.col < 0 || win.row + win.size > img.height() ||
      win.col + win.size > img.width())
    throw DimensionError("crop_plane: window outside image");
  ImagePlane out(win.size, win.size, img.range());
  for (int i = 0; i < win.size; ++i) {
    for (int j = 0; j < win.size; ++j) out.at(i, j) = img.at(win.row + i, win.col + j);
  }
  return out;
}

ClassMaskStack crop_masks(const ClassMaskStack& masks, const PatchWindow& win) {
  ClassMaskStack out;
  out.classes = masks.classes;
  for (const auto& p : masks.planes) out.planes.push_back(crop_plane(p, win));
  return out;
}

EpochIterator::EpochIterator(size_t count, int batch_size) : count_(count), batch_(batch_size) {
  if (count == 0) throw ConfigError("EpochIterator: empty dataset");
  if (batch_size < 1) throw ConfigError("EpochIterator: batch size must be >= 1");
  if (static_cast<size_t>(batch_size) > count)
    throw ConfigError("EpochIterator: batch size exceeds dataset size");
  perm_.resize(count);
  for (size_t i = 0; i < count; ++i) perm_[i] = i;
  cursor_ = count;  // trigger a shuffle on first use
}

std::vector<size_t> EpochIterator::next(Rng& rng) {
  if (cursor_ + static_cast<size_t>(batch_) > count_) {
    rng.shuffle(perm_);
    cursor_ = 0;
    ++epoch_;
  }
  std::vector<size_t> batch(perm_.begin() + static_cast<long>(cursor_),
                            perm_.begin() + static_cast<long>(cursor_) + batch_);
  cursor_ += static_cast<size_t>(batch_);
  return batch;
}

void EpochIterator::restore(std::vector<size_t> perm, size_t cursor, long epoch) {
  if (perm.size() != count_) throw ConfigError("EpochIterator: restored permutation size mismatch");
  std::vector<size_t> sorted = perm;
  std::sort(sorted.begin(), sorted.end());
  for (size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i] != i) throw ConfigError("EpochIterator: restored state is not a permutation");
  }
  if (cursor > count_) throw ConfigError("EpochIterator: restored cursor out of range");
  perm_ = std::move(perm);
  cursor_ = cursor;
  epoch_ = epoch;
}

}  // namespace irsr
