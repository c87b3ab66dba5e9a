#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "irsr/image.hpp"
#include "irsr/rng.hpp"

namespace irsr {

// One source record: a color image plus its class annotation, given either
// as a single indexed map or as one binary plane per class.
struct ManifestItem {
  std::string image;
  std::string mask_indexed;
  std::vector<std::string> mask_planes;
};

// JSON manifest listing the class order and the items of a dataset split.
// Relative paths resolve against data_root (the manifest's directory when
// data_root is empty).
struct Manifest {
  std::vector<std::string> classes;
  std::vector<ManifestItem> items;
  std::string root;

  static Manifest load(const std::string& path, const std::string& data_root = "");
  void validate() const;
  std::string resolve(const std::string& rel) const;
};

struct TrainItem {
  ColorImage image;
  ClassMaskStack masks;
};

// Fully materialized split; sources are small enough to hold in memory.
struct TrainingSet {
  std::vector<std::string> classes;
  std::vector<TrainItem> items;

  static TrainingSet load(const Manifest& manifest);
  void validate() const;
};

struct PatchWindow {
  int row = 0;
  int col = 0;
  int size = 0;
};

// Uniform over all valid top-left corners; draws row then column.
PatchWindow sample_window(Rng& rng, int height, int width, int size);

ImagePlane crop_plane(const ImagePlane& img, const PatchWindow& win);
ClassMaskStack crop_masks(const ClassMaskStack& masks, const PatchWindow& win);

// Epoch-shuffled batch index stream. Every epoch is a fresh permutation of
// the dataset (the first included); a trailing batch shorter than
// batch_size is dropped. State is exposed for checkpointing.
class EpochIterator {
 public:
  EpochIterator(size_t count, int batch_size);

  std::vector<size_t> next(Rng& rng);

  size_t count() const { return count_; }
  int batch_size() const { return batch_; }
  size_t cursor() const { return cursor_; }
  long epoch() const { return epoch_; }
  const std::vector<size_t>& permutation() const { return perm_; }
  void restore(std::vector<size_t> perm, size_t cursor, long epoch);

 private:
  size_t count_ = 0;
  int batch_ = 0;
  std::vector<size_t> perm_;
  size_t cursor_ = 0;
  long epoch_ = -1;  // becomes 0 on the first shuffle
};

}  // namespace irsr
