#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "irsr/config.hpp"

namespace irsr {

// Single-file checkpoint container: an 8-byte magic, a format version, a
// key-ordered JSON header, then the named float32 blobs back to back in
// header-manifest order. Everything is little-endian and free of
// timestamps, so identical state produces identical bytes.
inline constexpr char kCheckpointMagic[9] = "IRSRCKPT";
inline constexpr uint32_t kCheckpointVersion = 1;

class CheckpointWriter {
 public:
  Json& header() { return header_; }

  void add_blob(const std::string& name, const float* data, size_t count);
  void add_blob(const std::string& name, const std::vector<float>& values);

  void write(const std::string& path) const;

 private:
  Json header_ = Json::object();
  std::vector<std::pair<std::string, std::vector<float>>> blobs_;
};

class CheckpointFile {
 public:
  static CheckpointFile open(const std::string& path);

  const Json& header() const { return header_; }
  bool has_blob(const std::string& name) const { return blobs_.count(name) != 0; }
  const std::vector<float>& blob(const std::string& name) const;
  const std::vector<std::string>& blob_names() const { return order_; }

 private:
  Json header_;
  std::map<std::string, std::vector<float>> blobs_;
  std::vector<std::string> order_;
};

}  // namespace irsr
