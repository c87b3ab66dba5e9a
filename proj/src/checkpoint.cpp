#include "irsr/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "irsr/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint container assumes a little-endian host");

namespace irsr {
namespace {

template <typename T>
void write_pod(std::ofstream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& is, const std::string& path) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw IoError("checkpoint truncated: " + path);
  return v;
}

}  // namespace

void CheckpointWriter::add_blob(const std::string& name, const float* data, size_t count) {
  for (const auto& b : blobs_) {
    if (b.first == name) throw ValueError("checkpoint: duplicate blob name " + name);
  }
  blobs_.emplace_back(name, std::vector<float>(data, data + count));
}

void CheckpointWriter::add_blob(const std::string& name, const std::vector<float>& values) {
  add_blob(name, values.data(), values.size());
}

void CheckpointWriter::write(const std::string& path) const {
  Json header = header_;
  Json manifest = Json::array();
  for (const auto& [name, data] : blobs_) {
    manifest.push_back(Json{{"name", name}, {"count", data.size()}});
  }
  header["blobs"] = std::move(manifest);
  const std::string text = header.dump();

  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write checkpoint: " + path);
  os.write(kCheckpointMagic, 8);
  write_pod(os, kCheckpointVersion);
  write_pod(os, static_cast<uint64_t>(text.size()));
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& [name, data] : blobs_) {
    os.write(reinterpret_cast<const char*>(data.data()),
             static_cast<std::streamsize>(data.size() * sizeof(float)));
  }
  if (!os) throw IoError("write failure: " + path);
}

CheckpointFile CheckpointFile::open(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint: " + path);

  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kCheckpointMagic, 8) != 0)
    throw IoError("not a checkpoint file: " + path);
  const auto version = read_pod<uint32_t>(is, path);
  if (version != kCheckpointVersion)
    throw IoError("unsupported checkpoint version " + std::to_string(version) + ": " + path);

  const auto header_len = read_pod<uint64_t>(is, path);
  std::string text(header_len, '\0');
  is.read(text.data(), static_cast<std::streamsize>(header_len));
  if (!is) throw IoError("checkpoint truncated: " + path);

  CheckpointFile ck;
  try {
    ck.header_ = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("checkpoint header unreadable: " + path + ": " + e.what());
  }
  const auto it = ck.header_.find("blobs");
  if (it == ck.header_.end() || !it->is_array())
    throw IoError("checkpoint header lacks a blob manifest: " + path);

  for (const auto& entry : *it) {
    std::string name;
    uint64_t count = 0;
    try {
      name = entry.at("name").get<std::string>();
      count = entry.at("count").get<uint64_t>();
    } catch (const nlohmann::json::exception&) {
      throw IoError("checkpoint blob manifest malformed: " + path);
    }
    if (ck.blobs_.count(name)) throw IoError("checkpoint has duplicate blob " + name);
    std::vector<float> data(count);
    is.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(count * sizeof(float)));
    if (!is) throw IoError("checkpoint truncated in blob " + name + ": " + path);
    ck.blobs_.emplace(name, std::move(data));
    ck.order_.push_back(name);
  }
  is.peek();
  if (!is.eof()) throw IoError("checkpoint has trailing bytes: " + path);
  return ck;
}

const std::vector<float>& CheckpointFile::blob(const std::string& name) const {
  const auto it = blobs_.find(name);
  if (it == blobs_.end()) throw IoError("checkpoint lacks blob " + name);
  return it->second;
}

}  // namespace irsr
