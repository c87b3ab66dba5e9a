#include "irsr/image_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>

#include "irsr/errors.hpp"

namespace irsr {
namespace {

// PNM header token reader: skips whitespace and '#' comment lines.
std::string next_token(std::istream& is) {
  std::string tok;
  int ch;
  while ((ch = is.get()) != EOF) {
    if (ch == '#') {
      while ((ch = is.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (!std::isspace(ch)) {
      tok.push_back(static_cast<char>(ch));
      while ((ch = is.get()) != EOF && !std::isspace(ch) && ch != '#') {
        tok.push_back(static_cast<char>(ch));
      }
      if (ch == '#') is.unget();
      return tok;
    }
  }
  throw IoError("pnm: truncated header");
}

int parse_int(std::istream& is, const char* what) {
  const std::string tok = next_token(is);
  try {
    size_t pos = 0;
    const long v = std::stol(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return static_cast<int>(v);
  } catch (const std::exception&) {
    throw IoError(std::string("pnm: bad ") + what + " field '" + tok + "'");
  }
}

struct PnmHeader {
  std::string magic;
  int width = 0;
  int height = 0;
  int maxval = 0;
};

PnmHeader read_pnm_header(std::istream& is) {
  PnmHeader h;
  h.magic = next_token(is);
  h.width = parse_int(is, "width");
  h.height = parse_int(is, "height");
  if (h.width <= 0 || h.height <= 0) throw IoError("pnm: non-positive dimensions");
  if (h.magic == "P5" || h.magic == "P6") {
    h.maxval = parse_int(is, "maxval");
    if (h.maxval <= 0 || h.maxval > 65535) throw IoError("pnm: unsupported maxval");
  }
  return h;
}

std::vector<double> read_samples(std::istream& is, size_t count, int maxval) {
  std::vector<double> out(count);
  const double inv = 1.0 / maxval;
  if (maxval < 256) {
    std::vector<uint8_t> raw(count);
    is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(count));
    if (static_cast<size_t>(is.gcount()) != count) throw IoError("pnm: truncated pixel data");
    for (size_t i = 0; i < count; ++i) out[i] = raw[i] * inv;
  } else {
    // 16-bit PNM samples are big-endian.
    std::vector<uint8_t> raw(count * 2);
    is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(count * 2));
    if (static_cast<size_t>(is.gcount()) != count * 2) throw IoError("pnm: truncated pixel data");
    for (size_t i = 0; i < count; ++i) {
      const unsigned v = (static_cast<unsigned>(raw[2 * i]) << 8) | raw[2 * i + 1];
      out[i] = v * inv;
    }
  }
  return out;
}

ImagePlane read_pfm(std::istream& is) {
  const std::string magic = next_token(is);
  if (magic != "Pf") throw IoError("pfm: color PFM not supported for grayscale bands");
  const int w = parse_int(is, "width");
  const int h = parse_int(is, "height");
  if (w <= 0 || h <= 0) throw IoError("pfm: non-positive dimensions");
  const std::string scale_tok = next_token(is);
  double scale = 0.0;
  try {
    scale = std::stod(scale_tok);
  } catch (const std::exception&) {
    throw IoError("pfm: bad scale field");
  }
  if (scale == 0.0) throw IoError("pfm: zero scale");
  const bool little = scale < 0.0;
  const size_t count = static_cast<size_t>(w) * h;
  std::vector<uint8_t> raw(count * 4);
  is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<size_t>(is.gcount()) != raw.size()) throw IoError("pfm: truncated pixel data");

  ImagePlane img(h, w, RangeTag::kUnit);
  // PFM rows run bottom-to-top.
  for (int i = 0; i < h; ++i) {
    const int src_row = h - 1 - i;
    for (int j = 0; j < w; ++j) {
      uint8_t b[4];
      std::memcpy(b, raw.data() + (static_cast<size_t>(src_row) * w + j) * 4, 4);
      if (!little) std::swap(b[0], b[3]), std::swap(b[1], b[2]);
      float f;
      std::memcpy(&f, b, 4);
      img.at(i, j) = static_cast<double>(f);
    }
  }
  return img;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open for reading: " + path);
  return is;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open for writing: " + path);
  return os;
}

uint16_t quantize(double v, int maxval) {
  if (v < 0.0) v = 0.0;
  if (v > 1.0) v = 1.0;
  const double q = v * maxval + 0.5;
  const int iv = static_cast<int>(q);
  return static_cast<uint16_t>(iv > maxval ? maxval : iv);
}

void write_pnm_gray(const ImagePlane& img, const std::string& path, int maxval) {
  img.require_range(RangeTag::kUnit, "write_pgm");
  auto os = open_out(path);
  os << "P5\n" << img.width() << " " << img.height() << "\n" << maxval << "\n";
  if (maxval < 256) {
    std::vector<uint8_t> raw(img.size());
    for (size_t i = 0; i < img.size(); ++i)
      raw[i] = static_cast<uint8_t>(quantize(img.values()[i], maxval));
    os.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  } else {
    std::vector<uint8_t> raw(img.size() * 2);
    for (size_t i = 0; i < img.size(); ++i) {
      const uint16_t v = quantize(img.values()[i], maxval);
      raw[2 * i] = static_cast<uint8_t>(v >> 8);
      raw[2 * i + 1] = static_cast<uint8_t>(v & 0xff);
    }
    os.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  }
  if (!os) throw IoError("write failed: " + path);
}

void write_pnm_color(const ColorImage& img, const std::string& path, int maxval) {
  img.validate();
  auto os = open_out(path);
  os << "P6\n" << img.width() << " " << img.height() << "\n" << maxval << "\n";
  const size_t px = static_cast<size_t>(img.height()) * img.width();
  const int bytes = maxval < 256 ? 1 : 2;
  std::vector<uint8_t> raw(px * 3 * bytes);
  for (size_t i = 0; i < px; ++i) {
    for (int c = 0; c < 3; ++c) {
      const uint16_t v = quantize(img.ch[c].values()[i], maxval);
      if (bytes == 1) {
        raw[i * 3 + c] = static_cast<uint8_t>(v);
      } else {
        raw[(i * 3 + c) * 2] = static_cast<uint8_t>(v >> 8);
        raw[(i * 3 + c) * 2 + 1] = static_cast<uint8_t>(v & 0xff);
      }
    }
  }
  os.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!os) throw IoError("write failed: " + path);
}

}  // namespace

ImagePlane read_gray(const std::string& path) {
  auto is = open_in(path);
  const int c0 = is.peek();
  if (c0 != 'P') throw IoError("unrecognized image format: " + path);
  is.get();
  const int c1 = is.peek();
  is.unget();
  if (c1 == 'f' || c1 == 'F') return read_pfm(is);

  const PnmHeader h = read_pnm_header(is);
  if (h.magic != "P5") throw IoError("expected grayscale PGM, got " + h.magic + ": " + path);
  const auto samples = read_samples(is, static_cast<size_t>(h.width) * h.height, h.maxval);
  ImagePlane img(h.height, h.width, RangeTag::kUnit);
  img.values() = samples;
  return img;
}

ColorImage read_color(const std::string& path) {
  auto is = open_in(path);
  const PnmHeader h = read_pnm_header(is);
  if (h.magic != "P6") throw IoError("expected color PPM, got " + h.magic + ": " + path);
  const size_t px = static_cast<size_t>(h.width) * h.height;
  const auto samples = read_samples(is, px * 3, h.maxval);
  ColorImage img;
  for (int c = 0; c < 3; ++c) img.ch[c] = ImagePlane(h.height, h.width, RangeTag::kUnit);
  for (size_t i = 0; i < px; ++i) {
    for (int c = 0; c < 3; ++c) img.ch[c].values()[i] = samples[i * 3 + c];
  }
  return img;
}

void write_pgm8(const ImagePlane& img, const std::string& path) { write_pnm_gray(img, path, 255); }
void write_pgm16(const ImagePlane& img, const std::string& path) {
  write_pnm_gray(img, path, 65535);
}
void write_ppm8(const ColorImage& img, const std::string& path) { write_pnm_color(img, path, 255); }
void write_ppm16(const ColorImage& img, const std::string& path) {
  write_pnm_color(img, path, 65535);
}

void write_pfm(const ImagePlane& img, const std::string& path) {
  img.require_range(RangeTag::kUnit, "write_pfm");
  auto os = open_out(path);
  const bool little = std::endian::native == std::endian::little;
  os << "Pf\n" << img.width() << " " << img.height() << "\n" << (little ? "-1.0" : "1.0") << "\n";
  std::vector<uint8_t> raw(img.size() * 4);
  for (int i = 0; i < img.height(); ++i) {
    const int dst_row = img.height() - 1 - i;
    for (int j = 0; j < img.width(); ++j) {
      const float f = static_cast<float>(img.at(i, j));
      std::memcpy(raw.data() + (static_cast<size_t>(dst_row) * img.width() + j) * 4, &f, 4);
    }
  }
  os.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!os) throw IoError("write failed: " + path);
}

ClassMaskStack read_mask_indexed(const std::string& path,
                                 const std::vector<std::string>& classes) {
  if (classes.empty()) throw ConfigError("read_mask_indexed: empty class list");
  auto is = open_in(path);
  const PnmHeader h = read_pnm_header(is);
  if (h.magic != "P5") throw IoError("indexed mask must be a PGM: " + path);
  const size_t px = static_cast<size_t>(h.width) * h.height;
  std::vector<uint8_t> raw;
  if (h.maxval < 256) {
    raw.resize(px);
    is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(px));
    if (static_cast<size_t>(is.gcount()) != px) throw IoError("mask: truncated pixel data");
  } else {
    throw IoError("indexed mask must be 8-bit: " + path);
  }

  ClassMaskStack m;
  m.classes = classes;
  m.planes.assign(classes.size(), ImagePlane(h.height, h.width, RangeTag::kUnit));
  for (size_t i = 0; i < px; ++i) {
    const unsigned k = raw[i];
    if (k >= classes.size())
      throw InputError("mask: class index " + std::to_string(k) + " out of range in " + path);
    m.planes[k].values()[i] = 1.0;
  }
  return m;
}

ClassMaskStack read_mask_planes(const std::vector<std::string>& paths,
                                const std::vector<std::string>& classes) {
  if (paths.size() != classes.size())
    throw ConfigError("read_mask_planes: path count differs from class count");
  ClassMaskStack m;
  m.classes = classes;
  for (const auto& p : paths) {
    ImagePlane plane = read_gray(p);
    for (auto& v : plane.values()) v = v >= 0.5 ? 1.0 : 0.0;
    m.planes.push_back(std::move(plane));
  }
  m.validate();
  return m;
}

void write_mask_indexed(const ClassMaskStack& masks, const std::string& path) {
  masks.validate();
  if (masks.classes.size() > 255) throw ConfigError("write_mask_indexed: too many classes");
  auto os = open_out(path);
  os << "P5\n" << masks.width() << " " << masks.height() << "\n255\n";
  const size_t px = static_cast<size_t>(masks.width()) * masks.height();
  std::vector<uint8_t> raw(px, 0);
  for (size_t k = 0; k < masks.planes.size(); ++k) {
    for (size_t i = 0; i < px; ++i) {
      if (masks.planes[k].values()[i] == 1.0) raw[i] = static_cast<uint8_t>(k);
    }
  }
  os.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!os) throw IoError("write failed: " + path);
}

}  // namespace irsr
