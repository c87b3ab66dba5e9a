#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "irsr/image_io.hpp"
#include "irsr/rng.hpp"

using namespace irsr;

namespace {

std::string tmp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

ImagePlane noise_plane(int h, int w, uint64_t seed) {
  Rng rng(seed);
  ImagePlane p(h, w);
  for (auto& v : p.values()) v = rng.uniform();
  return p;
}

}  // namespace

TEST_CASE("pgm16 round trip within quantization error") {
  const auto img = noise_plane(13, 9, 1);
  const auto path = tmp_path("io_a.pgm");
  write_pgm16(img, path);
  const auto back = read_gray(path);
  REQUIRE(back.same_shape(img));
  for (size_t i = 0; i < img.size(); ++i) {
    CHECK(std::abs(back.values()[i] - img.values()[i]) <= 0.5 / 65535 + 1e-12);
  }
  std::remove(path.c_str());
}

TEST_CASE("pgm8 round trip within quantization error") {
  const auto img = noise_plane(6, 21, 2);
  const auto path = tmp_path("io_b.pgm");
  write_pgm8(img, path);
  const auto back = read_gray(path);
  REQUIRE(back.same_shape(img));
  for (size_t i = 0; i < img.size(); ++i) {
    CHECK(std::abs(back.values()[i] - img.values()[i]) <= 0.5 / 255 + 1e-12);
  }
  std::remove(path.c_str());
}

TEST_CASE("pfm round trip is exact at float precision") {
  const auto img = noise_plane(7, 5, 3);
  const auto path = tmp_path("io_c.pfm");
  write_pfm(img, path);
  const auto back = read_gray(path);
  REQUIRE(back.same_shape(img));
  for (size_t i = 0; i < img.size(); ++i) {
    CHECK(back.values()[i] == static_cast<double>(static_cast<float>(img.values()[i])));
  }
  std::remove(path.c_str());
}

TEST_CASE("ppm8 round trip") {
  ColorImage img;
  for (int c = 0; c < 3; ++c) img.ch[c] = noise_plane(4, 4, 10 + c);
  const auto path = tmp_path("io_d.ppm");
  write_ppm8(img, path);
  const auto back = read_color(path);
  for (int c = 0; c < 3; ++c) {
    for (size_t i = 0; i < img.ch[c].size(); ++i) {
      CHECK(std::abs(back.ch[c].values()[i] - img.ch[c].values()[i]) <= 0.5 / 255 + 1e-12);
    }
  }
  std::remove(path.c_str());
}

TEST_CASE("16-bit pgm samples are big-endian") {
  const auto path = tmp_path("io_e.pgm");
  {
    std::ofstream os(path, std::ios::binary);
    os << "P5\n2 1\n65535\n";
    const unsigned char bytes[4] = {0x01, 0x00, 0xff, 0xff};
    os.write(reinterpret_cast<const char*>(bytes), 4);
  }
  const auto img = read_gray(path);
  CHECK(img.at(0, 0) == doctest::Approx(256.0 / 65535).epsilon(1e-12));
  CHECK(img.at(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
  std::remove(path.c_str());
}

TEST_CASE("pgm header comments are skipped") {
  const auto path = tmp_path("io_f.pgm");
  {
    std::ofstream os(path, std::ios::binary);
    os << "P5\n# a comment line\n2 # trailing\n1\n255\n";
    const unsigned char bytes[2] = {0, 255};
    os.write(reinterpret_cast<const char*>(bytes), 2);
  }
  const auto img = read_gray(path);
  CHECK(img.width() == 2);
  CHECK(img.at(0, 1) == doctest::Approx(1.0));
  std::remove(path.c_str());
}

TEST_CASE("indexed mask round trip is exact") {
  ClassMaskStack m;
  m.classes = {"stroma", "epithelium", "other"};
  for (int k = 0; k < 3; ++k) m.planes.emplace_back(8, 8, RangeTag::kUnit);
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) m.planes[(i + j) % 3].at(i, j) = 1.0;
  }
  const auto path = tmp_path("io_g.pgm");
  write_mask_indexed(m, path);
  const auto back = read_mask_indexed(path, m.classes);
  back.validate();
  for (int k = 0; k < 3; ++k) {
    for (size_t i = 0; i < m.planes[k].size(); ++i) {
      CHECK(back.planes[k].values()[i] == m.planes[k].values()[i]);
    }
  }
  std::remove(path.c_str());
}

TEST_CASE("mask planes binarize and validate") {
  const auto p0 = tmp_path("io_h0.pgm");
  const auto p1 = tmp_path("io_h1.pgm");
  ImagePlane a(4, 4), b(4, 4);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      a.at(i, j) = i < 2 ? 0.9 : 0.1;
      b.at(i, j) = i < 2 ? 0.1 : 0.9;
    }
  }
  write_pgm8(a, p0);
  write_pgm8(b, p1);
  const auto m = read_mask_planes({p0, p1}, {"fg", "bg"});
  CHECK(m.planes[0].at(0, 0) == 1.0);
  CHECK(m.planes[0].at(3, 0) == 0.0);
  CHECK(m.planes[1].at(3, 0) == 1.0);
  std::remove(p0.c_str());
  std::remove(p1.c_str());
}

TEST_CASE("io failure taxonomy") {
  CHECK_THROWS_AS(read_gray("/nonexistent/path.pgm"), IoError);

  const auto path = tmp_path("io_i.bin");
  {
    std::ofstream os(path, std::ios::binary);
    os << "JUNKDATA";
  }
  CHECK_THROWS_AS(read_gray(path), IoError);
  std::remove(path.c_str());

  const auto trunc = tmp_path("io_j.pgm");
  {
    std::ofstream os(trunc, std::ios::binary);
    os << "P5\n4 4\n255\n";
    os.put(0);
  }
  CHECK_THROWS_AS(read_gray(trunc), IoError);
  std::remove(trunc.c_str());

  // Indexed mask referencing a class beyond the declared list.
  const auto bad = tmp_path("io_k.pgm");
  {
    std::ofstream os(bad, std::ios::binary);
    os << "P5\n1 1\n255\n";
    os.put(5);
  }
  CHECK_THROWS_AS(read_mask_indexed(bad, {"a", "b"}), InputError);
  std::remove(bad.c_str());
}

TEST_CASE("range tags and conversions") {
  ImagePlane u(2, 2, RangeTag::kUnit);
  u.at(0, 0) = 0.25;
  u.at(1, 1) = 1.0;
  const auto s = u.to_signed();
  CHECK(s.range() == RangeTag::kSigned);
  CHECK(s.at(0, 0) == doctest::Approx(-0.5));
  CHECK(s.at(1, 1) == doctest::Approx(1.0));
  const auto b = s.to_unit();
  CHECK(b.at(0, 0) == doctest::Approx(0.25));
  CHECK_THROWS_AS(s.to_signed(), ValueError);
  CHECK_THROWS_AS(u.to_unit(), ValueError);

  ImagePlane bad(2, 2, RangeTag::kUnit);
  bad.at(0, 0) = 1.5;
  CHECK_FALSE(bad.range_ok());
  bad.clamp_to_range();
  CHECK(bad.range_ok());
}
