#include <cstdio>
#include <filesystem>
#include <functional>

#include "doctest.h"
#include "irsr/nn/feature_extractor.hpp"

using namespace irsr;

namespace {

Tensor<double> randn(int n, int c, int h, int w, Rng& rng) {
  Tensor<double> t(n, c, h, w);
  for (auto& v : t.values()) v = rng.normal();
  return t;
}

}  // namespace

TEST_CASE("extractor is deterministic for a fixed spec") {
  FeatureExtractorSpec spec;
  auto a = FeatureExtractor<float>::random_init(spec);
  auto b = FeatureExtractor<float>::random_init(spec);
  CHECK(a.fingerprint() == b.fingerprint());

  Rng rng(7);
  Tensor<float> x(1, 1, 16, 16);
  for (auto& v : x.values()) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  const auto fa = a.forward(x);
  const auto fb = b.forward(x);
  REQUIRE(fa.same_shape(fb));
  for (size_t i = 0; i < fa.size(); ++i) CHECK(fa.values()[i] == fb.values()[i]);

  FeatureExtractorSpec other;
  other.seed = spec.seed + 1;
  CHECK(FeatureExtractor<float>::random_init(other).fingerprint() != a.fingerprint());
}

TEST_CASE("extractor reduces spatial resolution through interior pools") {
  FeatureExtractorSpec spec;  // pools after convs 1 and 2
  auto fx = FeatureExtractor<float>::random_init(spec);
  Tensor<float> x(2, 1, 32, 32);
  const auto f = fx.forward(x);
  CHECK(f.n() == 2);
  CHECK(f.c() == 32);
  CHECK(f.h() == 8);
  CHECK(f.w() == 8);
}

TEST_CASE("extractor save/load round trip preserves weights exactly") {
  FeatureExtractorSpec spec;
  spec.channels = {4, 6};
  spec.pool_after = {1, 0};
  spec.seed = 99;
  auto fx = FeatureExtractor<float>::random_init(spec);
  const auto path = (std::filesystem::temp_directory_path() / "fx_test.bin").string();
  fx.save(path);
  auto back = FeatureExtractor<float>::load(path);
  CHECK(back.fingerprint() == fx.fingerprint());
  CHECK(back.spec().channels == spec.channels);
  CHECK(back.spec().pool_after == spec.pool_after);

  Rng rng(8);
  Tensor<float> x(1, 1, 12, 12);
  for (auto& v : x.values()) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  const auto fa = fx.forward(x);
  const auto fb = back.forward(x);
  for (size_t i = 0; i < fa.size(); ++i) CHECK(fa.values()[i] == fb.values()[i]);
  std::remove(path.c_str());
}

TEST_CASE("extractor load rejects corrupt files") {
  const auto path = (std::filesystem::temp_directory_path() / "fx_bad.bin").string();
  {
    std::ofstream os(path, std::ios::binary);
    os << "IRSRFEX1";  // magic only, truncated body
  }
  CHECK_THROWS_AS(FeatureExtractor<float>::load(path), IoError);
  {
    std::ofstream os(path, std::ios::binary);
    os << "NOTAFILE" << std::string(64, '\0');
  }
  CHECK_THROWS_AS(FeatureExtractor<float>::load(path), IoError);
  std::remove(path.c_str());
  CHECK_THROWS_AS(FeatureExtractor<float>::load("/nonexistent/fx.bin"), IoError);
}

TEST_CASE("extractor input gradient passes finite differences") {
  FeatureExtractorSpec spec;
  spec.channels = {3, 4};
  spec.pool_after = {1, 0};
  spec.seed = 5;
  auto fx = FeatureExtractor<double>::random_init(spec);
  Rng rng(9);
  auto x = randn(1, 1, 6, 6, rng);
  const auto f0 = fx.forward(x);
  const auto probe = randn(f0.n(), f0.c(), f0.h(), f0.w(), rng);

  auto loss = [&] {
    const auto f = fx.forward(x);
    double acc = 0.0;
    for (size_t i = 0; i < f.size(); ++i) acc += f.values()[i] * probe.values()[i];
    return acc;
  };
  loss();
  const auto dx = fx.backward_to_input(probe);
  const double h = 1e-5;
  for (size_t i = 0; i < x.size(); ++i) {
    const double keep = x.values()[i];
    x.values()[i] = keep + h;
    const double up = loss();
    x.values()[i] = keep - h;
    const double dn = loss();
    x.values()[i] = keep;
    const double num = (up - dn) / (2.0 * h);
    CHECK(std::abs(num - dx.values()[i]) <=
          1e-8 + 1e-5 * std::max(std::abs(num), std::abs(dx.values()[i])));
  }
}

TEST_CASE("extractor spec validation") {
  FeatureExtractorSpec bad;
  bad.channels = {};
  bad.pool_after = {};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = FeatureExtractorSpec{};
  bad.pool_after = {1};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = FeatureExtractorSpec{};
  bad.channels = {4, 0, 4};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}
