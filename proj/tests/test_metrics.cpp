#include <cmath>
#include <limits>

#include "doctest.h"
#include "irsr/degrade.hpp"
#include "irsr/errors.hpp"
#include "irsr/metrics.hpp"

using namespace irsr;

namespace {

double clip01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

// Deterministic structured test images; the expectations below were
// computed once with an independent reference implementation and frozen.
ImagePlane ref_a() {
  ImagePlane p(40, 40);
  for (int i = 0; i < 40; ++i) {
    for (int j = 0; j < 40; ++j) {
      p.at(i, j) = clip01(0.5 + 0.25 * std::sin(0.37 * i + 0.61 * j) +
                          0.2 * std::cos(std::fmod(0.11 * i * j, 6.0)));
    }
  }
  return p;
}

ImagePlane ref_b() {
  const auto a = ref_a();
  ImagePlane p(40, 40);
  for (int i = 0; i < 40; ++i) {
    for (int j = 0; j < 40; ++j) {
      p.at(i, j) = clip01(0.85 * a.at(i, j) + 0.07 + 0.05 * std::sin(0.9 * i - 0.4 * j));
    }
  }
  return p;
}

ImagePlane ref_c() {
  const auto a = ref_a();
  ImagePlane p(40, 40);
  for (int i = 0; i < 40; ++i) {
    for (int j = 0; j < 40; ++j) {
      p.at(i, j) = clip01(a.at(i, j) + 0.02 * std::cos(1.7 * i + 0.3 * j));
    }
  }
  return p;
}

}  // namespace

TEST_CASE("ssim matches the frozen reference values") {
  const auto a = ref_a();
  CHECK(std::abs(ssim(a, ref_b()) - 0.970673560565) < 1e-4);
  CHECK(std::abs(ssim(a, ref_c()) - 0.997502896098) < 1e-4);
}

TEST_CASE("psnr matches the frozen reference value") {
  CHECK(std::abs(psnr(ref_a(), ref_b()) - 26.097875435907) < 1e-4);
}

TEST_CASE("ssim basic properties") {
  const auto a = ref_a();
  const auto b = ref_b();
  CHECK(std::abs(ssim(a, a) - 1.0) < 1e-12);
  CHECK(ssim(a, b) == ssim(b, a));
  CHECK(ssim(a, b) > 0.0);
  CHECK(ssim(a, b) < 1.0);
  // The gentler perturbation scores higher.
  CHECK(ssim(a, ref_c()) > ssim(a, b));
}

TEST_CASE("psnr basic properties") {
  const auto a = ref_a();
  CHECK(std::isinf(psnr(a, a)));
  CHECK(psnr(a, ref_c()) > psnr(a, ref_b()));

  ImagePlane x(4, 4), y(4, 4);
  y.values()[0] = 0.5;  // single error of 0.5 over 16 pixels
  const double expect = 10.0 * std::log10(16.0 / 0.25);
  CHECK(psnr(x, y) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("mse is the mean squared difference") {
  ImagePlane a(2, 2), b(2, 2);
  a.values() = {0.0, 1.0, 0.5, 0.25};
  b.values() = {0.5, 1.0, 0.0, 0.25};
  CHECK(mse(a, b) == doctest::Approx(0.125).epsilon(1e-15));
}

TEST_CASE("laplacian energy on hand-checked patterns") {
  ImagePlane flat = ImagePlane::full(5, 7, 0.25);
  CHECK(laplacian_energy(flat) == 0.0);

  ImagePlane ramp(6, 6);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) ramp.at(i, j) = 0.1 * i;
  }
  CHECK(laplacian_energy(ramp) == doctest::Approx(0.0).epsilon(1e-15));

  ImagePlane spike(3, 3);
  spike.at(1, 1) = 1.0;
  CHECK(laplacian_energy(spike) == 16.0);
}

TEST_CASE("blurring lowers laplacian energy") {
  const auto a = ref_a();
  const auto blurred = gaussian_blur(a, 1.5);
  CHECK(laplacian_energy(blurred) < 0.5 * laplacian_energy(a));
}

TEST_CASE("percentile interpolates linearly between order statistics") {
  CHECK(percentile({4.0, 1.0, 3.0, 2.0}, 50.0) == 2.5);
  CHECK(percentile({4.0, 1.0, 3.0, 2.0}, 0.0) == 1.0);
  CHECK(percentile({4.0, 1.0, 3.0, 2.0}, 100.0) == 4.0);
  CHECK(percentile({4.0, 1.0, 3.0, 2.0}, 25.0) == doctest::Approx(1.75).epsilon(1e-15));

  std::vector<double> ramp;
  for (int i = 0; i <= 10; ++i) ramp.push_back(static_cast<double>(i));
  CHECK(percentile(ramp, 90.0) == doctest::Approx(9.0).epsilon(1e-15));
  CHECK(percentile({7.5}, 13.0) == 7.5);
}

TEST_CASE("metric input validation") {
  ImagePlane a(12, 12), b(12, 13);
  CHECK_THROWS_AS(mse(a, b), DimensionError);
  CHECK_THROWS_AS(psnr(a, b), DimensionError);
  CHECK_THROWS_AS(ssim(a, b), DimensionError);

  ImagePlane small(8, 8);
  CHECK_THROWS_AS(ssim(small, small), DimensionError);
  CHECK_THROWS_AS(psnr(a, a, 0.0), ValueError);
  CHECK_THROWS_AS(ssim(a, a, -1.0), ValueError);

  ImagePlane tiny(2, 5);
  CHECK_THROWS_AS(laplacian_energy(tiny), DimensionError);
  CHECK_THROWS_AS(percentile({}, 50.0), ValueError);
  CHECK_THROWS_AS(percentile({1.0}, -0.1), ValueError);
  CHECK_THROWS_AS(percentile({1.0}, 100.5), ValueError);
}
