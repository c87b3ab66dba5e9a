#include "irsr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "irsr/errors.hpp"

namespace irsr {
namespace {

// Symmetric (edge-repeating) fold, the border rule of the SSIM window:
// indices -1, -2 map to 0, 1 and n, n+1 map to n-1, n-2.
int symmetric_index(int i, int n) {
  while (i < 0 || i >= n) {
    if (i < 0) i = -1 - i;
    if (i >= n) i = 2 * n - 1 - i;
  }
  return i;
}

constexpr int kSsimRadius = 5;
constexpr double kSsimSigma = 1.5;

std::vector<double> ssim_window() {
  std::vector<double> w(2 * kSsimRadius + 1);
  double sum = 0.0;
  for (int k = -kSsimRadius; k <= kSsimRadius; ++k) {
    w[static_cast<size_t>(k + kSsimRadius)] =
        std::exp(-(k * k) / (2.0 * kSsimSigma * kSsimSigma));
    sum += w[static_cast<size_t>(k + kSsimRadius)];
  }
  for (auto& x : w) x /= sum;
  return w;
}

ImagePlane filter_symmetric(const ImagePlane& img, const std::vector<double>& w) {
  const int r = static_cast<int>(w.size() / 2);
  const int h = img.height(), wd = img.width();
  ImagePlane rows(h, wd, img.range());
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < wd; ++j) {
      double s = 0.0;
      for (int k = -r; k <= r; ++k)
        s += w[static_cast<size_t>(k + r)] * img.at(i, symmetric_index(j + k, wd));
      rows.at(i, j) = s;
    }
  }
  ImagePlane out(h, wd, img.range());
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < wd; ++j) {
      double s = 0.0;
      for (int k = -r; k <= r; ++k)
        s += w[static_cast<size_t>(k + r)] * rows.at(symmetric_index(i + k, h), j);
      out.at(i, j) = s;
    }
  }
  return out;
}

}  // namespace

double mse(const ImagePlane& a, const ImagePlane& b) {
  if (!a.same_shape(b)) throw DimensionError("mse: shape mismatch");
  if (a.empty()) throw DimensionError("mse: empty input");
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a.values()[i] - b.values()[i];
    s += d * d;
  }
  return s / static_cast<double>(a.size());
}

double psnr(const ImagePlane& a, const ImagePlane& b, double peak) {
  if (!(peak > 0.0)) throw ValueError("psnr: peak must be positive");
  const double m = mse(a, b);
  if (m == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / m);
}

double ssim(const ImagePlane& a, const ImagePlane& b, double data_range) {
  if (!(data_range > 0.0)) throw ValueError("ssim: data_range must be positive");
  if (!a.same_shape(b)) throw DimensionError("ssim: shape mismatch");
  const int h = a.height(), w = a.width();
  const int win = 2 * kSsimRadius + 1;
  if (h < win || w < win) throw DimensionError("ssim: input smaller than the filter window");

  const auto g = ssim_window();
  ImagePlane aa(h, w), bb(h, w), ab(h, w);
  for (size_t i = 0; i < a.size(); ++i) {
    aa.values()[i] = a.values()[i] * a.values()[i];
    bb.values()[i] = b.values()[i] * b.values()[i];
    ab.values()[i] = a.values()[i] * b.values()[i];
  }
  const auto ua = filter_symmetric(a, g);
  const auto ub = filter_symmetric(b, g);
  const auto uaa = filter_symmetric(aa, g);
  const auto ubb = filter_symmetric(bb, g);
  const auto uab = filter_symmetric(ab, g);

  const double c1 = (0.01 * data_range) * (0.01 * data_range);
  const double c2 = (0.03 * data_range) * (0.03 * data_range);

  double sum = 0.0;
  for (int i = kSsimRadius; i < h - kSsimRadius; ++i) {
    for (int j = kSsimRadius; j < w - kSsimRadius; ++j) {
      const double ma = ua.at(i, j), mb = ub.at(i, j);
      const double va = uaa.at(i, j) - ma * ma;
      const double vb = ubb.at(i, j) - mb * mb;
      const double vab = uab.at(i, j) - ma * mb;
      sum += ((2.0 * ma * mb + c1) * (2.0 * vab + c2)) /
             ((ma * ma + mb * mb + c1) * (va + vb + c2));
    }
  }
  return sum / (static_cast<double>(h - win + 1) * static_cast<double>(w - win + 1));
}

double laplacian_energy(const ImagePlane& img) {
  const int h = img.height(), w = img.width();
  if (h < 3 || w < 3) throw DimensionError("laplacian_energy: input smaller than 3x3");
  double sum = 0.0;
  for (int i = 1; i < h - 1; ++i) {
    for (int j = 1; j < w - 1; ++j) {
      const double v = 4.0 * img.at(i, j) - img.at(i - 1, j) - img.at(i + 1, j) -
                       img.at(i, j - 1) - img.at(i, j + 1);
      sum += v * v;
    }
  }
  return sum / (static_cast<double>(h - 2) * static_cast<double>(w - 2));
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw ValueError("percentile: empty input");
  if (!(p >= 0.0 && p <= 100.0)) throw ValueError("percentile: p outside [0, 100]");
  std::sort(values.begin(), values.end());
  const double rank = p / 100.0 * static_cast<double>(values.size() - 1);
  const size_t lo = static_cast<size_t>(rank);
  const size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

}  // namespace irsr
