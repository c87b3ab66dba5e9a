#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "irsr/rng.hpp"

using irsr::Rng;

TEST_CASE("rng: same seed gives same sequence") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) {
    CHECK(a.uniform() == b.uniform());
  }
}

TEST_CASE("rng: serialize mid-stream restores the exact continuation") {
  Rng a(7);
  for (int i = 0; i < 137; ++i) a.uniform();
  const std::string state = a.serialize();

  std::vector<double> expect;
  for (int i = 0; i < 50; ++i) expect.push_back(a.uniform());

  Rng b(999);
  b.deserialize(state);
  for (int i = 0; i < 50; ++i) {
    CHECK(b.uniform() == expect[i]);
  }
}

TEST_CASE("rng: serialize covers mixed draw kinds") {
  Rng a(5);
  a.normal();
  a.uniform_int(0, 100);
  const std::string state = a.serialize();
  const double next = a.normal(1.0, 2.0);
  Rng b(1);
  b.deserialize(state);
  CHECK(b.normal(1.0, 2.0) == next);
}

TEST_CASE("rng: uniform stays in [0,1) and covers the range") {
  Rng r(3);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double v = r.uniform();
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(lo < 0.01);
  CHECK(hi > 0.99);
}

TEST_CASE("rng: uniform_int is inclusive and hits both endpoints") {
  Rng r(11);
  bool saw_lo = false, saw_hi = false;
  for (int i = 0; i < 5000; ++i) {
    const int64_t v = r.uniform_int(-3, 4);
    CHECK(v >= -3);
    CHECK(v <= 4);
    saw_lo = saw_lo || v == -3;
    saw_hi = saw_hi || v == 4;
  }
  CHECK(saw_lo);
  CHECK(saw_hi);
  CHECK(r.uniform_int(9, 9) == 9);
}

TEST_CASE("rng: normal has sane first moments") {
  Rng r(17);
  double sum = 0.0, sumsq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double v = r.normal();
    sum += v;
    sumsq += v * v;
  }
  CHECK(std::abs(sum / n) < 0.03);
  CHECK(std::abs(sumsq / n - 1.0) < 0.05);
}

TEST_CASE("rng: shuffle yields a permutation and depends on the seed") {
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  auto a = v, b = v;
  Rng r1(1), r2(2);
  r1.shuffle(a);
  r2.shuffle(b);
  auto sa = a, sb = b;
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  CHECK(sa == v);
  CHECK(sb == v);
  CHECK(a != b);
}

TEST_CASE("rng: bad arguments throw") {
  Rng r(1);
  CHECK_THROWS_AS(r.uniform(2.0, 1.0), irsr::ValueError);
  CHECK_THROWS_AS(r.uniform_int(5, 4), irsr::ValueError);
  CHECK_THROWS_AS(r.deserialize("not a state"), irsr::IoError);
}
