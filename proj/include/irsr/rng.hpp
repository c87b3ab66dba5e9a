#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "irsr/errors.hpp"

namespace irsr {

// Deterministic random source. All draw algorithms are implemented here
// instead of using std::*_distribution so that (a) sequences are identical
// across standard library implementations and (b) the full sampler state is
// exactly the engine state, which makes serialize/restore lossless. The
// std distributions keep hidden carry-over state (normal_distribution caches
// a spare variate) that would survive outside any snapshot.
class Rng {
 public:
  explicit Rng(uint64_t seed = 1) : eng_(seed) {}

  // Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) {
    if (!(lo <= hi)) throw ValueError("uniform: lo > hi");
    return lo + (hi - lo) * uniform();
  }

  // Uniform integer in [lo, hi], inclusive, via rejection (unbiased).
  int64_t uniform_int(int64_t lo, int64_t hi) {
    if (lo > hi) throw ValueError("uniform_int: lo > hi");
    const uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<int64_t>(eng_());  // full 64-bit range
    const uint64_t limit = std::numeric_limits<uint64_t>::max() - std::numeric_limits<uint64_t>::max() % span;
    uint64_t r;
    do {
      r = eng_();
    } while (r >= limit);
    return lo + static_cast<int64_t>(r % span);
  }

  // Box-Muller, both variates drawn fresh per call and the spare discarded,
  // so the call is stateless beyond the engine.
  double normal(double mean = 0.0, double stddev = 1.0) {
    double u1 = uniform();
    const double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * r * std::cos(2.0 * M_PI * u2);
  }

  // Fisher-Yates; pinned here rather than std::shuffle, whose draw pattern
  // is implementation-defined.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      const size_t j = static_cast<size_t>(uniform_int(0, static_cast<int64_t>(i) - 1));
      std::swap(v[i - 1], v[j]);
    }
  }

  std::string serialize() const {
    std::ostringstream os;
    os << eng_;
    return os.str();
  }

  void deserialize(const std::string& s) {
    std::istringstream is(s);
    is >> eng_;
    if (is.fail()) throw IoError("rng state: malformed serialization");
  }

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace irsr
