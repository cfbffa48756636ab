#pragma once

#include <cstdint>
#include <random>

#include "torsionlab/geometry.hpp"

namespace torsionlab::cli {

/// mt19937_64 with an explicit 53-bit mantissa draw, so samples do not depend
/// on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  Vec2 point(double x0, double x1, double y0, double y1) {
    const double x = uniform(x0, x1);
    return {x, uniform(y0, y1)};
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace torsionlab::cli
