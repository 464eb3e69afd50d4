#pragma once

#include <cmath>

#include "rotlab/geometry.hpp"

namespace rotlab {

// Neumaier compensated sum
struct Accumulator {
  double s = 0.0, c = 0.0;
  void add(double v) {
    double t = s + v;
    if (std::abs(s) >= std::abs(v))
      c += (s - t) + v;
    else
      c += (v - t) + s;
    s = t;
  }
  double value() const { return s + c; }
};

struct VecAccumulator {
  Accumulator x, y;
  void add(geometry::Vec2 v) { x.add(v.x); y.add(v.y); }
  geometry::Vec2 value() const { return {x.value(), y.value()}; }
};

}  // namespace rotlab
