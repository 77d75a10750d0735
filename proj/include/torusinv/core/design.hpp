#pragma once

#include <array>

namespace torusinv {

/// A design point Z = (t, x): observation time, location on [0,1)^d, and
/// the sensor that recorded it (-1 when the design has no sensors).
struct DesignPoint {
  double t = 0.0;
  std::array<double, 2> x{0.0, 0.0};
  int sensor = -1;
};

}  // namespace torusinv
