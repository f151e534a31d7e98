#pragma once

#include <cmath>

#include "coords.hpp"
#include "fields.hpp"
#include "points.hpp"
#include "rng.hpp"

namespace testutil {

using palatini::ext::ScalarField;
using palatini::jet::PointValues;

inline double central_diff(const ScalarField& f, const PointValues& p, int id,
                           double h = 1e-6) {
  PointValues lo = p, hi = p;
  lo[id] -= h;
  hi[id] += h;
  return (f.value(hi) - f.value(lo)) / (2.0 * h);
}

inline bool close(double a, double b, double atol, double rtol = 0.0) {
  return std::abs(a - b) <= atol + rtol * std::max(std::abs(a), std::abs(b));
}

}  // namespace testutil
