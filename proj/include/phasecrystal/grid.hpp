#pragma once

#include <cstddef>
#include <vector>

#include "phasecrystal/errors.hpp"

namespace phasecrystal {

/// Dense real-valued samples on a rectangular grid, row-major in the first
/// axis: value(i, j) is taken at (xs[i], ys[j]).
struct Grid2D {
  std::vector<double> xs;
  std::vector<double> ys;
  std::vector<double> values;  // size xs.size() * ys.size()

  std::size_t nx() const { return xs.size(); }
  std::size_t ny() const { return ys.size(); }
  double& at(std::size_t i, std::size_t j) { return values[i * ys.size() + j]; }
  double at(std::size_t i, std::size_t j) const { return values[i * ys.size() + j]; }
};

/// Uniformly spaced axis over [lo, hi] with n >= 2 samples, endpoints included.
inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
  if (n < 2) throw ValidationError("linspace: need at least 2 samples per axis");
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = lo + (hi - lo) * double(i) / double(n - 1);
  return v;
}

}  // namespace phasecrystal
