#pragma once

#include <complex>
#include <vector>

#include "phasecrystal/errors.hpp"
#include "phasecrystal/special_functions.hpp"

namespace phasecrystal::detail {

/// In-place radix-2 Cooley-Tukey transform, sum_j x[j] e^{sign i 2 pi jk / N},
/// unnormalized. N must be a power of two.
inline void fft_pow2(std::complex<double>* x, std::size_t n, int sign) {
  if (n == 0 || (n & (n - 1)) != 0) throw ValidationError("fft_pow2: size must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {  // bit reversal
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    double ang = sign * 2.0 * specfun::pi / double(len);
    std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t j = 0; j < len / 2; ++j) {
        auto u = x[i + j];
        auto v = x[i + j + len / 2] * w;
        x[i + j] = u + v;
        x[i + j + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

}  // namespace phasecrystal::detail
