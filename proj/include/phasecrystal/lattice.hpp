#pragma once

// Single-particle rotating-frame lattice fields, Fock-space operators built
// from displacement matrix elements, and the geometric-phase primitive.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <vector>

#include "phasecrystal/grid.hpp"
#include "phasecrystal/model.hpp"
#include "phasecrystal/special_functions.hpp"

namespace phasecrystal::lattice {

using cplx = std::complex<double>;

/// Effective time-independent field (K/q0) sum_j cos(X cos(2 pi j/q0) + P sin(2 pi j/q0)).
/// For q0 = 4 this reduces to (K/2)(cos X + cos P).
inline double h_rwa_field(const ModelParams& params, const PhasePoint& pt) {
  double acc = 0.0;
  for (int j = 1; j <= params.q0; ++j) {
    double ang = 2.0 * specfun::pi * j / params.q0;
    acc += std::cos(pt.X * std::cos(ang) + pt.P * std::sin(ang));
  }
  return params.K / params.q0 * acc;
}

/// Field sampled on a rectangular grid, scaled by the kick strength K.
inline Grid2D render_lattice(const ModelParams& params, double x_lo, double x_hi, double p_lo,
                             double p_hi, std::size_t nx, std::size_t np) {
  params.validate();
  Grid2D g;
  g.xs = linspace(x_lo, x_hi, nx);
  g.ys = linspace(p_lo, p_hi, np);
  g.values.resize(nx * np);
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < (long long)nx; ++i)
    for (std::size_t j = 0; j < np; ++j)
      g.values[i * np + j] = h_rwa_field(params, {g.xs[i], g.ys[j]}) / params.K;
  return g;
}

/// Fock-basis matrix element <l| exp(i[X cos t + P sin t]) |k> with [X,P] = i lambda.
/// For l <= k this is the Laguerre closed form; l > k follows from unitarity,
/// <l|M(t)|k> = conj(<k|M(t + pi)|l>).
inline cplx displacement_element(int l, int k, double lambda, double t) {
  if (l > k) return std::conj(displacement_element(k, l, lambda, t + specfun::pi));
  double logmag = -lambda / 4.0 + 0.5 * (specfun::log_factorial(l) - specfun::log_factorial(k)) +
                  0.5 * (k - l) * std::log(lambda / 2.0);
  double mag = std::exp(logmag) * specfun::laguerre_gen(l, k - l, lambda / 2.0);
  return std::polar(1.0, (k - l) * (specfun::pi / 2.0 - t)) * mag;
}

/// Dense operator on the truncated number basis.
struct FockOperator {
  int cutoff = 0;
  Eigen::MatrixXcd matrix;
  bool hermitian = false;

  bool check_hermitian(double tol = 1e-12) const {
    return (matrix - matrix.adjoint()).cwiseAbs().maxCoeff() <= tol;
  }
};

/// (K/2)(cos X + cos P) on an M-dimensional number basis, assembled from
/// displacement matrix elements and explicitly symmetrized.
inline FockOperator build_hsq_fock(const ModelParams& params, int cutoff) {
  params.validate();
  if (cutoff < 16) throw ValidationError("build_hsq_fock: cutoff must be >= 16");
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(cutoff, cutoff);
  for (int l = 0; l < cutoff; ++l)
    for (int k = l; k < cutoff; ++k) {
      if ((k - l) % 2) continue;  // cos X and cos P couple only even level differences
      cplx cx = 0.5 * (displacement_element(l, k, params.lambda, 0.0) +
                       std::conj(displacement_element(l, k, params.lambda, specfun::pi)));
      cplx cp = 0.5 * (displacement_element(l, k, params.lambda, specfun::pi / 2.0) +
                       std::conj(displacement_element(l, k, params.lambda, -specfun::pi / 2.0)));
      cplx v = params.K / 2.0 * (cx + cp);
      H(l, k) = v;
      H(k, l) = std::conj(v);
    }
  H = 0.5 * (H + Eigen::MatrixXcd(H.adjoint()));
  return {cutoff, std::move(H), true};
}

/// Coherent-state coefficients e^{-|a|^2/2} a^n / sqrt(n!), log-space.
inline Eigen::VectorXcd coherent_vector(cplx alpha, int cutoff) {
  Eigen::VectorXcd c(cutoff);
  double a = std::abs(alpha), th = std::arg(alpha);
  for (int n = 0; n < cutoff; ++n) {
    double logmag = -0.5 * a * a - 0.5 * specfun::log_factorial(n);
    if (a > 0) logmag += n * std::log(a);
    c(n) = (a == 0.0 && n > 0) ? cplx(0) : std::polar(std::exp(logmag), n * th);
  }
  return c;
}

/// <alpha|Op|alpha> for alpha = (X + iP)/sqrt(2 lambda). Requires the coherent
/// state to be essentially contained in the truncated basis.
inline cplx coherent_expectation(const FockOperator& op, cplx alpha, double lambda) {
  (void)lambda;  // alpha already carries the scaling; kept for interface symmetry
  Eigen::VectorXcd c = coherent_vector(alpha, op.cutoff);
  double norm2 = c.squaredNorm();
  if (norm2 < 1.0 - 1e-8)
    throw CutoffTooSmall("coherent_expectation: coherent-state norm in truncated basis = " +
                         std::to_string(norm2));
  return (c.adjoint() * op.matrix * c)(0);
}

inline cplx alpha_from_phase_point(const PhasePoint& pt, double lambda) {
  return cplx(pt.X, pt.P) / std::sqrt(2.0 * lambda);
}

/// Enclosed area of the displacement triangle: S = Im[xi2 conj(xi1)] / 2.
/// The composite displacement picks up the phase factor e^{i S / lambda}.
inline double geometric_phase(cplx xi1, cplx xi2) {
  return 0.5 * std::imag(xi2 * std::conj(xi1));
}

}  // namespace phasecrystal::lattice
