#pragma once

// Quasienergy band structure of the square phase-space lattice: Harper-type
// Bloch matrices, the transfer-matrix secular cross-check, the butterfly,
// Chern numbers on the magnetic Brillouin zone, and Husimi Q-functions of
// quasienergy eigenstates in the delta-comb (kq) basis.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <optional>
#include <vector>

#include "phasecrystal/errors.hpp"
#include "phasecrystal/grid.hpp"
#include "phasecrystal/special_functions.hpp"

namespace phasecrystal::bands {

using cplx = std::complex<double>;

/// Reduced flux lambda / 2 pi = p / q.
struct RationalFlux {
  int p = 1;
  int q = 2;

  double lambda() const { return 2.0 * specfun::pi * p / q; }

  void validate() const {
    if (p < 1 || q < 1) throw ValidationError("RationalFlux: p and q must be positive");
    if (std::gcd(p, q) != 1) throw ValidationError("RationalFlux: p/q must be a reduced fraction");
  }
};

/// Bloch labels on the zone 0 <= kX < 1, 0 <= kP < 1/p.
struct BlochK {
  double kX = 0.0;
  double kP = 0.0;
};

namespace detail {

// Bloch matrix in terms of the secular angles th1 = lambda kX, th2 = lambda kP.
// The site offsets lambda m are folded mod 2 pi exactly through (p m) mod q,
// so fluxes p/q and (p+q)/q produce bit-identical matrices: the 2 pi
// periodicity of the spectrum in lambda holds exactly, not just to rounding.
inline Eigen::MatrixXcd harper_angles(int p, int q, double th1, double th2) {
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(q, q);
  for (int m = 0; m < q; ++m) {
    long long fold = (1LL * p * m) % q;
    H(m, m) += 2.0 * std::cos(th1 + 2.0 * specfun::pi * double(fold) / double(q));
  }
  for (int m = 0; m < q; ++m) {
    int mp = (m + 1) % q;
    H(m, mp) += std::exp(cplx(0.0, th2));
    H(mp, m) += std::exp(cplx(0.0, -th2));
  }
  return H;
}

}  // namespace detail

/// q x q cyclic Bloch matrix whose eigenvalues e give quasienergies E = e K/4:
/// row m reads 2 cos(lambda(kX+m)) u_m + e^{-i lambda kP} u_{m-1}
///           + e^{+i lambda kP} u_{m+1} = e u_m with u_{m+q} = u_m.
inline Eigen::MatrixXcd harper_matrix(const RationalFlux& flux, const BlochK& k) {
  flux.validate();
  double lam = flux.lambda();
  return detail::harper_angles(flux.p, flux.q, lam * k.kX, lam * k.kP);
}

namespace detail {

inline double secular_residual_angles(int p, int q, double th1, double th2, double e) {
  long double twopi = 2.0L * (long double)specfun::pi;
  long double t11 = 1, t12 = 0, t21 = 0, t22 = 1;
  for (int j = 1; j <= q; ++j) {
    long double d = (long double)e - 2.0L * cosl(twopi * ((1LL * p * j) % q) / q);
    long double n11 = d * t11 - t21, n12 = d * t12 - t22;
    t21 = t11;
    t22 = t12;
    t11 = n11;
    t12 = n12;
  }
  long double lhs = cosl((long double)q * th1) + cosl((long double)q * th2);
  return (double)fabsl(lhs - 1.0L - 0.5L * (t11 + t22));
}

}  // namespace detail

/// Residual of the secular polynomial at scaled energy e = 4E/K:
/// cos(q lam kX) + cos(q lam kP) - 1 - Tr prod_j [[e - 2cos(j lam), -1],[1,0]] / 2.
/// Evaluated in extended precision; the transfer product is the independent
/// route against which eigensolver output is checked.
inline double secular_residual(const RationalFlux& flux, const BlochK& k, double e) {
  double lam = flux.lambda();
  return detail::secular_residual_angles(flux.p, flux.q, lam * k.kX, lam * k.kP, e);
}

namespace detail {

inline Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solve(const RationalFlux& flux,
                                                             const BlochK& k) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(harper_matrix(flux, k));
  if (es.info() != Eigen::Success) throw Error("harper eigensolver failed");
  return es;
}

inline std::vector<double> quasienergies_angles(int p, int q, double th1, double th2, double K) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(harper_angles(p, q, th1, th2));
  if (es.info() != Eigen::Success) throw Error("harper eigensolver failed");
  std::vector<double> out(q);
  for (int b = 0; b < q; ++b) {
    double e = es.eigenvalues()(b);
    double r = secular_residual_angles(p, q, th1, th2, e);
    if (r > 1e-6) throw SecularMismatch("quasienergies: secular residual " + std::to_string(r));
    out[b] = e * K / 4.0;
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace detail

/// The q quasienergies at k, ascending, cross-validated against the secular
/// polynomial. Throws SecularMismatch above 1e-6 residual.
inline std::vector<double> quasienergies(const RationalFlux& flux, const BlochK& k, double K) {
  flux.validate();
  double lam = flux.lambda();
  return detail::quasienergies_angles(flux.p, flux.q, lam * k.kX, lam * k.kP, K);
}

/// Quasienergies over a rectangular Bloch grid.
struct BandSpectrum {
  RationalFlux flux;
  double K = 0.0;
  std::vector<double> kXs;
  std::vector<double> kPs;
  std::vector<double> energies;  // [i * kPs.size() * q + j * q + b], ascending in b

  double at(std::size_t i, std::size_t j, int b) const {
    return energies[(i * kPs.size() + j) * flux.q + b];
  }
};

inline BandSpectrum band_spectrum(const RationalFlux& flux, double K, std::size_t n_kX,
                                  std::size_t n_kP) {
  flux.validate();
  BandSpectrum s;
  s.flux = flux;
  s.K = K;
  // half-open sampling of the zone; the wrap points repeat the k = 0 values
  s.kXs.resize(n_kX);
  s.kPs.resize(n_kP);
  for (std::size_t i = 0; i < n_kX; ++i) s.kXs[i] = double(i) / double(n_kX);
  for (std::size_t j = 0; j < n_kP; ++j) s.kPs[j] = double(j) / (double(n_kP) * flux.p);
  s.energies.resize(n_kX * n_kP * flux.q);
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < (long long)n_kX; ++i)
    for (std::size_t j = 0; j < n_kP; ++j) {
      auto e = quasienergies(flux, {s.kXs[i], s.kPs[j]}, K);
      std::copy(e.begin(), e.end(), s.energies.begin() + (i * n_kP + j) * flux.q);
    }
  return s;
}

/// One band interval of the butterfly.
struct BandInterval {
  int p = 0, q = 0;
  int band = 0;
  double e_min = 0.0, e_max = 0.0;
};

/// Band intervals of one flux, sampled uniformly in the secular phases
/// (q lam kX, q lam kP) over [0, pi]^2. This grid contains both band-edge
/// extremes (the secular left side reaches +-2 there), and the angle
/// parameterization only sees p mod q, so fluxes lambda and lambda + 2 pi
/// give bit-identical intervals.
inline std::vector<BandInterval> band_intervals(const RationalFlux& flux, double K,
                                                int samples_per_axis = 9) {
  flux.validate();
  if (samples_per_axis < 2) throw ValidationError("band_intervals: need >= 2 samples per axis");
  int q = flux.q;
  std::vector<double> lo(q, 1e300), hi(q, -1e300);
  for (int ia = 0; ia < samples_per_axis; ++ia)
    for (int ja = 0; ja < samples_per_axis; ++ja) {
      double th1 = specfun::pi * ia / ((samples_per_axis - 1) * double(q));
      double th2 = specfun::pi * ja / ((samples_per_axis - 1) * double(q));
      auto e = detail::quasienergies_angles(flux.p, q, th1, th2, K);
      for (int b = 0; b < q; ++b) {
        lo[b] = std::min(lo[b], e[b]);
        hi[b] = std::max(hi[b], e[b]);
      }
    }
  std::vector<BandInterval> out;
  for (int b = 0; b < q; ++b) out.push_back({flux.p, q, b, lo[b], hi[b]});
  return out;
}

/// Band intervals for every reduced p/q with q <= q_max.
inline std::vector<BandInterval> butterfly(int q_max, double K, int samples_per_axis = 9) {
  if (q_max < 2) throw ValidationError("butterfly: q_max must be >= 2");
  std::vector<BandInterval> out;
  for (int q = 1; q <= q_max; ++q)
    for (int p = 1; p <= q; ++p) {
      if (std::gcd(p, q) != 1) continue;
      auto iv = band_intervals({p, q}, K, samples_per_axis);
      out.insert(out.end(), iv.begin(), iv.end());
    }
  return out;
}

/// Max over a grid of |E_b(kX, kP) - E_b(kX + q/p mod 1, kP)|: the p-fold
/// degeneracy shift that follows from the translation-operator commutator.
inline double degeneracy_check(const RationalFlux& flux, double K, std::size_t n_kX,
                               std::size_t n_kP) {
  flux.validate();
  double shift = std::fmod(double(flux.q) / flux.p, 1.0);
  double worst = 0.0;
  auto kXs = linspace(0.0, 1.0, n_kX);
  auto kPs = linspace(0.0, 1.0 / flux.p, n_kP);
  for (double kX : kXs)
    for (double kP : kPs) {
      auto e0 = quasienergies(flux, {kX, kP}, K);
      auto e1 = quasienergies(flux, {std::fmod(kX + shift, 1.0), kP}, K);
      for (int b = 0; b < flux.q; ++b) worst = std::max(worst, std::abs(e0[b] - e1[b]));
    }
  return worst;
}

namespace detail {

// Eigenvector frames on the closed Bloch torus. The zone is only
// gauge-periodic: crossing kX -> kX + 1 relabels rows m -> m + 1, crossing
// kP -> kP + 1/p multiplies row m by e^{-i 2 pi m / q}. The two closure maps
// commute only up to a constant phase, so plaquette flux through the zone is
// quantized in units of p/q rather than 1; the integer Chern number is the
// total times q/p.
struct TorusFrames {
  int q, Ng;
  std::vector<Eigen::MatrixXcd> V;  // (Ng+1) x (Ng+1) frames

  const Eigen::MatrixXcd& at(int i, int j) const { return V[i * (Ng + 1) + j]; }
};

inline TorusFrames torus_frames(const RationalFlux& flux, int Ng) {
  TorusFrames F{flux.q, Ng, {}};
  F.V.resize((Ng + 1) * (Ng + 1));
  auto at = [&](int i, int j) -> Eigen::MatrixXcd& { return F.V[i * (Ng + 1) + j]; };
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < Ng; ++i)
    for (int j = 0; j < Ng; ++j) {
      BlochK k{double(i) / Ng, double(j) / (double(Ng) * flux.p)};
      at(i, j) = solve(flux, k).eigenvectors();
    }
  for (int j = 0; j < Ng; ++j) {
    Eigen::MatrixXcd s(flux.q, flux.q);
    for (int m = 0; m < flux.q; ++m) s.row(m) = at(0, j).row((m + 1) % flux.q);
    at(Ng, j) = s;
  }
  for (int i = 0; i <= Ng; ++i) {
    Eigen::MatrixXcd s = at(i, 0);
    for (int m = 0; m < flux.q; ++m)
      s.row(m) *= std::exp(cplx(0.0, -2.0 * specfun::pi * m / flux.q));
    at(i, Ng) = s;
  }
  return F;
}

// Plaquette flux total for the band group [b_lo, b_hi], using determinants of
// overlap matrices between neighbouring frames (single band = 1x1 case).
inline double plaquette_flux_total(const TorusFrames& F, int b_lo, int b_hi) {
  int nb = b_hi - b_lo + 1;
  auto link = [&](const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B) {
    Eigen::MatrixXcd M(nb, nb);
    for (int a = 0; a < nb; ++a)
      for (int c = 0; c < nb; ++c)
        M(a, c) = (A.col(b_lo + a).adjoint() * B.col(b_lo + c))(0);
    return M.determinant();
  };
  double total = 0.0;
  for (int i = 0; i < F.Ng; ++i)
    for (int j = 0; j < F.Ng; ++j) {
      cplx l1 = link(F.at(i, j), F.at(i + 1, j));
      cplx l2 = link(F.at(i + 1, j), F.at(i + 1, j + 1));
      cplx l3 = link(F.at(i + 1, j + 1), F.at(i, j + 1));
      cplx l4 = link(F.at(i, j + 1), F.at(i, j));
      total += std::arg(l1 * l2 * l3 * l4);
    }
  return total / (2.0 * specfun::pi);
}

inline void gap_check(const RationalFlux& flux, int Ng, int b_lo, int b_hi) {
  const double tol = 1e-10;
  for (int i = 0; i < Ng; ++i)
    for (int j = 0; j < Ng; ++j) {
      BlochK k{double(i) / Ng, double(j) / (double(Ng) * flux.p)};
      auto es = solve(flux, k);
      if (b_lo > 0 && es.eigenvalues()(b_lo) - es.eigenvalues()(b_lo - 1) < tol)
        throw GapClosure("chern_number: band touching below band " + std::to_string(b_lo));
      if (b_hi + 1 < flux.q && es.eigenvalues()(b_hi + 1) - es.eigenvalues()(b_hi) < tol)
        throw GapClosure("chern_number: band touching above band " + std::to_string(b_hi));
    }
}

inline int quantized(double c_scaled) {
  int n = (int)std::lround(c_scaled);
  if (std::abs(c_scaled - n) > 0.01)
    throw NonConvergence("chern_number: plaquette total " + std::to_string(c_scaled) +
                         " is not close to an integer; refine the grid");
  return n;
}

}  // namespace detail

/// Chern number of band b (0-based from the bottom), gauge-invariant
/// plaquette sum on an Ng x Ng grid. Requires the band to be isolated at
/// every grid point; a detected touching raises GapClosure.
inline int chern_number(const RationalFlux& flux, int b, double K, int Ng = 24) {
  flux.validate();
  if (Ng < 12) throw ValidationError("chern_number: Ng must be >= 12");
  if (b < 0 || b >= flux.q) throw ValidationError("chern_number: band index out of range");
  detail::gap_check(flux, Ng, b, b);
  auto F = detail::torus_frames(flux, Ng);
  // ascending eigenvalue order = ascending E for K > 0, reversed for K < 0
  int bb = (K >= 0) ? b : flux.q - 1 - b;
  double raw = detail::plaquette_flux_total(F, bb, bb);
  return detail::quantized(raw * flux.q / flux.p);
}

/// Total Chern number of the band multiplet [b_lo, b_hi] via determinants of
/// the overlap matrices; use when bands inside the group touch each other.
inline int chern_multiplet(const RationalFlux& flux, int b_lo, int b_hi, double K, int Ng = 24) {
  flux.validate();
  if (Ng < 12) throw ValidationError("chern_multiplet: Ng must be >= 12");
  if (b_lo < 0 || b_hi >= flux.q || b_lo > b_hi)
    throw ValidationError("chern_multiplet: band range out of range");
  detail::gap_check(flux, Ng, b_lo, b_hi);
  auto F = detail::torus_frames(flux, Ng);
  int lo = (K >= 0) ? b_lo : flux.q - 1 - b_hi;
  int hi = (K >= 0) ? b_hi : flux.q - 1 - b_lo;
  double raw = detail::plaquette_flux_total(F, lo, hi);
  return detail::quantized(raw * flux.q / flux.p);
}

/// Band Chern numbers from the gap relation r = q s_r + p t_r with
/// |t_r| <= q/2: an arithmetic route independent of the plaquette sum.
/// Gaps where t is not unique (even q central gap) make it throw GapClosure.
inline std::vector<int> chern_from_gap_relation(const RationalFlux& flux) {
  flux.validate();
  int q = flux.q, p = flux.p;
  std::vector<int> sigma(q + 1, 0);
  for (int r = 1; r < q; ++r) {
    std::vector<int> hits;
    for (int t = -(q / 2); t <= q / 2; ++t)
      if (((r - p * t) % q + q) % q == 0) hits.push_back(t);
    if (hits.size() != 1)
      throw GapClosure("chern_from_gap_relation: gap label not unique at gap " + std::to_string(r));
    sigma[r] = hits[0];
  }
  std::vector<int> c(q);
  for (int b = 0; b < q; ++b) c[b] = sigma[b + 1] - sigma[b];
  return c;
}

/// Gap labels following the symmetric convention about E = 0: a gap below the
/// zero line is labelled by the sum of band Cherns below it, a gap above by
/// the sum of band Cherns above it.
struct GapLabel {
  int gap = 0;        ///< gap index r, between bands r-1 and r (0-based bands)
  double e_lo = 0.0;  ///< top of the band below, in energy units
  double e_hi = 0.0;  ///< bottom of the band above
  int label = 0;
};

inline std::vector<GapLabel> gap_labels(const RationalFlux& flux, double K,
                                        const std::vector<int>& band_chern, int samples = 17) {
  auto intervals = band_intervals(flux, K, samples);
  std::vector<GapLabel> out;
  for (int r = 1; r < flux.q; ++r) {
    GapLabel g;
    g.gap = r;
    g.e_lo = intervals[r - 1].e_max;
    g.e_hi = intervals[r].e_min;
    double center = 0.5 * (g.e_lo + g.e_hi);
    int below = 0;
    for (int b = 0; b < r; ++b) below += band_chern[b];
    g.label = (center < 0) ? below : -below;  // sum above = -sum below (total is 0)
    out.push_back(g);
  }
  return out;
}

/// Quasienergy eigenstate in the delta-comb basis: coefficients u_m over the
/// q basis functions phi_{(kX+m, kP)}.
struct ZakState {
  RationalFlux flux;
  BlochK k;
  int band = 0;
  Eigen::VectorXcd u;
};

inline ZakState zak_state(const RationalFlux& flux, const BlochK& k, int b, double K) {
  flux.validate();
  if (b < 0 || b >= flux.q) throw ValidationError("zak_state: band index out of range");
  auto es = detail::solve(flux, k);
  int bb = (K >= 0) ? b : flux.q - 1 - b;
  return {flux, k, b, es.eigenvectors().col(bb)};
}

namespace detail {

// <alpha|psi> via the Gaussian-truncated delta-comb sum; window in units of
// sqrt(lambda) around X0.
inline cplx zak_amplitude(const ZakState& st, double X0, double P0, double window) {
  int q = st.flux.q;
  double lam = st.flux.lambda();
  double w = window * std::sqrt(lam);
  cplx acc = 0.0;
  double pref = std::sqrt(lam / q) * std::pow(specfun::pi * lam, -0.25);
  int lmin = (int)std::floor((X0 - w - lam * st.k.kP) * q / (2.0 * specfun::pi));
  int lmax = (int)std::ceil((X0 + w - lam * st.k.kP) * q / (2.0 * specfun::pi));
  for (int l = lmin; l <= lmax; ++l) {
    double Xl = lam * st.k.kP + 2.0 * specfun::pi * l / q;
    double gauss = std::exp(-(Xl - X0) * (Xl - X0) / (2.0 * lam));
    for (int m = 0; m < q; ++m) {
      double phase = 2.0 * specfun::pi * (st.k.kX + m) * l / q - P0 * Xl / lam;
      acc += st.u(m) * std::polar(pref * gauss, phase);
    }
  }
  return acc;
}

}  // namespace detail

/// Husimi Q-function Q(X, P) = |<alpha|psi_{b,k}>|^2 / pi of a quasienergy
/// eigenstate on a rectangular phase-space grid. The delta-comb sum is
/// truncated at |X_l - X| <= 10 sqrt(lambda); the result is validated against
/// a widened window and NonConvergence is raised if it still moves.
inline Grid2D eigenstate_q_function(const RationalFlux& flux, const BlochK& k, int b, double K,
                                    const std::vector<double>& Xs, const std::vector<double>& Ps) {
  ZakState st = zak_state(flux, k, b, K);
  Grid2D g;
  g.xs = Xs;
  g.ys = Ps;
  g.values.resize(Xs.size() * Ps.size());
  double worst = 0.0;
#pragma omp parallel for schedule(static) reduction(max : worst)
  for (long long i = 0; i < (long long)Xs.size(); ++i)
    for (std::size_t j = 0; j < Ps.size(); ++j) {
      cplx a10 = detail::zak_amplitude(st, Xs[i], Ps[j], 10.0);
      cplx a14 = detail::zak_amplitude(st, Xs[i], Ps[j], 14.0);
      worst = std::max(worst, std::abs(a14 - a10));
      g.values[i * Ps.size() + j] = std::norm(a10) / specfun::pi;
    }
  if (worst > 1e-10)
    throw NonConvergence("eigenstate_q_function: delta-comb truncation not converged");
  return g;
}

}  // namespace phasecrystal::bands
