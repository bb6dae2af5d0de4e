#pragma once

// Phase-space interaction engine: quantized phase-space distance, the
// Laguerre-transform map from a real-space potential to U(R_N), closed forms
// for contact and hardcore interactions, overlap integrals for (squeezed)
// coherent states, and the direct/exchange assembly.

#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "phasecrystal/errors.hpp"
#include "phasecrystal/special_functions.hpp"

namespace phasecrystal::interaction {

using cplx = std::complex<double>;

/// Quantized phase-space distance R_N = 2 sqrt(lambda (N + 1/2)).
inline double phase_distance(int N, double lambda) {
  if (N < 0) throw ValidationError("phase_distance: N must be >= 0");
  return 2.0 * std::sqrt(lambda * (N + 0.5));
}

/// Series length that bounds the Poisson overlap tail at distance R.
inline int n_required(double R, double lambda) {
  double z = R * R / (4.0 * lambda);
  return (int)std::ceil(z) + 40 * (int)std::ceil(std::sqrt(std::max(1.0, z))) + 40;
}

/// Eigenstate of the relative-motion mode: R |N> = R_N |N>, with the Hermite
/// wavefunction of the relative coordinate.
struct RelativeState {
  int N = 0;
  double lambda = 1.0;

  double eigenvalue() const { return phase_distance(N, lambda); }

  /// Phi_N(dx) = (2 pi lambda)^{-1/4} (2^N N!)^{-1/2} H_N(xi) e^{-xi^2/2},
  /// xi = dx / sqrt(2 lambda), evaluated with the normalized recurrence.
  double wavefunction(double dx) const {
    double xi = dx / std::sqrt(2.0 * lambda);
    double pref = std::pow(2.0 * specfun::pi * lambda, -0.25);
    double h0 = std::exp(-xi * xi / 2.0);
    if (N == 0) return pref * h0;
    double h1 = std::sqrt(2.0) * xi * h0;
    for (int n = 1; n < N; ++n) {
      double h2 = xi * std::sqrt(2.0 / (n + 1.0)) * h1 - std::sqrt(n / (n + 1.0)) * h0;
      h0 = h1;
      h1 = h2;
    }
    return pref * h1;
  }
};

// ---------------------------------------------------------------------------
// contact interaction V(x) = eps delta(x)
// ---------------------------------------------------------------------------

/// U(R_N) for the contact interaction: zero for odd N, and
/// eps (1+(-1)^N)/(N pi sqrt(2 lambda)) Gamma((N+1)/2)/Gamma(N/2) for even N,
/// with the N = 0 value fixed by the limit N Gamma(N/2) -> 2.
inline double u_contact(double eps, double lambda, int N) {
  if (N < 0) throw ValidationError("u_contact: N must be >= 0");
  if (N % 2 == 1) return 0.0;
  if (N == 0) return eps / std::sqrt(2.0 * specfun::pi * lambda);
  return eps * 2.0 / (double(N) * specfun::pi * std::sqrt(2.0 * lambda)) *
         std::exp(specfun::log_gamma_half_ratio(N));
}

/// Smooth contact potentials: U_c(R) = eps/sqrt(2 pi lambda) e^{-z} I0(z),
/// z = R^2/4 lambda (overflow-free through the scaled Bessel), and U_e = U_c.
inline std::pair<double, double> uc_ue_contact(double eps, double lambda, double R) {
  if (R < 0) throw ValidationError("uc_ue_contact: R must be >= 0");
  double z = R * R / (4.0 * lambda);
  double uc = eps / std::sqrt(2.0 * specfun::pi * lambda) * specfun::bessel_i0_scaled(z);
  return {uc, uc};
}

// ---------------------------------------------------------------------------
// hardcore interaction, core radius a
// ---------------------------------------------------------------------------

namespace detail {

// The summand times 4^{k+l} is the integer A_k A_l (N-k-l)! with
// A_k = N!/(k!(N-2k)!), so for N <= 21 the whole alternating sum fits in
// 128-bit integers and is computed exactly (largest addend ~ 1e34).
inline long double hardcore_sum_exact(int N) {
  int mmax = (N - 1) / 2;
  auto A = [&](int k) {
    __int128 v = 1;
    for (int i = 0; i < 2 * k; ++i) v *= (N - i);  // falling factorial N!/(N-2k)!
    for (int i = 2; i <= k; ++i) v /= i;
    return v;
  };
  auto fact = [](int n) {
    __int128 v = 1;
    for (int i = 2; i <= n; ++i) v *= i;
    return v;
  };
  __int128 acc = 0;
  for (int k = 0; k <= mmax; ++k)
    for (int l = 0; l <= mmax; ++l) {
      __int128 t = A(k) * A(l) * fact(N - k - l);
      for (int i = 0; i < 2 * (2 * mmax - k - l); ++i) t *= 2;  // 4^{2m - k - l}
      acc += ((k + l) % 2) ? -t : t;
    }
  long double s = (long double)acc;
  for (int i = 0; i < 4 * mmax; ++i) s /= 2.0L;  // undo the common 4^{2m}
  return s;
}

}  // namespace detail

/// The displayed double sum for odd N: exact 128-bit integer arithmetic up to
/// N = 21, log-factorial summation with sign tracking beyond. The alternating
/// cancellation grows roughly as 4^N, so the log-space route degrades past
/// N ~ 25 (about 1e-8 relative there); u_hardcore switches to the closed form
/// before that matters.
inline double u_hardcore_sum(double a, double lambda, int N) {
  if (N % 2 != 1) throw ValidationError("u_hardcore_sum: N must be odd");
  int mmax = (N - 1) / 2;
  long double s;
  long double maxlog = 0.0L;
  if (N <= 21) {
    s = detail::hardcore_sum_exact(N);
  } else {
    maxlog = -1e30L;
    std::vector<long double> logs((mmax + 1) * (mmax + 1));
    for (int k = 0; k <= mmax; ++k)
      for (int l = 0; l <= mmax; ++l) {
        long double lm = 2.0L * lgammal(N + 1.0L) + lgammal(N - k - l + 1.0L) -
                         (2 * k + 2 * l) * logl(2.0L) - lgammal(k + 1.0L) - lgammal(l + 1.0L) -
                         lgammal(N - 2 * k + 1.0L) - lgammal(N - 2 * l + 1.0L);
        logs[k * (mmax + 1) + l] = lm;
        maxlog = std::max(maxlog, lm);
      }
    s = 0.0L;
    for (int k = 0; k <= mmax; ++k)
      for (int l = 0; l <= mmax; ++l) {
        long double t = expl(logs[k * (mmax + 1) + l] - maxlog);
        s += ((k + l) % 2) ? -t : t;
      }
  }
  long double lpref = logl((long double)(a * std::sqrt(2.0 * lambda / specfun::pi))) +
                      N * logl(2.0L) - lgammal(N + 1.0L);
  return (double)(s * expl(maxlog + lpref));
}

/// U(R_N) for the hardcore interaction. Odd N carries the value; even N
/// shares it with N+1 (the symmetric and antisymmetric core states are
/// degenerate). The double sum collapses to
///   U(R_{2m+1}) = 2 a sqrt(2 lambda / pi) (2m+1)!! / (2m)!!,
/// which is used verbatim above the cancellation limit of the raw sum.
inline double u_hardcore(double a, double lambda, int N) {
  if (N < 0) throw ValidationError("u_hardcore: N must be >= 0");
  if (N % 2 == 0) return u_hardcore(a, lambda, N + 1);
  if (N <= 21) return u_hardcore_sum(a, lambda, N);
  int m = (N - 1) / 2;
  double logratio = specfun::log_factorial(2 * m + 1) - 2.0 * m * std::log(2.0) -
                    2.0 * specfun::log_factorial(m);
  return 2.0 * a * std::sqrt(2.0 * lambda / specfun::pi) * std::exp(logratio);
}

/// Hardcore smooth potentials from the odd-N series.
struct HardcoreUc {
  double Uc = 0.0;         ///< series with exact U(R_N)
  double Uc_linear = 0.0;  ///< series with the linear approximation 2 a R_N / pi
  double Ue = 0.0;         ///< exactly zero
};

inline double log_poisson(int N, double z) {
  if (z == 0.0) return (N == 0) ? 0.0 : -1e300;
  return N * std::log(z) - z - specfun::log_factorial(N);
}

/// U_c(R) = 2 sum_m U(R_{2m+1}) I_{2m+1}(R) and U_e(R) = 0. m_max <= 0 picks
/// the truncation from the Poisson tail bound.
inline HardcoreUc uc_hardcore(double a, double lambda, double R, int m_max = 0) {
  if (R < 0) throw ValidationError("uc_hardcore: R must be >= 0");
  double z = R * R / (4.0 * lambda);
  if (m_max <= 0) m_max = n_required(R, lambda) / 2 + 1;
  HardcoreUc out;
  for (int m = 0; m <= m_max; ++m) {
    int N = 2 * m + 1;
    double w = std::exp(log_poisson(N, z));
    out.Uc += 2.0 * u_hardcore(a, lambda, N) * w;
    out.Uc_linear += 2.0 * (2.0 * a / specfun::pi) * phase_distance(N, lambda) * w;
  }
  return out;
}

// ---------------------------------------------------------------------------
// overlap integrals
// ---------------------------------------------------------------------------

/// Poisson overlap of two displaced coherent states a distance R apart:
/// I_N = (R^2/4 lambda)^N e^{-R^2/4 lambda} / N!.
inline double overlap_coherent(int N, double lambda, double R) {
  if (N < 0) throw ValidationError("overlap_coherent: N must be >= 0");
  return std::exp(log_poisson(N, R * R / (4.0 * lambda)));
}

/// Squeeze parameters (v, u) of a Gaussian of width parameter beta:
/// v = (sqrt(lambda) beta + 1/(sqrt(lambda) beta))/2, u the same with a minus.
inline std::pair<double, double> squeeze_params(double beta, double lambda) {
  double g = std::sqrt(lambda) * beta;
  return {0.5 * (g + 1.0 / g), 0.5 * (g - 1.0 / g)};
}

/// Overlap |<N|-gamma,-xi>|^2 of a displaced squeezed state with the N-th
/// relative eigenstate; (v, u) must satisfy v^2 - u^2 = 1. Reduces to
/// overlap_coherent at v = 1. The Hermite factor is evaluated with a
/// magnitude-tracked complex recurrence so large N stays finite.
inline double overlap_squeezed(int N, double gamma, double v, double u) {
  if (N < 0) throw ValidationError("overlap_squeezed: N must be >= 0");
  if (std::abs(v * v - u * u - 1.0) > 1e-10)
    throw InvalidSqueeze("overlap_squeezed: v^2 - u^2 = " + std::to_string(v * v - u * u));
  if (std::abs(u) < 1e-14) {  // no squeeze: Poisson with z = gamma^2
    return std::exp(log_poisson(N, gamma * gamma));
  }
  double r = std::log(v + std::sqrt(v * v - 1.0));
  double eith = -u / std::sinh(r);  // +-1 for real squeeze parameters
  cplx z = (gamma * eith * std::sinh(r) - gamma * std::cosh(r)) /
           std::sqrt(cplx(-eith * std::sinh(2.0 * r), 0.0));
  double log_h = 0.0;  // log |H_N(z)| via scaled recurrence
  if (N >= 1) {
    cplx h0 = 1.0, h1 = 2.0 * z;
    double scale = 0.0;
    for (int n = 1; n < N; ++n) {
      cplx h2 = 2.0 * z * h1 - 2.0 * double(n) * h0;
      h0 = h1;
      h1 = h2;
      double m = std::abs(h1);
      if (m > 1e100) {
        h0 /= m;
        h1 /= m;
        scale += std::log(m);
      }
    }
    double m = std::abs(h1);
    if (m == 0.0) return 0.0;
    log_h = std::log(m) + scale;
  }
  double th = std::tanh(r);
  double logI = N * std::log(th / 2.0) - specfun::log_factorial(N) - std::log(std::cosh(r)) +
                2.0 * log_h + (-gamma * gamma + gamma * gamma * eith * th);
  return std::exp(logI);
}

/// Direct and exchange sums U_c = sum U_N I_N, U_e = sum (-1)^N U_N I_N.
inline std::pair<double, double> assemble_uc_ue(const std::vector<double>& U,
                                                const std::vector<double>& I) {
  if (U.size() != I.size()) throw ValidationError("assemble_uc_ue: tables must align in N");
  double uc = 0.0, ue = 0.0;
  for (std::size_t n = 0; n < U.size(); ++n) {
    uc += U[n] * I[n];
    ue += (n % 2) ? -U[n] * I[n] : U[n] * I[n];
  }
  return {uc, ue};
}

// ---------------------------------------------------------------------------
// general potentials through the Laguerre transform
// ---------------------------------------------------------------------------

struct ContactPotential {
  double eps = 1.0;
};
struct HardcorePotential {
  double a = 0.05;
};
struct CustomPotential {
  std::function<double(double)> V;   ///< even, integrable after Gaussian damping
  std::function<double(double)> Vq;  ///< Fourier coefficients; derived from V when absent
};
using RealPotential = std::variant<ContactPotential, HardcorePotential, CustomPotential>;

/// Table of U(R_N) plus the matching smooth evaluators.
struct PhaseSpacePotential {
  double lambda = 1.0;
  std::vector<double> U_N;  ///< N = 0 .. N_max
  enum class Provenance { ClosedForm, Quadrature } provenance = Provenance::ClosedForm;
  RealPotential source;
  std::string warning;  ///< set when outside the validity regime

  /// Assembled (U_c, U_e) for two coherent states a distance R apart. The
  /// closed forms (when the source has one) are preferred for large R where
  /// the table would need to be extended.
  std::pair<double, double> uc_ue(double R) const {
    if (auto* c = std::get_if<ContactPotential>(&source)) return uc_ue_contact(c->eps, lambda, R);
    if (auto* h = std::get_if<HardcorePotential>(&source)) {
      auto r = uc_hardcore(h->a, lambda, R);
      return {r.Uc, r.Ue};
    }
    double z = R * R / (4.0 * lambda);
    std::vector<double> I(U_N.size());
    for (std::size_t n = 0; n < U_N.size(); ++n) I[n] = std::exp(log_poisson((int)n, z));
    return assemble_uc_ue(U_N, I);
  }
};

/// U_N = integral dq V_q e^{-lambda q^2/2} L_N(lambda q^2) for N <= N_max,
/// by adaptive quadrature. The damped Laguerre oscillates with near-constant
/// amplitude out to the classical turning point lambda q^2 = 4N + 2, so the
/// domain is widened per N to cover it; quad.half_width still rules when the
/// caller knows V_q needs more room.
inline PhaseSpacePotential u_general(const std::function<double(double)>& Vq, double lambda,
                                     int N_max, const specfun::QuadratureSpec& quad) {
  if (N_max < 0) throw ValidationError("u_general: N_max must be >= 0");
  PhaseSpacePotential pot;
  pot.lambda = lambda;
  pot.provenance = PhaseSpacePotential::Provenance::Quadrature;
  pot.U_N.resize(N_max + 1);
  for (int N = 0; N <= N_max; ++N) {
    auto integrand = [&](double q) {
      return Vq(q) * std::exp(-lambda * q * q / 2.0) *
             specfun::laguerre_gen(N, 0, lambda * q * q);
    };
    specfun::QuadratureSpec qn = quad;
    qn.half_width =
        std::max(quad.half_width, std::sqrt((4.0 * N + 6.0) / lambda) + 6.0 / std::sqrt(lambda));
    pot.U_N[N] = specfun::integrate(integrand, qn).value;
  }
  return pot;
}

/// Build the U(R_N) table for any potential kind; closed forms where known,
/// quadrature of the Laguerre transform otherwise.
inline PhaseSpacePotential build_potential(const RealPotential& pot, double lambda, int N_max,
                                           const specfun::QuadratureSpec& quad = {}) {
  if (!(lambda > 0)) throw ValidationError("build_potential: lambda must be > 0");
  if (auto* c = std::get_if<ContactPotential>(&pot)) {
    PhaseSpacePotential p;
    p.lambda = lambda;
    p.source = *c;
    p.U_N.resize(N_max + 1);
    for (int N = 0; N <= N_max; ++N) p.U_N[N] = u_contact(c->eps, lambda, N);
    return p;
  }
  if (auto* h = std::get_if<HardcorePotential>(&pot)) {
    PhaseSpacePotential p;
    p.lambda = lambda;
    p.source = *h;
    if (h->a > 0.3 * std::sqrt(lambda))
      p.warning = "hardcore radius a outside the small-core regime a << sqrt(lambda)";
    p.U_N.resize(N_max + 1);
    for (int N = 0; N <= N_max; ++N) p.U_N[N] = u_hardcore(h->a, lambda, N);
    return p;
  }
  const auto& cust = std::get<CustomPotential>(pot);
  std::function<double(double)> Vq = cust.Vq;
  if (!Vq) {
    if (!cust.V) throw ValidationError("build_potential: custom potential needs V or Vq");
    auto V = cust.V;
    specfun::QuadratureSpec inner = quad;
    Vq = [V, inner](double q) {
      auto f = [&](double x) { return V(x) * std::cos(q * x); };
      return specfun::integrate(f, inner).value / (2.0 * specfun::pi);
    };
  }
  auto p = u_general(Vq, lambda, N_max, quad);
  p.source = cust;
  return p;
}

}  // namespace phasecrystal::interaction
