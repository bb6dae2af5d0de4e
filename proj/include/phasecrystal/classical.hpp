#pragma once

// Classical many-body dynamics of the kicked chain: full lab-frame Poincare
// map (adaptive integration between kicks, impulses at the kicks), the
// rotating-frame effective equations of motion with phase-space forces, the
// linearized solution, and the dynamical-crystal stability analysis.

#include <algorithm>
#include <cmath>
#include <complex>
#include <variant>
#include <vector>

#include "phasecrystal/errors.hpp"
#include "phasecrystal/model.hpp"
#include "phasecrystal/special_functions.hpp"

namespace phasecrystal::classical {

using cplx = std::complex<double>;

// ---------------------------------------------------------------------------
// potential kinds
// ---------------------------------------------------------------------------

/// Lorentzian stand-in for the contact interaction in the lab frame.
struct ContactSmoothed {
  double eps = 0.194;
  double sigma = 0.1;
};

/// Steep inverse power law standing in for the hardcore wall in the lab frame.
struct HardcorePowerLaw {
  double a = 0.05;
  int n = 20;
};

/// Rotating-frame kinds carry the smooth phase-space potential directly.
struct RwaContact {
  double eps = 0.194;
};
struct RwaHardcore {
  double a = 0.05;
};

using ClassicalPotentialSpec =
    std::variant<ContactSmoothed, HardcorePowerLaw, RwaContact, RwaHardcore>;

inline void validate(const ClassicalPotentialSpec& pot) {
  if (auto* c = std::get_if<ContactSmoothed>(&pot)) {
    if (!(c->sigma > 0)) throw ValidationError("ContactSmoothed: sigma must be > 0");
  } else if (auto* h = std::get_if<HardcorePowerLaw>(&pot)) {
    if (h->n < 4 || h->n % 2) throw ValidationError("HardcorePowerLaw: n must be even and >= 4");
    if (!(h->a > 0)) throw ValidationError("HardcorePowerLaw: a must be > 0");
  } else if (auto* r = std::get_if<RwaHardcore>(&pot)) {
    if (!(r->a > 0)) throw ValidationError("RwaHardcore: a must be > 0");
  }
}

inline bool is_lab_kind(const ClassicalPotentialSpec& pot) {
  return std::holds_alternative<ContactSmoothed>(pot) ||
         std::holds_alternative<HardcorePowerLaw>(pot);
}

/// dV/dx of the lab-frame pair potential at separation d.
inline double lab_force_derivative(const ClassicalPotentialSpec& pot, double d) {
  if (auto* c = std::get_if<ContactSmoothed>(&pot)) {
    double den = d * d + c->sigma * c->sigma;
    return -c->eps / specfun::pi * 2.0 * c->sigma * d / (den * den);
  }
  if (auto* h = std::get_if<HardcorePowerLaw>(&pot)) {
    double r = std::abs(d);
    if (r == 0.0) throw CollisionSingularity("power-law potential evaluated at zero separation");
    double mag = h->n * std::pow(2.0 * h->a / r, h->n) / r;
    return d > 0 ? -mag : mag;
  }
  throw ValidationError("lab-frame dynamics requires a smoothed lab potential kind");
}

/// dU_c/dR of the rotating-frame pair potential.
inline double rwa_duc_dr(const ClassicalPotentialSpec& pot, double R) {
  if (auto* c = std::get_if<RwaContact>(&pot)) {
    constexpr double R_min = 1e-3;
    if (R < R_min)
      throw CollisionSingularity("rwa contact force singular: R = " + std::to_string(R));
    return -c->eps / (specfun::pi * R * R);
  }
  if (auto* h = std::get_if<RwaHardcore>(&pot)) return 2.0 * h->a / specfun::pi;
  throw ValidationError("rotating-frame dynamics requires an rwa potential kind");
}

/// U_c of the rotating-frame pair potential (for the conserved energy).
inline double rwa_uc(const ClassicalPotentialSpec& pot, double R) {
  if (auto* c = std::get_if<RwaContact>(&pot)) return c->eps / (specfun::pi * R);
  if (auto* h = std::get_if<RwaHardcore>(&pot)) return 2.0 * h->a * R / specfun::pi;
  throw ValidationError("rotating-frame dynamics requires an rwa potential kind");
}

// ---------------------------------------------------------------------------
// lab frame: Poincare map
// ---------------------------------------------------------------------------

/// Lab-frame configuration at one instant, taken just after a kick.
struct LabState {
  std::vector<double> x;
  std::vector<double> p;
  double t = 0.0;
};

/// Stroboscopic samples (x_i, p_i) at t = 2 pi m, recorded just after the
/// kick at that instant; at those times the rotating-frame (X, P) coincide
/// with (x, p).
struct StroboscopicTrajectory {
  std::vector<LabState> samples;

  cplx z(std::size_t m, std::size_t atom) const {
    return {samples[m].x[atom], samples[m].p[atom]};
  }
};

namespace detail {

struct Deriv {
  const ClassicalPotentialSpec& pot;
  std::size_t n;

  // y = [x_0..x_{n-1}, p_0..p_{n-1}]
  void operator()(const std::vector<double>& y, std::vector<double>& dy) const {
    for (std::size_t i = 0; i < n; ++i) {
      dy[i] = y[n + i];
      dy[n + i] = -y[i];
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        double w = lab_force_derivative(pot, y[i] - y[j]);
        dy[n + i] -= w;
        dy[n + j] += w;
      }
  }
};

// Dormand-Prince 5(4) with PI-free simple step control.
inline void integrate_adaptive(const Deriv& f, std::vector<double>& y, double t0, double t1,
                               double rtol, double atol) {
  static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static const double a21 = 1.0 / 5;
  static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                      a54 = -212.0 / 729;
  static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                      a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                      b6 = 11.0 / 84;
  static const double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                      e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                      e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;
  const std::size_t dim = y.size();
  std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim), k7(dim), tmp(dim),
      ynew(dim);
  double t = t0, h = (t1 - t0) / 16.0;
  const double hmin = (t1 - t0) * 1e-14;
  f(y, k1);
  while (t < t1) {
    h = std::min(h, t1 - t);
    for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + h * a21 * k1[i];
    f(tmp, k2);
    for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    f(tmp, k3);
    for (std::size_t i = 0; i < dim; ++i)
      tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    f(tmp, k4);
    for (std::size_t i = 0; i < dim; ++i)
      tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    f(tmp, k5);
    for (std::size_t i = 0; i < dim; ++i)
      tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    f(tmp, k6);
    for (std::size_t i = 0; i < dim; ++i)
      ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    f(ynew, k7);
    double err = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      err += (e / sc) * (e / sc);
    }
    err = std::sqrt(err / dim);
    if (!std::isfinite(err)) err = 1e300;  // blown-up stage: reject hard
    if (err <= 1.0) {
      t += h;
      y = ynew;
      k1 = k7;  // first-same-as-last
    }
    double fac = std::clamp(0.9 * std::pow(std::max(err, 1e-16), -0.2), 0.2, 5.0);
    h *= fac;
    if (h < hmin && t < t1)
      throw StepRejected("integrate_adaptive: step size collapsed at t = " + std::to_string(t));
  }
}

}  // namespace detail

/// Integrates the kicked lab-frame chain for n_periods harmonic periods and
/// returns the stroboscopic record. Between kicks the smooth flow runs under
/// adaptive Dormand-Prince; each kick applies p += K tau sin(x) exactly. The
/// initial state is taken at t = 0 just after a kick.
inline StroboscopicTrajectory poincare_evolve(const LabState& initial, const ModelParams& params,
                                              const ClassicalPotentialSpec& pot, int n_periods,
                                              double rtol = 1e-10, double atol = 1e-12) {
  params.validate();
  validate(pot);
  if (!is_lab_kind(pot))
    throw ValidationError("poincare_evolve: lab-frame potential kind required");
  if (initial.x.size() != initial.p.size())
    throw ValidationError("poincare_evolve: x and p sizes differ");
  std::size_t n = initial.x.size();
  detail::Deriv f{pot, n};
  std::vector<double> y(2 * n);
  std::copy(initial.x.begin(), initial.x.end(), y.begin());
  std::copy(initial.p.begin(), initial.p.end(), y.begin() + n);
  StroboscopicTrajectory traj;
  auto record = [&](double t) {
    LabState s;
    s.t = t;
    s.x.assign(y.begin(), y.begin() + n);
    s.p.assign(y.begin() + n, y.end());
    traj.samples.push_back(std::move(s));
  };
  record(0.0);
  double tau = params.tau();
  for (int m = 1; m <= n_periods; ++m) {
    for (int kk = 0; kk < params.q0; ++kk) {
      double t0 = ((m - 1) * params.q0 + kk) * tau;
      detail::integrate_adaptive(f, y, t0, t0 + tau, rtol, atol);
      for (std::size_t i = 0; i < n; ++i) y[n + i] += params.K * tau * std::sin(y[i]);
    }
    record(m * params.q0 * tau);
  }
  return traj;
}

// ---------------------------------------------------------------------------
// rotating frame: effective equations of motion
// ---------------------------------------------------------------------------

/// Rotating-frame trajectory sampled every sample_every RK4 steps.
struct RotTrajectory {
  std::vector<double> times;
  std::vector<std::vector<cplx>> positions;  // [sample][atom]
};

namespace detail {

inline void rwa_deriv(const std::vector<cplx>& Z, double K, const ClassicalPotentialSpec& pot,
                      std::vector<cplx>& dZ) {
  std::size_t n = Z.size();
  for (std::size_t i = 0; i < n; ++i)
    dZ[i] = {-K / 2.0 * std::sin(Z[i].imag()), K / 2.0 * std::sin(Z[i].real())};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      cplx d = Z[i] - Z[j];
      double R = std::abs(d);
      double w = rwa_duc_dr(pot, R);
      // dX_i/dt += w (P_i - P_j)/R ; dP_i/dt -= w (X_i - X_j)/R
      cplx contrib(w * d.imag() / R, -w * d.real() / R);
      dZ[i] += contrib;
      dZ[j] -= contrib;
    }
}

}  // namespace detail

/// Fixed-step RK4 on dX/dt = -(K/2) sin P + sum U' (P_i-P_j)/R,
/// dP/dt = (K/2) sin X - sum U' (X_i-X_j)/R.
inline RotTrajectory rwa_evolve(const std::vector<cplx>& initial, const ModelParams& params,
                                const ClassicalPotentialSpec& pot, double T,
                                double dt = 2.0 * specfun::pi / 200.0, int sample_every = 1) {
  params.validate();
  validate(pot);
  if (is_lab_kind(pot)) throw ValidationError("rwa_evolve: rwa potential kind required");
  if (!(T > 0) || !(dt > 0)) throw ValidationError("rwa_evolve: T and dt must be > 0");
  std::size_t n = initial.size();
  long steps = std::lround(T / dt);
  RotTrajectory traj;
  std::vector<cplx> Z = initial, k1(n), k2(n), k3(n), k4(n), tmp(n);
  traj.times.push_back(0.0);
  traj.positions.push_back(Z);
  for (long s = 1; s <= steps; ++s) {
    detail::rwa_deriv(Z, params.K, pot, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = Z[i] + 0.5 * dt * k1[i];
    detail::rwa_deriv(tmp, params.K, pot, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = Z[i] + 0.5 * dt * k2[i];
    detail::rwa_deriv(tmp, params.K, pot, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = Z[i] + dt * k3[i];
    detail::rwa_deriv(tmp, params.K, pot, k4);
    for (std::size_t i = 0; i < n; ++i)
      Z[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    if (s % sample_every == 0 || s == steps) {
      traj.times.push_back(s * dt);
      traj.positions.push_back(Z);
    }
  }
  return traj;
}

/// Conserved rotating-frame energy sum_i (K/2)(cos X_i + cos P_i) + sum_{i<j} U_c(R_ij).
inline double rwa_total_energy(const std::vector<cplx>& Z, const ModelParams& params,
                               const ClassicalPotentialSpec& pot) {
  double e = 0.0;
  for (const auto& z : Z) e += params.K / 2.0 * (std::cos(z.real()) + std::cos(z.imag()));
  for (std::size_t i = 0; i < Z.size(); ++i)
    for (std::size_t j = i + 1; j < Z.size(); ++j) e += rwa_uc(pot, std::abs(Z[i] - Z[j]));
  return e;
}

/// Linearized solution about the initial configuration:
/// Z_i(t) = Z_i(0) + (2/K)(e^{i K t/2} - 1) sum_{j != i} U'(R_ij) e_ji.
inline std::vector<cplx> linear_solution(const std::vector<cplx>& initial,
                                         const ModelParams& params,
                                         const ClassicalPotentialSpec& pot, double t) {
  params.validate();
  validate(pot);
  std::size_t n = initial.size();
  std::vector<cplx> out(n);
  cplx osc = (std::exp(cplx(0.0, params.K * t / 2.0)) - 1.0) * 2.0 / params.K;
  for (std::size_t i = 0; i < n; ++i) {
    cplx drive = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      cplx d = initial[j] - initial[i];
      double R = std::abs(d);
      drive += rwa_duc_dr(pot, R) * d / R;
    }
    out[i] = initial[i] + osc * drive;
  }
  return out;
}

// ---------------------------------------------------------------------------
// dynamical crystals
// ---------------------------------------------------------------------------

/// Stability record of a 1D chain pinned on 2 pi-spaced lattice sites.
struct CrystalReport {
  std::vector<double> max_excursion;  ///< per atom, max_t |Z_i(t) - Z_i(0)|
  std::vector<double> amplitude;      ///< per atom, max_t |Z_i(t) - mean_t Z_i(t)|
  double edge_amplitude_predicted = 0.0;
  double threshold = 0.0;      ///< eps_c for contact, N_c for hardcore
  double survival_radius = 0.0;  ///< (sqrt(2)-1) pi
  bool survived = false;
};

/// Critical parameter for chain survival: contact -> eps_c = 12 (sqrt2-1) pi^2 |K|,
/// hardcore -> N_c = (sqrt2-1) pi^2 |K| / (4a).
inline double crystal_threshold(const ModelParams& params, const ClassicalPotentialSpec& pot) {
  double s = std::sqrt(2.0) - 1.0;
  if (std::holds_alternative<RwaContact>(pot) || std::holds_alternative<ContactSmoothed>(pot))
    return 12.0 * s * specfun::pi * specfun::pi * std::abs(params.K);
  if (std::holds_alternative<RwaHardcore>(pot) || std::holds_alternative<HardcorePowerLaw>(pot)) {
    double a = std::holds_alternative<RwaHardcore>(pot) ? std::get<RwaHardcore>(pot).a
                                                        : std::get<HardcorePowerLaw>(pot).a;
    return s * specfun::pi * specfun::pi * std::abs(params.K) / (4.0 * a);
  }
  throw ValidationError("crystal_threshold: unsupported potential kind");
}

/// Evolves an n_atoms chain initially at Z_j = 2 pi (j - (n-1)/2) with zero
/// momenta under the rotating-frame EOM, and applies the edge-amplitude
/// survival criterion: the chain survives when the edge atoms oscillate
/// within (sqrt(2)-1) pi of their drifted centers.
inline CrystalReport crystal_run(int n_atoms, const ModelParams& params,
                                 const ClassicalPotentialSpec& pot, int n_periods,
                                 double dt = 2.0 * specfun::pi / 200.0) {
  if (n_atoms < 2) throw ValidationError("crystal_run: need at least 2 atoms");
  std::vector<cplx> Z0(n_atoms);
  for (int j = 0; j < n_atoms; ++j)
    Z0[j] = 2.0 * specfun::pi * (j - 0.5 * (n_atoms - 1));
  auto traj = rwa_evolve(Z0, params, pot, 2.0 * specfun::pi * n_periods, dt, 10);
  CrystalReport rep;
  rep.max_excursion.assign(n_atoms, 0.0);
  rep.amplitude.assign(n_atoms, 0.0);
  std::vector<cplx> mean(n_atoms, 0.0);
  for (const auto& snap : traj.positions)
    for (int i = 0; i < n_atoms; ++i) mean[i] += snap[i];
  for (auto& m : mean) m /= double(traj.positions.size());
  for (const auto& snap : traj.positions)
    for (int i = 0; i < n_atoms; ++i) {
      rep.max_excursion[i] = std::max(rep.max_excursion[i], std::abs(snap[i] - Z0[i]));
      rep.amplitude[i] = std::max(rep.amplitude[i], std::abs(snap[i] - mean[i]));
    }
  double aK = std::abs(params.K);
  if (auto* c = std::get_if<RwaContact>(&pot))
    rep.edge_amplitude_predicted = c->eps / (12.0 * specfun::pi * aK);
  else if (auto* h = std::get_if<RwaHardcore>(&pot))
    rep.edge_amplitude_predicted = 4.0 * h->a * (n_atoms - 1) / (specfun::pi * aK);
  rep.threshold = crystal_threshold(params, pot);
  rep.survival_radius = (std::sqrt(2.0) - 1.0) * specfun::pi;
  double edge = std::max(rep.amplitude.front(), rep.amplitude.back());
  // Escaped atoms drag their running mean along; cap the measure with the
  // raw excursion so an unbound chain cannot masquerade as surviving.
  for (int i = 0; i < n_atoms; ++i) edge = std::max(edge, rep.max_excursion[i] / 2.0);
  rep.survived = edge < rep.survival_radius;
  return rep;
}

}  // namespace phasecrystal::classical
