#include <catch2/catch.hpp>
#include <cmath>
#include <complex>

#include "oracles.hpp"
#include "phasecrystal/classical.hpp"

using namespace phasecrystal;
namespace cl = phasecrystal::classical;
using cl::cplx;
using oracles::pi;

static const ModelParams fig7{-0.02 / pi, 4, 1.0, 0.0, 0.0};

TEST_CASE("free harmonic motion closes stroboscopically", "[classical]") {
  ModelParams p{0.0, 4, 1.0, 0.0, 0.0};
  cl::LabState s0{{1.3, -0.4}, {0.2, 2.0}, 0.0};
  // V = 0 through a vanishing Lorentzian strength
  auto traj = cl::poincare_evolve(s0, p, cl::ContactSmoothed{0.0, 0.1}, 20, 1e-12, 1e-14);
  for (const auto& s : traj.samples)
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(s.x[i] == Approx(s0.x[i]).margin(1e-10));
      CHECK(s.p[i] == Approx(s0.p[i]).margin(1e-10));
    }
}

TEST_CASE("single kicked particle stays near a lattice extremum", "[classical]") {
  cl::LabState s0{{0.0}, {2 * pi}, 0.0};  // Z = 2 pi i, an equilibrium for K < 0
  auto traj = cl::poincare_evolve(s0, fig7, cl::ContactSmoothed{0.0, 0.1}, 200);
  double worst = 0.0;
  for (const auto& s : traj.samples)
    worst = std::max(worst, std::abs(traj.z(0, 0) - cplx(s.x[0], s.p[0])));
  CHECK(worst < 0.1);
}

TEST_CASE("kicked flow preserves phase-space area", "[classical]") {
  // triangle of initial conditions, V = 0: area must be conserved per period
  ModelParams p{0.05, 4, 1.0, 0.0, 0.0};
  cplx a0(0.3, 0.1), b0(0.31, 0.1), c0(0.3, 0.11);
  auto run = [&](cplx z) {
    cl::LabState s{{z.real()}, {z.imag()}, 0.0};
    return cl::poincare_evolve(s, p, cl::ContactSmoothed{0.0, 0.1}, 10, 1e-12, 1e-14);
  };
  auto ta = run(a0), tb = run(b0), tc = run(c0);
  auto area = [&](std::size_t m) {
    cplx a = ta.z(m, 0), b = tb.z(m, 0), c = tc.z(m, 0);
    return 0.5 * std::imag(std::conj(b - a) * (c - a));
  };
  double a_init = area(0);
  for (std::size_t m = 1; m <= 10; ++m) CHECK(area(m) == Approx(a_init).margin(1e-8 * 10));
}

TEST_CASE("rwa fixed points and conservation", "[classical]") {
  // (0, pi) is stationary for the single-particle flow
  auto traj = cl::rwa_evolve({cplx(0.0, pi)}, fig7, cl::RwaContact{0.0}, 200.0);
  CHECK(std::abs(traj.positions.back()[0] - cplx(0.0, pi)) < 1e-12);

  // three-body energy conservation over 200 slow periods at default dt
  std::vector<cplx> z0{cplx(0, 2 * pi), cplx(-2 * pi, -2 * pi), cplx(2 * pi, -2 * pi)};
  double T = 200.0 * 4.0 * pi / std::abs(fig7.K);
  auto tr = cl::rwa_evolve(z0, fig7, cl::RwaContact{0.194}, T, 2 * pi / 200.0, 2000);
  double e0 = cl::rwa_total_energy(z0, fig7, cl::RwaContact{0.194});
  double worst = 0.0;
  for (const auto& snap : tr.positions)
    worst = std::max(worst,
                     std::abs(cl::rwa_total_energy(snap, fig7, cl::RwaContact{0.194}) - e0));
  CHECK(worst / std::abs(e0) < 1e-6);
}

TEST_CASE("rwa step-halving audit", "[classical]") {
  std::vector<cplx> z0{cplx(0, 2 * pi), cplx(-2 * pi, -2 * pi), cplx(2 * pi, -2 * pi)};
  double T = 100.0;
  auto a = cl::rwa_evolve(z0, fig7, cl::RwaContact{0.194}, T, 2 * pi / 200.0);
  auto b = cl::rwa_evolve(z0, fig7, cl::RwaContact{0.194}, T, pi / 200.0);
  for (int i = 0; i < 3; ++i)
    CHECK(std::abs(a.positions.back()[i] - b.positions.back()[i]) < 1e-6);
}

TEST_CASE("three-body: rwa tracks the poincare map", "[classical][slow]") {
  std::vector<cplx> z0{cplx(0, 2 * pi), cplx(-2 * pi, -2 * pi), cplx(2 * pi, -2 * pi)};
  cl::LabState s0;
  for (auto z : z0) {
    s0.x.push_back(z.real());
    s0.p.push_back(z.imag());
  }
  int periods = 200;
  auto pc = cl::poincare_evolve(s0, fig7, cl::ContactSmoothed{0.194, 0.1}, periods, 1e-10, 1e-12);
  auto rw = cl::rwa_evolve(z0, fig7, cl::RwaContact{0.194}, 2 * pi * periods, 2 * pi / 200, 200);
  REQUIRE(rw.positions.size() == pc.samples.size());

  double diam = 0.0, dev = 0.0, dev_lin = 0.0;
  for (std::size_t m = 0; m <= (std::size_t)periods; ++m)
    for (std::size_t mm = 0; mm < m; ++mm)
      diam = std::max(diam, std::abs(pc.z(m, 0) - pc.z(mm, 0)));
  for (std::size_t m = 0; m <= (std::size_t)periods; ++m) {
    auto lin = cl::linear_solution(z0, fig7, cl::RwaContact{0.194}, 2 * pi * m);
    for (int i = 0; i < 3; ++i) {
      dev = std::max(dev, std::abs(rw.positions[m][i] - pc.z(m, i)));
      dev_lin = std::max(dev_lin, std::abs(lin[i] - pc.z(m, i)));
    }
  }
  CHECK(dev / diam < 0.05);
  CHECK(dev_lin / diam < 0.10);
}

TEST_CASE("linear solution basics", "[classical]") {
  std::vector<cplx> z0{cplx(0, 2 * pi), cplx(-2 * pi, -2 * pi), cplx(2 * pi, -2 * pi)};
  auto at0 = cl::linear_solution(z0, fig7, cl::RwaContact{0.194}, 0.0);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(at0[i] - z0[i]) == 0.0);
  // the oscillation factor closes after t = 4 pi / |K|
  auto atT = cl::linear_solution(z0, fig7, cl::RwaContact{0.194}, 4 * pi / std::abs(fig7.K));
  for (int i = 0; i < 3; ++i) CHECK(std::abs(atT[i] - z0[i]) < 1e-10);
}

TEST_CASE("permutation equivariance and translation covariance", "[classical]") {
  std::vector<cplx> z0{cplx(0, 2 * pi), cplx(-2 * pi, -2 * pi), cplx(2 * pi, -2 * pi)};
  std::vector<cplx> zp{z0[2], z0[0], z0[1]};
  auto a = cl::rwa_evolve(z0, fig7, cl::RwaContact{0.194}, 50.0);
  auto b = cl::rwa_evolve(zp, fig7, cl::RwaContact{0.194}, 50.0);
  for (std::size_t m = 0; m < a.positions.size(); ++m) {
    CHECK(std::abs(a.positions[m][0] - b.positions[m][1]) == 0.0);
    CHECK(std::abs(a.positions[m][2] - b.positions[m][0]) == 0.0);
  }
  // interaction forces depend only on differences: uniform shift leaves the
  // pair term unchanged (single-particle term must be removed to see it)
  ModelParams nok = fig7;
  nok.K = 0.0;
  cplx shift(0.7, -1.2);
  std::vector<cplx> zs;
  for (auto z : z0) zs.push_back(z + shift);
  auto c0 = cl::rwa_evolve(z0, nok, cl::RwaContact{0.194}, 25.0);
  auto cs = cl::rwa_evolve(zs, nok, cl::RwaContact{0.194}, 25.0);
  for (std::size_t m = 0; m < c0.positions.size(); ++m)
    for (int i = 0; i < 3; ++i)
      CHECK(std::abs(cs.positions[m][i] - c0.positions[m][i] - shift) < 1e-12);
}

TEST_CASE("collision guard and step rejection", "[classical]") {
  std::vector<cplx> close{cplx(0.0, 0.0), cplx(5e-4, 0.0)};
  CHECK_THROWS_AS(cl::rwa_evolve(close, fig7, cl::RwaContact{0.194}, 1.0), CollisionSingularity);

  // atoms buried deep inside the core: the wall force overflows and the
  // adaptive controller collapses to its minimum step
  cl::LabState s0{{0.0, 1e-30}, {0.0, 0.0}, 0.0};
  CHECK_THROWS_AS(cl::poincare_evolve(s0, fig7, cl::HardcorePowerLaw{0.05, 20}, 1),
                  StepRejected);
}

TEST_CASE("crystal thresholds", "[classical]") {
  CHECK(cl::crystal_threshold(fig7, cl::RwaContact{0.194}) == Approx(0.31227).margin(2e-4));
  CHECK(cl::crystal_threshold(fig7, cl::RwaHardcore{0.05}) == Approx(0.13).margin(0.005));
  // hardcore edge amplitude grows linearly with atom number
  double aK = std::abs(fig7.K);
  auto amp = [&](int n) { return 4.0 * 0.05 * (n - 1) / (pi * aK); };
  CHECK(amp(5) - amp(4) == Approx(amp(3) - amp(2)));
}

TEST_CASE("seven-atom contact chain survives at weak coupling", "[classical][slow]") {
  auto rep = cl::crystal_run(7, fig7, cl::RwaContact{0.194}, 200);
  CHECK(rep.survived);
  // edge atoms oscillate hardest
  double inner = 0.0;
  for (int i = 1; i < 6; ++i) inner = std::max(inner, rep.amplitude[i]);
  CHECK(rep.amplitude.front() > inner);
  CHECK(rep.amplitude.back() > inner);
  // measured edge amplitude tracks the linear prediction
  CHECK(rep.amplitude.front() == Approx(rep.edge_amplitude_predicted).epsilon(0.25));
}

TEST_CASE("seven-atom chain breaks above the critical coupling", "[classical][slow]") {
  double eps_c = cl::crystal_threshold(fig7, cl::RwaContact{1.0});
  auto rep = cl::crystal_run(7, fig7, cl::RwaContact{1.5 * eps_c}, 200);
  CHECK_FALSE(rep.survived);
}
