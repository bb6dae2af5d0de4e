#pragma once

// Command-line front end: JSON config parsing with strict key checking,
// dispatch into the computational modules, CSV/JSON artifact writing, and a
// run manifest with content digests.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <json.hpp>

#include "phasecrystal/bands.hpp"
#include "phasecrystal/classical.hpp"
#include "phasecrystal/detail/sha256.hpp"
#include "phasecrystal/dissipative.hpp"
#include "phasecrystal/errors.hpp"
#include "phasecrystal/interaction.hpp"
#include "phasecrystal/io.hpp"
#include "phasecrystal/lattice.hpp"
#include "phasecrystal/model.hpp"
#include "phasecrystal/version.hpp"

namespace phasecrystal::cli {

using json = nlohmann::json;

/// Validated run description: one subcommand plus its parameters.
struct RunConfig {
  std::string cmd;
  ModelParams model;
  json extra;  // subcommand-specific parameters, already validated
  std::filesystem::path out_dir = ".";
  bool overwrite = false;
  int threads = 0;  // 0 = library default
};

/// Echoed configuration plus digests of everything the run wrote.
struct RunManifest {
  json config;
  std::string version;
  double duration_seconds = 0.0;
  std::vector<std::pair<std::string, std::string>> outputs;  // (path, sha256)

  json to_json() const {
    json j;
    j["config"] = config;
    j["version"] = version;
    j["duration_seconds"] = duration_seconds;
    j["outputs"] = json::array();
    for (const auto& [p, d] : outputs) j["outputs"].push_back({{"path", p}, {"sha256", d}});
    return j;
  }
};

namespace detail {

inline const std::map<std::string, std::set<std::string>>& allowed_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"lattice", {"x_min", "x_max", "p_min", "p_max", "nx", "np"}},
      {"bands", {"p", "q", "n_kx", "n_kp"}},
      {"butterfly", {"q_max", "samples"}},
      {"chern", {"p", "q", "grid"}},
      {"eigq", {"p", "q", "band", "kx", "kp", "x_min", "x_max", "p_min", "p_max", "nx", "np"}},
      {"dissipate",
       {"kicks", "L", "N", "record_every", "initial", "x0", "p0", "j_max"}},
      {"potential", {"kind", "eps", "a", "n_max", "r_max", "nr", "table"}},
      {"nbody",
       {"mode", "pot", "eps", "sigma", "a", "n", "initial", "periods", "dt", "rtol"}},
      {"crystal", {"pot", "eps", "a", "atoms", "periods", "dt"}},
  };
  return keys;
}

inline const std::set<std::string>& common_keys() {
  static const std::set<std::string> keys = {"cmd", "K", "q0", "lambda", "kappa", "n0", "out"};
  return keys;
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError("config field '" + key + "': " + e.what());
  }
}

inline double require_num(const json& j, const std::string& key) {
  if (!j.contains(key)) throw ValidationError("config: missing required field '" + key + "'");
  if (!j.at(key).is_number()) throw ValidationError("config field '" + key + "' must be a number");
  return j.at(key).get<double>();
}

}  // namespace detail

/// Parses and validates a JSON config. The subcommand may come from the
/// config ("cmd") or the command line; when both are present they must agree.
/// Unknown keys are rejected, numeric fields are checked against module
/// preconditions, and defaults (lambda = 1, n0 = 0, ...) are applied.
inline RunConfig parse_config(const json& j, const std::string& cmd_override = "") {
  if (!j.is_object()) throw ParseError("config: top level must be a JSON object");
  RunConfig cfg;
  cfg.cmd = detail::get_or<std::string>(j, "cmd", cmd_override);
  if (cfg.cmd.empty()) throw ValidationError("config: no subcommand given");
  if (!cmd_override.empty() && cfg.cmd != cmd_override)
    throw ValidationError("config: cmd '" + cfg.cmd + "' conflicts with subcommand '" +
                          cmd_override + "'");
  auto it = detail::allowed_keys().find(cfg.cmd);
  if (it == detail::allowed_keys().end())
    throw ValidationError("config: unknown subcommand '" + cfg.cmd + "'");
  for (const auto& [key, val] : j.items()) {
    (void)val;
    if (!detail::common_keys().count(key) && !it->second.count(key))
      throw ValidationError("config: unknown key '" + key + "' for subcommand '" + cfg.cmd + "'");
  }
  cfg.model.K = detail::get_or(j, "K", 0.1);
  cfg.model.q0 = detail::get_or(j, "q0", 4);
  cfg.model.lambda = detail::get_or(j, "lambda", 1.0);
  cfg.model.kappa = detail::get_or(j, "kappa", 0.0);
  cfg.model.n0 = detail::get_or(j, "n0", 0.0);
  cfg.model.validate();
  if (j.contains("out")) cfg.out_dir = j.at("out").get<std::string>();
  cfg.extra = j;

  // eager precondition checks so a bad config fails before any work
  if (cfg.cmd == "bands" || cfg.cmd == "chern" || cfg.cmd == "eigq") {
    bands::RationalFlux flux{(int)detail::require_num(j, "p"), (int)detail::require_num(j, "q")};
    flux.validate();
  }
  if (cfg.cmd == "butterfly" && detail::get_or(j, "q_max", 10) < 2)
    throw ValidationError("butterfly: q_max must be >= 2");
  if (cfg.cmd == "dissipate") {
    int N = detail::get_or(j, "N", 512);
    if (N < 4 || (N & (N - 1)) != 0) throw ValidationError("dissipate: N must be a power of two");
    if (detail::get_or(j, "kicks", 100) < 1) throw ValidationError("dissipate: kicks must be >= 1");
    std::string init = detail::get_or<std::string>(j, "initial", "ground");
    if (init != "ground" && init != "coherent")
      throw ValidationError("dissipate: initial must be 'ground' or 'coherent'");
  }
  if (cfg.cmd == "potential") {
    std::string kind = detail::get_or<std::string>(j, "kind", "contact");
    if (kind != "contact" && kind != "hardcore" && kind != "custom")
      throw ValidationError("potential: kind must be contact, hardcore or custom");
    if (kind == "custom" && !j.contains("table"))
      throw ValidationError("potential: custom kind requires a 'table' CSV path");
  }
  if (cfg.cmd == "nbody" || cfg.cmd == "crystal") {
    std::string pot = detail::get_or<std::string>(j, "pot", "contact");
    if (pot != "contact" && pot != "hardcore")
      throw ValidationError(cfg.cmd + ": pot must be contact or hardcore");
  }
  if (cfg.cmd == "crystal" && detail::get_or(j, "atoms", 7) < 2)
    throw ValidationError("crystal: atoms must be >= 2");
  return cfg;
}

inline RunConfig parse_config_file(const std::filesystem::path& path,
                                   const std::string& cmd_override = "") {
  json j;
  try {
    j = json::parse(io::read_file(path));
  } catch (const json::exception& e) {
    throw ParseError(std::string("config parse: ") + e.what());
  }
  return parse_config(j, cmd_override);
}

namespace detail {

// Collects written outputs; removes everything already written on failure.
class OutputSink {
 public:
  OutputSink(const std::filesystem::path& dir, bool overwrite) : dir_(dir), overwrite_(overwrite) {
    std::filesystem::create_directories(dir_);
  }

  void write(const std::string& name, const std::string& content) {
    auto path = dir_ / name;
    if (!overwrite_ && std::filesystem::exists(path))
      throw ValidationError("output exists (pass --overwrite): " + path.string());
    io::write_file(path, content);
    written_.emplace_back(name, phasecrystal::detail::sha256_hex(content));
  }

  void discard_all() {
    for (const auto& [name, digest] : written_) {
      (void)digest;
      std::error_code ec;
      std::filesystem::remove(dir_ / name, ec);
    }
    written_.clear();
  }

  const std::vector<std::pair<std::string, std::string>>& written() const { return written_; }
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  bool overwrite_;
  std::vector<std::pair<std::string, std::string>> written_;
};

inline void run_lattice(const RunConfig& cfg, OutputSink& sink) {
  const json& j = cfg.extra;
  double pi = specfun::pi;
  auto g = lattice::render_lattice(
      cfg.model, get_or(j, "x_min", -2 * pi), get_or(j, "x_max", 2 * pi),
      get_or(j, "p_min", -2 * pi), get_or(j, "p_max", 2 * pi),
      (std::size_t)get_or(j, "nx", 201), (std::size_t)get_or(j, "np", 201));
  sink.write("lattice.csv", io::grid_csv(g));
  json out;
  out["X"] = g.xs;
  out["P"] = g.ys;
  out["values"] = g.values;
  sink.write("lattice.json", out.dump(2) + "\n");
}

inline void run_bands(const RunConfig& cfg, OutputSink& sink) {
  const json& j = cfg.extra;
  bands::RationalFlux flux{(int)require_num(j, "p"), (int)require_num(j, "q")};
  auto s = bands::band_spectrum(flux, cfg.model.K, (std::size_t)get_or(j, "n_kx", 51),
                                (std::size_t)get_or(j, "n_kp", 51));
  std::string csv = "kX,kP,b,E\n";
  for (std::size_t i = 0; i < s.kXs.size(); ++i)
    for (std::size_t jj = 0; jj < s.kPs.size(); ++jj)
      for (int b = 0; b < flux.q; ++b)
        csv += io::fmt(s.kXs[i]) + "," + io::fmt(s.kPs[jj]) + "," + io::fmt(b) + "," +
               io::fmt(s.at(i, jj, b)) + "\n";
  sink.write("bands.csv", csv);
}

inline void run_butterfly(const RunConfig& cfg, OutputSink& sink) {
  const json& j = cfg.extra;
  auto intervals =
      bands::butterfly(get_or(j, "q_max", 10), cfg.model.K, get_or(j, "samples", 9));
  std::string csv = "p,q,lambda_over_2pi,band_index,E_min,E_max\n";
  for (const auto& b : intervals)
    csv += io::fmt(b.p) + "," + io::fmt(b.q) + "," + io::fmt(double(b.p) / b.q) + "," +
           io::fmt(b.band) + "," + io::fmt(b.e_min) + "," + io::fmt(b.e_max) + "\n";
  sink.write("butterfly.csv", csv);
}

inline void run_chern(const RunConfig& cfg, OutputSink& sink) {
  const json& j = cfg.extra;
  bands::RationalFlux flux{(int)require_num(j, "p"), (int)require_num(j, "q")};
  int Ng = get_or(j, "grid", 24);
  std::vector<int> cs(flux.q);
  for (int b = 0; b < flux.q; ++b) cs[b] = bands::chern_number(flux, b, cfg.model.K, Ng);
  auto gaps = bands::gap_labels(flux, cfg.model.K, cs);
  json out;
  out["flux"] = {{"p", flux.p}, {"q", flux.q}, {"lambda_over_2pi", double(flux.p) / flux.q}};
  out["band_chern"] = cs;
  out["gap_labels"] = json::array();
  for (const auto& g : gaps)
    out["gap_labels"].push_back(
        {{"gap", g.gap}, {"E_lo", g.e_lo}, {"E_hi", g.e_hi}, {"label", g.label}});
  sink.write("chern.json", out.dump(2) + "\n");
}

inline void run_eigq(const RunConfig& cfg, OutputSink& sink) {
  const json& j = cfg.extra;
  bands::RationalFlux flux{(int)require_num(j, "p"), (int)require_num(j, "q")};
  double pi = specfun::pi;
  auto Xs = linspace(get_or(j, "x_min", -2 * pi), get_or(j, "x_max", 2 * pi),
                     (std::size_t)get_or(j, "nx", 101));
  auto Ps = linspace(get_or(j, "p_min", -2 * pi), get_or(j, "p_max", 2 * pi),
                     (std::size_t)get_or(j, "np", 101));
  auto g = bands::eigenstate_q_function(flux, {get_or(j, "kx", 0.0), get_or(j, "kp", 0.0)},
                                        get_or(j, "band", 0), cfg.model.K, Xs, Ps);
  sink.write("eigq.csv", io::grid_csv(g, "X,P,Q"));
}

inline std::string w_csv(const dissipative::CharGrid& g) {
  std::string csv = "s,k,Re(w),Im(w)\n";
  for (std::size_t i = 0; i < g.N; ++i)
    for (std::size_t jj = 0; jj < g.N; ++jj)
      csv += io::fmt(g.coord(i)) + "," + io::fmt(g.coord(jj)) + "," +
             io::fmt(g.at(i, jj).real()) + "," + io::fmt(g.at(i, jj).imag()) + "\n";
  return csv;
}

inline void run_dissipate(const RunConfig& cfg, OutputSink& sink) {
  const json& j = cfg.extra;
  double L = get_or(j, "L", 26.0);
  std::size_t N = (std::size_t)get_or(j, "N", 512);
  std::string init = get_or<std::string>(j, "initial", "ground");
  auto g0 = dissipative::init_state(
      init == "ground" ? dissipative::InitialState::Ground : dissipative::InitialState::Coherent,
      L, N, cfg.model.lambda, get_or(j, "x0", 0.0), get_or(j, "p0", 0.0));
  int kicks = get_or(j, "kicks", 100);
  int every = get_or(j, "record_every", 0);
  auto res = dissipative::evolve(std::move(g0), cfg.model, kicks, every, get_or(j, "j_max", 0));
  std::string csv = "kick,Eq5_energy,number_energy\n";
  for (std::size_t i = 0; i < res.kicks.size(); ++i)
    csv += io::fmt(res.kicks[i]) + "," + io::fmt(res.energies[i].harmonic) + "," +
           io::fmt(res.energies[i].number) + "\n";
  sink.write("energy.csv", csv);
  for (const auto& [kick, grid] : res.snapshots) {
    char name[64];
    std::snprintf(name, sizeof name, "snapshot_%06d", kick);
    sink.write(std::string(name) + "_w.csv", w_csv(grid));
    auto Q = dissipative::husimi_from_char(grid);
    sink.write(std::string(name) + "_q.csv", io::grid_csv(Q.grid, "X,P,Q"));
  }
}

inline void run_potential(const RunConfig& cfg, OutputSink& sink) {
  const json& j = cfg.extra;
  std::string kind = get_or<std::string>(j, "kind", "contact");
  double lambda = cfg.model.lambda;
  int n_max = get_or(j, "n_max", 200);
  interaction::RealPotential pot;
  if (kind == "contact") {
    pot = interaction::ContactPotential{get_or(j, "eps", 1.0)};
  } else if (kind == "hardcore") {
    pot = interaction::HardcorePotential{get_or(j, "a", 0.05)};
  } else {
    // two-column CSV "x,V"; interpolated, symmetrized in x
    auto text = io::read_file(get_or<std::string>(j, "table", ""));
    std::vector<double> xs, vs;
    std::size_t pos = 0;
    while (pos < text.size()) {
      auto eol = text.find('\n', pos);
      std::string line = text.substr(pos, eol == std::string::npos ? eol : eol - pos);
      pos = (eol == std::string::npos) ? text.size() : eol + 1;
      if (line.empty() || !(std::isdigit(line[0]) || line[0] == '-' || line[0] == '+')) continue;
      auto comma = line.find(',');
      if (comma == std::string::npos) throw ParseError("potential table: expected 'x,V' rows");
      xs.push_back(std::stod(line.substr(0, comma)));
      vs.push_back(std::stod(line.substr(comma + 1)));
    }
    if (xs.size() < 2) throw ValidationError("potential table: need at least 2 rows");
    auto V = [xs, vs](double x) {
      x = std::abs(x);
      if (x <= xs.front()) return vs.front();
      if (x >= xs.back()) return vs.back();
      auto hi = std::upper_bound(xs.begin(), xs.end(), x) - xs.begin();
      double t = (x - xs[hi - 1]) / (xs[hi] - xs[hi - 1]);
      return (1 - t) * vs[hi - 1] + t * vs[hi];
    };
    pot = interaction::CustomPotential{V, nullptr};
  }
  auto p = interaction::build_potential(pot, lambda, n_max);
  if (!p.warning.empty()) std::fprintf(stderr, "warning: %s\n", p.warning.c_str());
  std::string csv = "N,R_N,U_N\n";
  for (int N = 0; N <= n_max; ++N)
    csv += io::fmt(N) + "," + io::fmt(interaction::phase_distance(N, lambda)) + "," +
           io::fmt(p.U_N[N]) + "\n";
  sink.write("potential_table.csv", csv);
  double r_max = get_or(j, "r_max", 10.0 * std::sqrt(lambda));
  int nr = get_or(j, "nr", 201);
  std::string smooth = "R,U_c,U_e\n";
  for (int i = 0; i < nr; ++i) {
    double R = r_max * i / (nr - 1);
    auto [uc, ue] = p.uc_ue(R);
    smooth += io::fmt(R) + "," + io::fmt(uc) + "," + io::fmt(ue) + "\n";
  }
  sink.write("potential_smooth.csv", smooth);
}

inline classical::ClassicalPotentialSpec nbody_pot(const json& j, bool lab) {
  std::string pot = get_or<std::string>(j, "pot", "contact");
  if (pot == "contact") {
    double eps = get_or(j, "eps", 0.194);
    if (lab) return classical::ContactSmoothed{eps, get_or(j, "sigma", 0.1)};
    return classical::RwaContact{eps};
  }
  double a = get_or(j, "a", 0.05);
  if (lab) return classical::HardcorePowerLaw{a, get_or(j, "n", 20)};
  return classical::RwaHardcore{a};
}

inline std::vector<classical::cplx> nbody_initial(const json& j) {
  if (!j.contains("initial") || !j.at("initial").is_array())
    throw ValidationError("nbody: 'initial' must be an array of [X, P] pairs");
  std::vector<classical::cplx> out;
  for (const auto& pair : j.at("initial")) {
    if (!pair.is_array() || pair.size() != 2)
      throw ValidationError("nbody: each initial entry must be [X, P]");
    out.emplace_back(pair[0].get<double>(), pair[1].get<double>());
  }
  if (out.empty()) throw ValidationError("nbody: 'initial' must not be empty");
  return out;
}

inline void run_nbody(const RunConfig& cfg, OutputSink& sink) {
  const json& j = cfg.extra;
  std::string mode = get_or<std::string>(j, "mode", "all");
  auto Z0 = nbody_initial(j);
  int periods = get_or(j, "periods", 200);
  double dt = get_or(j, "dt", 2.0 * specfun::pi / 200.0);
  if (mode == "poincare" || mode == "all") {
    classical::LabState s0;
    for (auto z : Z0) {
      s0.x.push_back(z.real());
      s0.p.push_back(z.imag());
    }
    auto traj = classical::poincare_evolve(s0, cfg.model, nbody_pot(j, true), periods,
                                           get_or(j, "rtol", 1e-10));
    std::string csv = "period,atom,x,p\n";
    for (std::size_t m = 0; m < traj.samples.size(); ++m)
      for (std::size_t i = 0; i < Z0.size(); ++i)
        csv += io::fmt((int)m) + "," + io::fmt((int)i) + "," + io::fmt(traj.samples[m].x[i]) +
               "," + io::fmt(traj.samples[m].p[i]) + "\n";
    sink.write("poincare.csv", csv);
  }
  if (mode == "rwa" || mode == "all") {
    auto traj = classical::rwa_evolve(Z0, cfg.model, nbody_pot(j, false),
                                      2.0 * specfun::pi * periods, dt);
    std::string csv = "t,atom,X,P\n";
    for (std::size_t m = 0; m < traj.times.size(); ++m)
      for (std::size_t i = 0; i < Z0.size(); ++i)
        csv += io::fmt(traj.times[m]) + "," + io::fmt((int)i) + "," +
               io::fmt(traj.positions[m][i].real()) + "," + io::fmt(traj.positions[m][i].imag()) +
               "\n";
    sink.write("rwa.csv", csv);
  }
  if (mode == "linear" || mode == "all") {
    std::string csv = "t,atom,X,P\n";
    for (int m = 0; m <= periods; ++m) {
      double t = 2.0 * specfun::pi * m;
      auto Z = classical::linear_solution(Z0, cfg.model, nbody_pot(j, false), t);
      for (std::size_t i = 0; i < Z0.size(); ++i)
        csv += io::fmt(t) + "," + io::fmt((int)i) + "," + io::fmt(Z[i].real()) + "," +
               io::fmt(Z[i].imag()) + "\n";
    }
    sink.write("linear.csv", csv);
  }
}

inline void run_crystal(const RunConfig& cfg, OutputSink& sink) {
  const json& j = cfg.extra;
  auto rep = classical::crystal_run(get_or(j, "atoms", 7), cfg.model, nbody_pot(j, false),
                                    get_or(j, "periods", 200),
                                    get_or(j, "dt", 2.0 * specfun::pi / 200.0));
  json out;
  out["max_excursion"] = rep.max_excursion;
  out["amplitude"] = rep.amplitude;
  out["edge_amplitude_predicted"] = rep.edge_amplitude_predicted;
  out["threshold"] = rep.threshold;
  out["survival_radius"] = rep.survival_radius;
  out["survived"] = rep.survived;
  sink.write("crystal.json", out.dump(2) + "\n");
}

}  // namespace detail

/// Executes a validated config: writes the declared artifacts plus
/// run_manifest.json into cfg.out_dir. On failure all partial outputs are
/// removed and the error propagates to the caller.
inline RunManifest run(const RunConfig& cfg) {
  auto t0 = std::chrono::steady_clock::now();
#ifdef _OPENMP
  if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
#endif
  detail::OutputSink sink(cfg.out_dir, cfg.overwrite);
  try {
    if (cfg.cmd == "lattice") detail::run_lattice(cfg, sink);
    else if (cfg.cmd == "bands") detail::run_bands(cfg, sink);
    else if (cfg.cmd == "butterfly") detail::run_butterfly(cfg, sink);
    else if (cfg.cmd == "chern") detail::run_chern(cfg, sink);
    else if (cfg.cmd == "eigq") detail::run_eigq(cfg, sink);
    else if (cfg.cmd == "dissipate") detail::run_dissipate(cfg, sink);
    else if (cfg.cmd == "potential") detail::run_potential(cfg, sink);
    else if (cfg.cmd == "nbody") detail::run_nbody(cfg, sink);
    else if (cfg.cmd == "crystal") detail::run_crystal(cfg, sink);
    else throw ValidationError("run: unknown subcommand '" + cfg.cmd + "'");
  } catch (...) {
    sink.discard_all();
    throw;
  }
  RunManifest m;
  m.config = cfg.extra;
  m.config["cmd"] = cfg.cmd;
  m.version = phasecrystal::version;
  m.duration_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  m.outputs = sink.written();
  io::write_file(cfg.out_dir / "run_manifest.json", m.to_json().dump(2) + "\n");
  return m;
}

/// Re-hashes every file listed in a manifest; true when all digests match.
inline bool verify_manifest(const std::filesystem::path& dir) {
  auto j = json::parse(io::read_file(dir / "run_manifest.json"));
  for (const auto& entry : j.at("outputs")) {
    auto content = io::read_file(dir / entry.at("path").get<std::string>());
    if (phasecrystal::detail::sha256_hex(content) != entry.at("sha256").get<std::string>())
      return false;
  }
  return true;
}

}  // namespace phasecrystal::cli
