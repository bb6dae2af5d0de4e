#include <catch2/catch.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "phasecrystal/cli.hpp"
#include "phasecrystal/interaction.hpp"

using namespace phasecrystal;
namespace pc = phasecrystal::cli;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

fs::path fresh_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / "phasecrystal_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("config parsing and validation", "[cli]") {
  auto cfg = pc::parse_config(json{{"cmd", "lattice"}, {"q0", 4}, {"K", 0.1}});
  CHECK(cfg.cmd == "lattice");
  CHECK(cfg.model.lambda == 1.0);  // defaults applied
  CHECK(cfg.model.n0 == 0.0);

  CHECK_THROWS_AS(pc::parse_config(json{{"cmd", "bands"}, {"p", 2}, {"q", 4}}),
                  ValidationError);  // not coprime
  CHECK_THROWS_AS(pc::parse_config(json{{"cmd", "lattice"}, {"qq0", 4}}), ValidationError);
  CHECK_THROWS_AS(pc::parse_config(json{{"cmd", "nope"}}), ValidationError);
  CHECK_THROWS_AS(pc::parse_config(json::array()), ParseError);
  CHECK_THROWS_AS(pc::parse_config(json{{"cmd", "dissipate"}, {"N", 100}}), ValidationError);

  auto fig5 = pc::parse_config(
      json{{"cmd", "dissipate"}, {"K", 0.1}, {"kappa", 1e-4}, {"kicks", 3000}});
  CHECK(fig5.model.kappa == 1e-4);
}

TEST_CASE("potential run reproduces the contact closed form", "[cli]") {
  auto dir = fresh_dir("potential");
  pc::RunConfig cfg = pc::parse_config(json{
      {"cmd", "potential"}, {"kind", "contact"}, {"eps", 1.0}, {"n_max", 30}, {"nr", 21}});
  cfg.out_dir = dir;
  auto manifest = pc::run(cfg);
  CHECK(manifest.outputs.size() == 2);
  CHECK(pc::verify_manifest(dir));

  std::ifstream f(dir / "potential_smooth.csv");
  std::string header;
  std::getline(f, header);
  CHECK(header == "R,U_c,U_e");
  std::string line;
  while (std::getline(f, line)) {
    double R, uc, ue;
    REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf", &R, &uc, &ue) == 3);
    auto [rc, re] = interaction::uc_ue_contact(1.0, 1.0, R);
    CHECK(uc == Approx(rc).margin(1e-10));
    CHECK(ue == Approx(re).margin(1e-10));
  }
}

TEST_CASE("butterfly run emits the mirror-symmetric spectrum", "[cli]") {
  auto dir = fresh_dir("butterfly");
  pc::RunConfig cfg =
      pc::parse_config(json{{"cmd", "butterfly"}, {"q_max", 8}, {"K", 1.0}, {"samples", 7}});
  cfg.out_dir = dir;
  pc::run(cfg);
  std::ifstream f(dir / "butterfly.csv");
  std::string header;
  std::getline(f, header);
  CHECK(header == "p,q,lambda_over_2pi,band_index,E_min,E_max");
  struct Row {
    int p, q, b;
    double lo, hi;
  };
  std::vector<Row> rows;
  std::string line;
  while (std::getline(f, line)) {
    Row r;
    double l;
    REQUIRE(std::sscanf(line.c_str(), "%d,%d,%lf,%d,%lf,%lf", &r.p, &r.q, &l, &r.b, &r.lo,
                        &r.hi) == 6);
    rows.push_back(r);
  }
  // lambda <-> 2 pi - lambda mirror: flux (q - p)/q has the same intervals
  for (const auto& r : rows) {
    if (r.p == r.q) continue;  // lambda = 2 pi sits on the mirror axis
    bool found = false;
    for (const auto& m : rows)
      if (m.q == r.q && m.p == r.q - r.p && m.b == r.b && std::abs(m.lo - r.lo) < 1e-9 &&
          std::abs(m.hi - r.hi) < 1e-9)
        found = true;
    CHECK(found);
  }
}

TEST_CASE("crystal run reports survival", "[cli][slow]") {
  auto dir = fresh_dir("crystal");
  pc::RunConfig cfg = pc::parse_config(json{{"cmd", "crystal"},
                                            {"pot", "contact"},
                                            {"eps", 0.194},
                                            {"atoms", 7},
                                            {"periods", 200},
                                            {"K", -0.02 / 3.14159265358979}});
  cfg.out_dir = dir;
  pc::run(cfg);
  auto rep = json::parse(io::read_file(dir / "crystal.json"));
  CHECK(rep.at("survived").get<bool>());
  CHECK(rep.at("amplitude").size() == 7);
}

TEST_CASE("runs are deterministic and overwrite is guarded", "[cli]") {
  auto dir1 = fresh_dir("det1"), dir2 = fresh_dir("det2");
  json j{{"cmd", "lattice"}, {"q0", 5}, {"K", 0.3}, {"nx", 64}, {"np", 64}};
  pc::RunConfig a = pc::parse_config(j), b = pc::parse_config(j);
  a.out_dir = dir1;
  b.out_dir = dir2;
  pc::run(a);
  pc::run(b);
  CHECK(io::read_file(dir1 / "lattice.csv") == io::read_file(dir2 / "lattice.csv"));

  CHECK_THROWS_AS(pc::run(a), ValidationError);  // refuse to clobber
  a.overwrite = true;
  CHECK_NOTHROW(pc::run(a));
}

TEST_CASE("failed runs leave no partial outputs", "[cli]") {
  auto dir = fresh_dir("fail");
  // chern at half flux raises GapClosure after the first eigensolve
  pc::RunConfig cfg = pc::parse_config(json{{"cmd", "chern"}, {"p", 1}, {"q", 2}});
  cfg.out_dir = dir;
  CHECK_THROWS_AS(pc::run(cfg), GapClosure);
  CHECK_FALSE(fs::exists(dir / "chern.json"));
  CHECK_FALSE(fs::exists(dir / "run_manifest.json"));
}

TEST_CASE("chern run writes band and gap labels", "[cli]") {
  auto dir = fresh_dir("chern");
  pc::RunConfig cfg =
      pc::parse_config(json{{"cmd", "chern"}, {"p", 1}, {"q", 3}, {"grid", 16}, {"K", 1.0}});
  cfg.out_dir = dir;
  pc::run(cfg);
  auto j = json::parse(io::read_file(dir / "chern.json"));
  CHECK(j.at("band_chern") == json::array({1, -2, 1}));
  REQUIRE(j.at("gap_labels").size() == 2);
  // symmetric labelling about E = 0: lower gap sums below, upper sums above
  CHECK(j.at("gap_labels")[0].at("label").get<int>() == 1);
  CHECK(j.at("gap_labels")[1].at("label").get<int>() == 1);
}

TEST_CASE("custom tabulated potential", "[cli]") {
  auto dir = fresh_dir("custom_pot");
  // tabulate V(x) = e^{-x^2} and compare U_N against the closed form
  // U_0 = 1/sqrt(1 + 2 lambda)
  std::string table = "x,V\n";
  for (int i = 0; i <= 400; ++i) {
    double x = 8.0 * i / 400.0;
    table += io::fmt(x) + "," + io::fmt(std::exp(-x * x)) + "\n";
  }
  io::write_file(dir / "vx.csv", table);
  pc::RunConfig cfg = pc::parse_config(json{{"cmd", "potential"},
                                            {"kind", "custom"},
                                            {"table", (dir / "vx.csv").string()},
                                            {"lambda", 0.8},
                                            {"n_max", 4},
                                            {"nr", 5}});
  cfg.out_dir = dir;
  pc::run(cfg);
  std::ifstream f(dir / "potential_table.csv");
  std::string header, line;
  std::getline(f, header);
  std::getline(f, line);
  double N, RN, U0;
  REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf", &N, &RN, &U0) == 3);
  CHECK(U0 == Approx(1.0 / std::sqrt(1.0 + 2.0 * 0.8)).margin(2e-4));
}

TEST_CASE("outputs do not depend on the thread cap", "[cli]") {
  auto dir1 = fresh_dir("thr1"), dir2 = fresh_dir("thr2");
  json j{{"cmd", "dissipate"}, {"K", 0.1}, {"kappa", 1e-3}, {"kicks", 40},
         {"L", 12.8}, {"N", 64}, {"record_every", 40}};
  pc::RunConfig a = pc::parse_config(j), b = pc::parse_config(j);
  a.out_dir = dir1;
  a.threads = 1;
  b.out_dir = dir2;
  b.threads = 2;
  pc::run(a);
  pc::run(b);
  CHECK(io::read_file(dir1 / "energy.csv") == io::read_file(dir2 / "energy.csv"));
  CHECK(io::read_file(dir1 / "snapshot_000040_q.csv") ==
        io::read_file(dir2 / "snapshot_000040_q.csv"));
}

TEST_CASE("every shipped preset parses and dispatches", "[cli]") {
  auto presets = fs::path(PHASECRYSTAL_SOURCE_DIR) / "presets";
  REQUIRE(fs::exists(presets));
  int count = 0;
  for (const auto& entry : fs::directory_iterator(presets)) {
    if (entry.path().extension() != ".json") continue;
    CHECK_NOTHROW(pc::parse_config_file(entry.path()));
    ++count;
  }
  CHECK(count >= 14);
}
