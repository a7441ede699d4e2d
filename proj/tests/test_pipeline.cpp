#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "medflow/pipeline.hpp"

using namespace medflow;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("rasterize: constants, disks, overlays") {
  auto cloud = std::make_shared<const PointCloud>(
      sample(Domain::torus(2), SamplerConfig::uniform_iid(60000, 51), 0.05));

  LevelSetField c = make_field(cloud, [](std::span<const double>) { return 2.0; });
  const auto flat = rasterize(c, 64);
  for (auto px : flat) CHECK(px == flat[0]);

  const double R = 0.3;
  LevelSetField disk = make_field(cloud, [&](std::span<const double> x) {
    return std::hypot(x[0] - 0.5, x[1] - 0.5) <= R ? 1.0 : 0.0;
  });
  const int res = 256;
  const auto img = rasterize(disk, res);
  std::size_t lit = 0;
  for (auto px : img) lit += (px == 255);
  const double want = M_PI * R * R * res * res;
  CHECK(static_cast<double>(lit) == doctest::Approx(want).epsilon(0.02));

  const auto overlay = rasterize_overlay(disk, res, 0.5);
  std::size_t marked = 0;
  for (std::size_t i = 0; i < overlay.size(); ++i) marked += (overlay[i] == 255 && img[i] != 255);
  CHECK(marked > 0);  // the level line is drawn outside the lit disk too
}

TEST_CASE("pipeline writes artifacts and is byte-reproducible") {
  RunConfig cfg;
  cfg.n = 4000;
  cfg.r = 0.05;
  cfg.T = 3e-4;
  cfg.mode = "mbo";
  cfg.initial = "disk:0.5,0.5,0.3";
  cfg.snapshots = {3e-4};
  cfg.raster = 64;
  cfg.out_dir = "pipe_out_a";
  cfg.verbosity = 0;

  REQUIRE(run_pipeline(cfg) == 0);
  CHECK(fs::exists("pipe_out_a/MANIFEST"));
  CHECK(fs::exists("pipe_out_a/config.resolved"));
  CHECK(fs::exists("pipe_out_a/snapshot_000.txt"));
  CHECK(fs::exists("pipe_out_a/snapshot_000.pgm"));
  CHECK(fs::exists("pipe_out_a/energy.csv"));

  // identical configs give byte-identical CSVs
  RunConfig cfg2 = cfg;
  cfg2.out_dir = "pipe_out_b";
  REQUIRE(run_pipeline(cfg2) == 0);
  CHECK(slurp("pipe_out_a/energy.csv") == slurp("pipe_out_b/energy.csv"));
  CHECK(slurp("pipe_out_a/snapshot_000.txt") == slurp("pipe_out_b/snapshot_000.txt"));

  // the energy CSV carries the config hash and seed header
  const std::string csv = slurp("pipe_out_a/energy.csv");
  CHECK(csv.find("config=") != std::string::npos);
  CHECK(csv.find("seed=0") != std::string::npos);
  CHECK(csv.find("step,time,dirichlet,tv,l2,min,max") != std::string::npos);

  fs::remove_all("pipe_out_a");
  fs::remove_all("pipe_out_b");
}

TEST_CASE("classification demo keeps a stable two-phase partition") {
  RunConfig cfg;
  cfg.n = 30000;
  cfg.r = 0.04;
  cfg.T = 2e-3;
  cfg.mode = "mbo";
  cfg.initial = "dumbbell";
  cfg.raster = 96;
  cfg.out_dir = "pipe_demo";
  cfg.verbosity = 0;
  cfg.energy_csv = false;
  REQUIRE(run_pipeline(cfg) == 0);

  // the final snapshot still holds both phases in comparable volume
  const std::string snap = slurp("pipe_demo/snapshot_000.txt");
  std::istringstream ss(snap);
  std::string line;
  std::getline(ss, line);
  std::getline(ss, line);
  std::size_t ones = 0, zeros = 0;
  double x, y, u;
  while (ss >> x >> y >> u) (u >= 0.5 ? ones : zeros)++;
  CHECK(ones > 2000);
  CHECK(zeros > 2000);
  fs::remove_all("pipe_demo");
}

TEST_CASE("seed sweeps emit per-seed artifacts") {
  RunConfig cfg;
  cfg.n = 2000;
  cfg.r = 0.06;
  cfg.T = 1e-4;
  cfg.initial = "radial:0.5,0.5";
  cfg.raster = 32;
  cfg.sweep_seeds = 2;
  cfg.energy_csv = false;
  cfg.out_dir = "pipe_sweep";
  cfg.verbosity = 0;
  REQUIRE(run_pipeline(cfg) == 0);
  CHECK(fs::exists("pipe_sweep/snapshot_000_s0.txt"));
  CHECK(fs::exists("pipe_sweep/snapshot_000_s1.txt"));
  fs::remove_all("pipe_sweep");
}

TEST_CASE("verify suite registry is wired") {
  const auto names = verify_suite_names();
  CHECK(names.size() == 12);
  CHECK_THROWS_AS((void)run_verify_suite("nope", 0), ConfigError);
}
