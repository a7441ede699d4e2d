#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "medflow/evolution.hpp"
#include "medflow/medians.hpp"
#include "medflow/rng.hpp"

using namespace medflow;

namespace {

std::shared_ptr<const PointCloud> torus_cloud(std::size_t n, double cell, std::uint64_t seed) {
  return std::make_shared<const PointCloud>(
      sample(Domain::torus(2), SamplerConfig::uniform_iid(static_cast<double>(n), seed), cell));
}

}  // namespace

TEST_CASE("a constant field is a fixed point") {
  auto cloud = torus_cloud(3000, 0.08, 1);
  auto cfg = EvolutionConfig::make(KernelSpec::annulus(0.5, 0.08), EvolutionMode::LevelSet, 0.0);
  LevelSetField u = make_field(cloud, [](std::span<const double>) { return 3.25; });
  const auto su = step(u, cfg);
  for (double v : su.values) CHECK(v == 3.25);
  CHECK(su.step_count == 1);
}

TEST_CASE("relabeling by a constant is exact") {
  auto cloud = torus_cloud(4000, 0.07, 2);
  auto cfg = EvolutionConfig::make(KernelSpec::ball(0.07), EvolutionMode::LevelSet, 0.0);
  Evolver ev(cloud, cfg);
  Rng rng(5);
  LevelSetField u;
  u.cloud = cloud;
  u.values.resize(cloud->size());
  for (auto& v : u.values) v = rng.uniform(-1.0, 1.0);
  const double c = 0.37;
  LevelSetField uc = u;
  for (auto& v : uc.values) v += c;
  const auto a = ev.step(u);
  const auto b = ev.step(uc);
  for (std::size_t i = 0; i < u.values.size(); ++i) CHECK(b.values[i] == a.values[i] + c);
}

TEST_CASE("physical time advances by c_A h per step") {
  auto cloud = torus_cloud(2000, 0.1, 3);
  auto cfg = EvolutionConfig::make(KernelSpec::annulus(0.9, 0.1), EvolutionMode::LevelSet, 0.0);
  Evolver ev(cloud, cfg);
  const double cA = (1.0 / 6.0) * (1.0 - 0.9 * 0.9 * 0.9) / (1.0 - 0.9);
  CHECK(ev.c_A() == doctest::Approx(cA).epsilon(1e-14));
  LevelSetField u = make_field(cloud, [](std::span<const double> x) { return x[0]; });
  auto su = ev.step(ev.step(u));
  CHECK(su.physical_time == doctest::Approx(2.0 * cA * 0.01).epsilon(1e-14));
}

TEST_CASE("run with T below one step returns only the initial field") {
  auto cloud = torus_cloud(1000, 0.1, 4);
  auto cfg = EvolutionConfig::make(KernelSpec::ball(0.1), EvolutionMode::LevelSet, 1e-9);
  LevelSetField g = make_field(cloud, [](std::span<const double> x) { return x[1]; });
  const double snaps[] = {0.0};
  auto traj = run(g, cfg, snaps);
  CHECK(traj.final_field.step_count == 0);
  REQUIRE(traj.snapshots.size() == 1);
  CHECK(traj.snapshots[0].values == g.values);
}

TEST_CASE("radial level sets advance like |x-x0|^2 + 2t") {
  // capped paraboloid: moving levels are exact circles while below the cap
  const double r = 0.04, kappa = 0.9;
  const double cap = 0.14;  // = 0.374^2
  auto cloud = torus_cloud(100000, r, 11);
  auto cfg = EvolutionConfig::make(KernelSpec::annulus(kappa, r), EvolutionMode::LevelSet, 0.0);
  cfg.threads = 0;
  Evolver ev(cloud, cfg);
  LevelSetField u = make_field(cloud, [&](std::span<const double> x) {
    const double dx = x[0] - 0.5, dy = x[1] - 0.5;
    return std::min(dx * dx + dy * dy, cap);
  });
  const int steps = 12;
  for (int s = 0; s < steps; ++s) u = ev.step(u);
  const double t = steps * ev.step_time();

  double sup = 0.0;
  for (std::size_t i = 0; i < cloud->size(); ++i) {
    const double dx = cloud->point(i)[0] - 0.5, dy = cloud->point(i)[1] - 0.5;
    const double rho2 = dx * dx + dy * dy;
    if (rho2 < 0.1 * 0.1 || rho2 > 0.3 * 0.3) continue;  // exclude the extremal region and cap
    const double want = rho2 + 2.0 * t;
    sup = std::max(sup, std::fabs(u.values[i] - want));
  }
  CHECK(sup <= 0.05);
}

TEST_CASE("threshold semantics and commutation") {
  auto cloud = torus_cloud(3000, 0.08, 6);
  auto cfg = EvolutionConfig::make(KernelSpec::ball(0.08), EvolutionMode::LevelSet, 0.0);
  Evolver ev(cloud, cfg);
  Rng rng(9);
  LevelSetField u;
  u.cloud = cloud;
  u.values.resize(cloud->size());
  for (auto& v : u.values) v = rng.uniform(0.0, 1.0);

  const double q = 0.4;
  const auto lhs = threshold(ev.step(u), q);
  const auto rhs = ev.step(threshold(u, q));
  CHECK(lhs.values == rhs.values);

  LevelSetField c = make_field(cloud, [](std::span<const double>) { return 2.0; });
  const auto tc = threshold(c, 2.0);
  for (double v : tc.values) CHECK(v == 1.0);  // >= convention

  // strictly increasing values thresholded at the median leave ceil(n/2) zeros
  std::vector<double> inc(101);
  for (std::size_t i = 0; i < inc.size(); ++i) inc[i] = static_cast<double>(i);
  std::vector<double> scratch;
  const double med = discrete_median(inc, scratch).value();
  std::size_t zeros = 0;
  for (double v : inc) zeros += (v < med);
  CHECK(zeros == (inc.size() + 1) / 2 - 1);  // values strictly below the lower median
}

TEST_CASE("MBO mode keeps indicators and shrinks a disk") {
  const double r = 0.02;
  auto cloud = torus_cloud(200000, r, 12);
  auto cfg = EvolutionConfig::make(KernelSpec::annulus(0.9, r), EvolutionMode::MBO, 0.0);
  Evolver ev(cloud, cfg);
  LevelSetField u = make_field(cloud, [](std::span<const double> x) {
    return std::hypot(x[0] - 0.5, x[1] - 0.5) <= 0.3 ? 1.0 : 0.0;
  });
  double area0 = 0.0;
  for (double v : u.values) area0 += v;
  for (int s = 0; s < 10; ++s) u = ev.step(u);
  double area1 = 0.0;
  for (double v : u.values) {
    CHECK((v == 0.0 || v == 1.0));
    area1 += v;
  }
  // dA/dt = -2 pi under curve shortening
  const double t = 10.0 * ev.step_time();
  const double expected_loss = 2.0 * M_PI * t * static_cast<double>(cloud->size());
  CHECK(area0 - area1 == doctest::Approx(expected_loss).epsilon(0.25));
}

TEST_CASE("trajectories are identical for any thread count") {
  const double r = 0.05;
  auto cloud = torus_cloud(20000, r, 13);
  LevelSetField g = make_field(cloud, [](std::span<const double> x) {
    return std::sin(2.0 * M_PI * x[0]) + 0.3 * std::cos(2.0 * M_PI * x[1]);
  });
  const double snaps[] = {0.002};
  std::vector<std::vector<double>> results;
  for (int threads : {1, 2, 4}) {
    auto cfg = EvolutionConfig::make(KernelSpec::annulus(0.5, r), EvolutionMode::LevelSet, 0.002);
    cfg.threads = threads;
    results.push_back(run(g, cfg, snaps).final_field.values);
  }
  CHECK(results[0] == results[1]);
  CHECK(results[0] == results[2]);
}

TEST_CASE("empty neighborhoods hold their value and are counted") {
  // two clusters plus one isolated point beyond every stencil
  std::vector<double> pts{0.1, 0.1, 0.11, 0.1, 0.1, 0.11, 0.9, 0.9};
  PointCloud cloud(Domain::box({0, 0}, {1, 1}), pts, 0.05);
  auto shared = std::make_shared<const PointCloud>(std::move(cloud));
  auto cfg = EvolutionConfig::make(KernelSpec::ball(0.05), EvolutionMode::LevelSet, 0.0);
  Evolver ev(shared, cfg);
  LevelSetField u;
  u.cloud = shared;
  u.values = {1.0, 2.0, 3.0, 42.0};
  const auto su = ev.step(u);
  CHECK(su.values[3] == 42.0);
  CHECK(ev.stats().empty_neighborhoods == 1);
}

TEST_CASE("SSL labels are reset after each step") {
  const double r = 0.08;
  auto cloud = torus_cloud(5000, r, 14);
  auto cfg = EvolutionConfig::make(KernelSpec::ball(r), EvolutionMode::SSL, 0.0);
  cfg.ssl.labels = {{0, 1.0}, {1, 0.0}};
  cfg.ssl.r0 = 0.02;
  cfg.ssl.R = 0.2;
  Evolver ev(cloud, cfg);
  LevelSetField u = make_field(cloud, [](std::span<const double>) { return 0.5; });
  u.values[0] = 1.0;
  u.values[1] = 0.0;
  const auto su = ev.step(u);
  CHECK(su.values[0] == 1.0);
  CHECK(su.values[1] == 0.0);
}

TEST_CASE("contact angle on synthetic wedge fields") {
  Domain box = Domain::box({0.0, 0.0}, {1.0, 1.0});
  auto cloud = std::make_shared<const PointCloud>(
      sample(box, SamplerConfig::uniform_iid(150000, 15), 0.03));
  for (double deg : {60.0, 90.0, 120.0}) {
    const double a = deg * M_PI / 180.0;
    // wedge with its apex at (0.5, 0): the interface leaves the boundary at
    // angle `deg` measured through the wetted side (x < interface)
    LevelSetField f = make_field(cloud, [&](std::span<const double> x) {
      const double nx = std::sin(a), ny = -std::cos(a);
      return (x[0] - 0.5) * nx + x[1] * ny <= 0.0 ? 1.0 : 0.0;
    });
    const auto got = contact_angle(f, 0.5, 0.03);
    REQUIRE(got.has_value());
    CHECK(*got * 180.0 / M_PI == doctest::Approx(deg).epsilon(0.05));
  }

  // a field that never reaches the boundary has no contact angle
  LevelSetField mid = make_field(cloud, [](std::span<const double> x) {
    return std::hypot(x[0] - 0.5, x[1] - 0.5) <= 0.2 ? 1.0 : 0.0;
  });
  CHECK_FALSE(contact_angle(mid, 0.5, 0.03).has_value());

  // a fully wetted boundary reads pi
  LevelSetField wet = make_field(cloud, [](std::span<const double>) { return 1.0; });
  const auto full = contact_angle(wet, 0.5, 0.03);
  REQUIRE(full.has_value());
  CHECK(*full == doctest::Approx(M_PI));
}

TEST_CASE("snapshot files carry the step metadata") {
  auto cloud = torus_cloud(100, 0.2, 16);
  LevelSetField u = make_field(cloud, [](std::span<const double> x) { return x[0]; });
  u.step_count = 5;
  u.physical_time = 0.125;
  const std::string path = "snap_test.txt";
  save_snapshot(path, u, EvolutionMode::LevelSet);
  std::FILE* f = std::fopen(path.c_str(), "r");
  REQUIRE(f);
  char line1[256], line2[256];
  REQUIRE(std::fgets(line1, sizeof line1, f));
  REQUIRE(std::fgets(line2, sizeof line2, f));
  std::fclose(f);
  CHECK(std::string(line1).find("# medflow-cloud v1 d=2 n=100") == 0);
  CHECK(std::string(line2).find("# t=0.125 n=5 mode=levelset") == 0);
  std::remove(path.c_str());
}
