#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <set>

#include "medflow/domain.hpp"
#include "medflow/rng.hpp"

using namespace medflow;

namespace {

// brute-force fixed-radius scan with the same strict/non-strict convention
std::vector<std::uint32_t> brute_neighbors(const PointCloud& c, std::span<const double> center,
                                           double ro, double ri) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t i = 0; i < c.size(); ++i) {
    const double d2 = c.domain().dist2(center, c.point(i));
    if (d2 > ri * ri && d2 <= ro * ro) out.push_back(i);
  }
  return out;
}

}  // namespace

TEST_CASE("uniform iid sampling has exact count and range") {
  auto cloud = sample(Domain::torus(2), SamplerConfig::uniform_iid(1000, 7), 0.1);
  CHECK(cloud.size() == 1000);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    auto p = cloud.point(i);
    CHECK(p[0] >= 0.0);
    CHECK(p[0] < 1.0);
    CHECK(p[1] >= 0.0);
    CHECK(p[1] < 1.0);
  }
}

TEST_CASE("poisson counts have the right mean") {
  // E[K] = 500; the mean over 200 seeds stays within 3 sigma of it
  double sum = 0.0;
  const int trials = 200;
  for (int s = 0; s < trials; ++s) {
    auto cloud = sample(Domain::torus(2), SamplerConfig::poisson(500.0, 1000 + s), 0.1);
    sum += static_cast<double>(cloud.size());
  }
  const double mean = sum / trials;
  CHECK(std::fabs(mean - 500.0) <= 3.0 * std::sqrt(500.0 / trials));
}

TEST_CASE("box rejection keeps every sample strictly inside") {
  // unit box with a disk removed from the middle
  Sdf sdf = [](std::span<const double> x) {
    double box = -1e300;
    for (int i = 0; i < 2; ++i) box = std::max(box, std::max(0.0 - x[i], x[i] - 1.0));
    return std::max(box, 0.2 - std::hypot(x[0] - 0.5, x[1] - 0.5));
  };
  Domain dom = Domain::box({0.0, 0.0}, {1.0, 1.0}, sdf);
  auto cloud = sample(dom, SamplerConfig::uniform_iid(2000, 3), 0.1);
  CHECK(cloud.size() == 2000);
  for (std::size_t i = 0; i < cloud.size(); ++i)
    CHECK(dom.signed_distance(cloud.point(i)) < 0.0);
}

TEST_CASE("neighbors equals the brute-force scan") {
  Rng rng(99);
  for (int rep = 0; rep < 4; ++rep) {
    const bool torus = rep % 2 == 0;
    Domain dom = torus ? Domain::torus(2) : Domain::box({0.0, 0.0}, {1.0, 1.0});
    auto cloud = sample(dom, SamplerConfig::uniform_iid(400 + 30 * rep, 17 + rep), 0.12);
    for (int q = 0; q < 100; ++q) {
      double center[2] = {rng.uniform(), rng.uniform()};
      const double ro = rng.uniform(0.01, 0.12);
      const double ri = rng.uniform() < 0.3 ? 0.0 : rng.uniform(0.0, ro);
      const auto got = cloud.neighbors({center, 2}, ro, ri);
      const auto want = brute_neighbors(cloud, {center, 2}, ro, ri);
      CHECK(got == want);
    }
  }
}

TEST_CASE("torus wraparound is honored by queries") {
  auto cloud = sample(Domain::torus(2), SamplerConfig::uniform_iid(600, 5), 0.06);
  double center[2] = {0.99, 0.5};
  const auto got = cloud.neighbors({center, 2}, 0.05, 0.0);
  const auto want = brute_neighbors(cloud, {center, 2}, 0.05, 0.0);
  CHECK(got == want);
  // some neighbor should live on the other side of the seam
  bool wrapped = false;
  for (auto i : got) wrapped |= (cloud.point(i)[0] < 0.05);
  CHECK(wrapped);
}

TEST_CASE("empty and degenerate queries") {
  std::vector<double> pts{0.1, 0.1, 0.9, 0.9};
  PointCloud cloud(Domain::torus(2), pts, 0.2);
  double far[2] = {0.5, 0.5};
  CHECK(cloud.neighbors({far, 2}, 0.05).empty());
  double at[2] = {0.1, 0.1};
  CHECK(cloud.neighbors({at, 2}, 0.05, 0.05).empty());  // r_inner == r_outer
  CHECK_THROWS_AS((void)cloud.neighbors({at, 2}, 0.5, 0.0), IndexConfigError);
}

TEST_CASE("sampling is reproducible bit for bit") {
  auto a = sample(Domain::torus(3), SamplerConfig::uniform_iid(500, 123), 0.2);
  auto b = sample(Domain::torus(3), SamplerConfig::uniform_iid(500, 123), 0.2);
  REQUIRE(a.size() == b.size());
  CHECK(std::memcmp(a.positions().data(), b.positions().data(),
                    a.positions().size() * sizeof(double)) == 0);
}

TEST_CASE("torus metric symmetry and wrap bound") {
  Domain dom = Domain::torus(3);
  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    double a[3] = {rng.uniform(), rng.uniform(), rng.uniform()};
    double b[3] = {rng.uniform(), rng.uniform(), rng.uniform()};
    CHECK(dom.dist2({a, 3}, {b, 3}) == dom.dist2({b, 3}, {a, 3}));
    CHECK(dom.dist({a, 3}, {b, 3}) <= std::sqrt(3.0) / 2.0 + 1e-15);
  }
}

TEST_CASE("volume fractions: interior, face, corner") {
  Domain box = Domain::box({0.0, 0.0}, {1.0, 1.0});
  double c1[2] = {0.5, 0.5};
  auto f = volume_fractions(box, {c1, 2}, 0.1);
  CHECK(f.frac_in == 1.0);
  CHECK(f.frac_out == 0.0);

  double c2[2] = {0.5, 0.0};  // flat face
  f = volume_fractions(box, {c2, 2}, 0.05);
  CHECK(f.frac_in == doctest::Approx(0.5).epsilon(0.004));
  CHECK(f.frac_in + f.frac_out == 1.0);

  double c3[2] = {0.0, 0.0};  // right-angle corner
  f = volume_fractions(box, {c3, 2}, 0.05);
  CHECK(f.frac_in == doctest::Approx(0.25).epsilon(0.008));
}

TEST_CASE("nearest matches brute force") {
  auto cloud = sample(Domain::torus(2), SamplerConfig::uniform_iid(300, 8), 0.1);
  Rng rng(21);
  for (int q = 0; q < 100; ++q) {
    double x[2] = {rng.uniform(), rng.uniform()};
    const auto got = cloud.nearest({x, 2});
    double best = 1e300;
    std::uint32_t want = 0;
    for (std::uint32_t i = 0; i < cloud.size(); ++i) {
      const double d2 = cloud.domain().dist2({x, 2}, cloud.point(i));
      if (d2 < best) {
        best = d2;
        want = i;
      }
    }
    CHECK(got == want);
  }
}

TEST_CASE("cloud serialization round-trips") {
  auto cloud = sample(Domain::torus(2), SamplerConfig::uniform_iid(128, 77), 0.1);
  const std::string path = "roundtrip_cloud.txt";
  save_cloud(path, cloud);
  auto back = load_cloud(path, 0.1);
  REQUIRE(back.size() == cloud.size());
  CHECK(back.seed() == cloud.seed());
  CHECK(std::memcmp(back.positions().data(), cloud.positions().data(),
                    cloud.positions().size() * sizeof(double)) == 0);
  std::remove(path.c_str());
}
