#include <doctest.h>

#include <cmath>

#include "medflow/heatflow.hpp"
#include "medflow/rng.hpp"

using namespace medflow;

namespace {

std::shared_ptr<const PointCloud> torus_cloud(std::size_t n, double cell, std::uint64_t seed) {
  return std::make_shared<const PointCloud>(
      sample(Domain::torus(2), SamplerConfig::uniform_iid(static_cast<double>(n), seed), cell));
}

double brute_dirichlet(const GraphField& f) {
  const auto& c = *f.cloud;
  const std::size_t n = c.size();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double d2 = c.domain().dist2(c.point(i), c.point(j));
      if (d2 <= f.r * f.r) {
        const double diff = f.values[i] - f.values[j];
        s += diff * diff;
      }
    }
  const double nn = static_cast<double>(n);
  return s / (2.0 * nn * nn * std::pow(f.r, 4) * M_PI);
}

}  // namespace

TEST_CASE("dirichlet energy: constants, brute force, scaling") {
  auto cloud = torus_cloud(200, 0.15, 21);
  GraphField f = make_graph_field(cloud, 0.15, [](std::span<const double> x) {
    return std::sin(2.0 * M_PI * x[0]) * x[1];
  });

  GraphField c = f;
  for (auto& v : c.values) v = 4.2;
  CHECK(dirichlet_energy(c) == 0.0);

  CHECK(dirichlet_energy(f) == doctest::Approx(brute_dirichlet(f)).epsilon(1e-12));

  GraphField shifted = f, scaled = f;
  for (auto& v : shifted.values) v += 0.7;
  for (auto& v : scaled.values) v *= 3.0;
  CHECK(dirichlet_energy(shifted) == doctest::Approx(dirichlet_energy(f)).epsilon(1e-12));
  CHECK(dirichlet_energy(scaled) == doctest::Approx(9.0 * dirichlet_energy(f)).epsilon(1e-12));
}

TEST_CASE("heat step matches a dense direct solve") {
  auto cloud = torus_cloud(100, 0.25, 22);
  const double r = 0.25, tau = 2e-3;
  GraphField g = make_graph_field(cloud, r, [](std::span<const double> x) {
    return std::cos(2.0 * M_PI * x[0]) + 0.5 * std::sin(2.0 * M_PI * x[1]);
  });
  const auto got = heat_step(g, tau);

  // dense (I + tau L) assembled by brute force, solved by Gaussian elimination
  const std::size_t n = cloud->size();
  const double scale = 2.0 / (static_cast<double>(n) * std::pow(r, 4) * M_PI);
  std::vector<double> A(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double deg = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if (cloud->domain().dist2(cloud->point(i), cloud->point(j)) <= r * r) {
        A[i * n + j] -= tau * scale;
        deg += 1.0;
      }
    }
    A[i * n + i] = 1.0 + tau * scale * deg;
  }
  std::vector<double> x = g.values;
  // plain elimination with partial pivoting
  std::vector<std::size_t> piv(n);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t best = col;
    for (std::size_t rrow = col + 1; rrow < n; ++rrow)
      if (std::fabs(A[rrow * n + col]) > std::fabs(A[best * n + col])) best = rrow;
    piv[col] = best;
    for (std::size_t k = 0; k < n; ++k) std::swap(A[col * n + k], A[best * n + k]);
    std::swap(x[col], x[best]);
    for (std::size_t rrow = col + 1; rrow < n; ++rrow) {
      const double m = A[rrow * n + col] / A[col * n + col];
      for (std::size_t k = col; k < n; ++k) A[rrow * n + k] -= m * A[col * n + k];
      x[rrow] -= m * x[col];
    }
  }
  for (std::size_t col = n; col-- > 0;) {
    for (std::size_t k = col + 1; k < n; ++k) x[col] -= A[col * n + k] * x[k];
    x[col] /= A[col * n + col];
  }
  for (std::size_t i = 0; i < n; ++i)
    CHECK(got.values[i] == doctest::Approx(x[i]).epsilon(1e-8));
}

TEST_CASE("heat step basics: fixed point, mass, contraction") {
  auto cloud = torus_cloud(3000, 0.08, 23);
  GraphField c = make_graph_field(cloud, 0.08, [](std::span<const double>) { return 1.5; });
  const auto sc = heat_step(c, 1e-3);
  for (double v : sc.values) CHECK(v == doctest::Approx(1.5).epsilon(1e-10));

  Rng rng(1);
  GraphField u = c, v = c;
  for (auto& x : u.values) x = rng.uniform(-1.0, 1.0);
  for (auto& x : v.values) x = rng.uniform(-1.0, 1.0);
  HeatFlowOperator op(cloud, 0.08);
  const auto su = op.heat_step(u, 1e-3);
  const auto sv = op.heat_step(v, 1e-3);

  double mass0 = 0.0, mass1 = 0.0;
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    mass0 += u.values[i];
    mass1 += su.values[i];
  }
  CHECK(mass1 == doctest::Approx(mass0).epsilon(1e-8));

  CHECK(graph_distance(su, sv) <= graph_distance(u, v) + 1e-8);
}

TEST_CASE("minimizing movement dissipates the energy") {
  auto cloud = torus_cloud(2000, 0.1, 24);
  GraphField g = make_graph_field(cloud, 0.1, [](std::span<const double> x) {
    return std::sin(2.0 * M_PI * x[0]) + 0.2 * std::cos(4.0 * M_PI * x[1]);
  });
  Rng rng(8);
  for (auto& v : g.values) v += 0.1 * rng.uniform(-1.0, 1.0);

  const double tau = 5e-4, T = 0.05;
  const auto traj = minimizing_movement(g, tau, T);
  CHECK(traj.energy_monotone);
  CHECK(traj.energies.front() > traj.energies.back());

  // one movement step is one heat step
  const auto one = minimizing_movement(g, tau, tau);
  const auto hs = heat_step(g, tau);
  for (std::size_t i = 0; i < hs.values.size(); ++i)
    CHECK(one.final_field.values[i] == doctest::Approx(hs.values[i]).epsilon(1e-12));

  // minimizing-movement a priori bound against the near-limit flow
  const auto fine = minimizing_movement(g, tau / 8.0, T);
  const double bound = 6.0 * std::sqrt(tau) * std::sqrt(dirichlet_energy(g));
  CHECK(graph_distance(traj.final_field, fine.final_field) <= bound);
}

TEST_CASE("disconnected graphs warn but evolve per component") {
  std::vector<double> pts{0.1, 0.1, 0.12, 0.1, 0.9, 0.9, 0.88, 0.9};
  auto cloud = std::make_shared<const PointCloud>(
      PointCloud(Domain::box({0, 0}, {1, 1}), pts, 0.05));
  HeatFlowOperator op(cloud, 0.05);
  CHECK(op.components() == 2);
  GraphField g{cloud, {1.0, 1.0, -1.0, -1.0}, 0.05};
  const auto s = op.heat_step(g, 1e-4);
  CHECK(s.values[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(s.values[2] == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("tv energy: zero field, s = 1/2 reduction, domain checks") {
  auto cloud = torus_cloud(5000, 0.1, 25);
  GraphField zero = make_graph_field(cloud, 0.1, [](std::span<const double>) { return 0.0; });
  CHECK(tv_energy(zero, KernelSpec::ball(0.1), 0.5) == 0.0);

  GraphField bad = zero;
  bad.values[0] = 1.5;
  CHECK_THROWS(tv_energy(bad, KernelSpec::ball(0.1), 0.5));

  // supported strictly inside a box: the energy no longer depends on s
  Domain box = Domain::box({0.0, 0.0}, {1.0, 1.0});
  auto bcloud = std::make_shared<const PointCloud>(
      sample(box, SamplerConfig::uniform_iid(20000, 26), 0.05));
  GraphField chi = make_graph_field(bcloud, 0.05, [](std::span<const double> x) {
    return std::hypot(x[0] - 0.5, x[1] - 0.5) <= 0.2 ? 1.0 : 0.0;
  });
  const double e_half = tv_energy(chi, KernelSpec::ball(0.05), 0.5);
  const double e_other = tv_energy(chi, KernelSpec::ball(0.05), 0.3);
  CHECK(e_half == doctest::Approx(e_other).epsilon(1e-12));
  // and it approximates k1 * perimeter of the disk
  const double k1 = 4.0 / (3.0 * M_PI);
  CHECK(e_half == doctest::Approx(k1 * 2.0 * M_PI * 0.2).epsilon(0.12));
}

TEST_CASE("tv grid value on the half-space and the quarter-disk") {
  const double k1 = 4.0 / (3.0 * M_PI);
  auto half = [](std::span<const double> x) { return x[0] < 0.5 ? 1.0 : 0.0; };
  const double e = tv_energy_grid(half, Domain::torus(2), KernelSpec::ball(0.1), 0.5, 240);
  CHECK(e == doctest::Approx(2.0 * k1).epsilon(0.02));

  // quarter disk at the box corner: k1 [ H(arc) + cos(alpha) H(boundary part) ]
  Domain box = Domain::box({0.0, 0.0}, {1.0, 1.0});
  auto quarter = [](std::span<const double> x) {
    return std::hypot(x[0], x[1]) <= 0.5 ? 1.0 : 0.0;
  };
  for (double deg : {60.0, 120.0}) {
    const double a = deg * M_PI / 180.0;
    const double s = std::pow(std::sin(0.5 * a), 2.0);
    const double want = k1 * (0.5 * M_PI * 0.5 + std::cos(a) * 1.0);
    const double got = tv_energy_grid(quarter, box, KernelSpec::ball(0.04), s, 500);
    CHECK(got == doctest::Approx(want).epsilon(0.10));
  }
}

TEST_CASE("tl2 distances: identity, deltas, modes") {
  std::vector<double> x{0.1, 0.2, 0.8, 0.9}, f{1.0, -1.0};
  const auto same = tl2_distance(x, f, x, f, 2, Tl2Mode::ExactAssignment);
  CHECK(same.value == 0.0);

  std::vector<double> x0{0.0}, f0{0.0}, x1{1.0}, f1{1.0};
  CHECK(tl2_distance(x0, f0, x1, f1, 1, Tl2Mode::ExactAssignment).value ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));

  Rng rng(2);
  for (int inst = 0; inst < 50; ++inst) {
    const std::size_t n = 4 + rng.index(12);
    std::vector<double> xa(2 * n), fa(n), xb(2 * n), fb(n);
    for (auto& v : xa) v = rng.uniform();
    for (auto& v : xb) v = rng.uniform();
    for (auto& v : fa) v = rng.uniform();
    for (auto& v : fb) v = rng.uniform();
    const auto exact = tl2_distance(xa, fa, xb, fb, 2, Tl2Mode::ExactAssignment);
    const auto greedy = tl2_distance(xa, fa, xb, fb, 2, Tl2Mode::NearestMatch);
    CHECK(greedy.bound_only);
    CHECK(greedy.value >= exact.value - 1e-12);
  }

  std::vector<double> xs{0.5, 0.5}, fs{0.0};
  CHECK_THROWS_AS((void)tl2_distance(xs, fs, x, f, 2, Tl2Mode::ExactAssignment),
                  UnsupportedConfigurationError);
}
