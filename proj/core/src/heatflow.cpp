#include "medflow/heatflow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "medflow/parallel.hpp"

namespace medflow {

GraphField make_graph_field(std::shared_ptr<const PointCloud> cloud, double r,
                            const std::function<double(std::span<const double>)>& f) {
  GraphField out;
  out.values.resize(cloud->size());
  for (std::size_t i = 0; i < cloud->size(); ++i) out.values[i] = f(cloud->point(i));
  out.cloud = std::move(cloud);
  out.r = r;
  return out;
}

double dirichlet_energy(const GraphField& f, int threads) {
  const auto& cloud = *f.cloud;
  const std::size_t n = cloud.size();
  const int d = cloud.dim();
  const double r = f.r;
  std::vector<double> partial(n, 0.0);
  parallel_for(n, threads, [&](std::size_t b, std::size_t e) {
    std::vector<std::uint32_t> ids;
    for (std::size_t i = b; i < e; ++i) {
      cloud.neighbors_unsorted_into(cloud.point(i), r, 0.0, ids);
      double s = 0.0;
      const double ui = f.values[i];
      for (std::uint32_t j : ids) {
        const double diff = ui - f.values[j];
        s += diff * diff;
      }
      partial[i] = s;
    }
  });
  const double sum = pairwise_sum(partial);
  const double wd = unit_ball_volume(d);
  const double nn = static_cast<double>(n);
  return sum / (2.0 * nn * nn * std::pow(r, d + 2) * wd);
}

double graph_distance(const GraphField& a, const GraphField& b) {
  if (a.values.size() != b.values.size())
    throw UnsupportedConfigurationError("graph_distance needs matching supports");
  std::vector<double> diff(a.values.size());
  for (std::size_t i = 0; i < diff.size(); ++i) {
    const double d = a.values[i] - b.values[i];
    diff[i] = d * d;
  }
  return std::sqrt(pairwise_sum(diff) / static_cast<double>(diff.size()));
}

// ---------------------------------------------------------------------------

HeatFlowOperator::HeatFlowOperator(std::shared_ptr<const PointCloud> cloud, double r,
                                   LaplacianNormalization norm, int threads)
    : cloud_(std::move(cloud)), r_(r), norm_(norm), threads_(threads) {
  const std::size_t n = cloud_->size();
  const int d = cloud_->dim();

  std::vector<std::vector<std::uint32_t>> rows(n);
  parallel_for(n, threads_, [&](std::size_t b, std::size_t e) {
    std::vector<std::uint32_t> ids;
    for (std::size_t i = b; i < e; ++i) {
      cloud_->neighbors_unsorted_into(cloud_->point(i), r_, 0.0, ids);
      rows[i].assign(ids.begin(), ids.end());
    }
  });
  row_start_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i)
    row_start_[i + 1] = row_start_[i] + static_cast<std::uint32_t>(rows[i].size());
  col_.resize(row_start_[n]);
  for (std::size_t i = 0; i < n; ++i)
    std::copy(rows[i].begin(), rows[i].end(), col_.begin() + row_start_[i]);

  scale_ = 2.0 / (static_cast<double>(n) * std::pow(r_, d + 2) * unit_ball_volume(d));

  // connectivity (union-find over edges)
  std::vector<std::uint32_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0u);
  std::function<std::uint32_t(std::uint32_t)> find = [&](std::uint32_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::uint32_t k = row_start_[i]; k < row_start_[i + 1]; ++k) {
      const auto a = find(static_cast<std::uint32_t>(i)), b = find(col_[k]);
      if (a != b) parent[a] = b;
    }
  std::size_t comps = 0;
  for (std::size_t i = 0; i < n; ++i) comps += (find(static_cast<std::uint32_t>(i)) == i);
  components_ = comps;
  if (components_ > 1)
    std::fprintf(stderr,
                 "medflow: warning: radius-%g graph has %zu components "
                 "(below the connectivity regime); evolving per component\n",
                 r_, components_);
}

void HeatFlowOperator::apply(std::span<const double> u, std::span<double> out) const {
  const std::size_t n = cloud_->size();
  parallel_for(n, threads_, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      double s = 0.0;
      const std::uint32_t deg = row_start_[i + 1] - row_start_[i];
      for (std::uint32_t k = row_start_[i]; k < row_start_[i + 1]; ++k) s += u[col_[k]];
      double row_scale = scale_;
      if (norm_ == LaplacianNormalization::Degree && deg > 0)
        row_scale = 1.0 / (static_cast<double>(deg) * r_ * r_);
      out[i] = row_scale * (static_cast<double>(deg) * u[i] - s);
    }
  });
}

GraphField HeatFlowOperator::heat_step(const GraphField& f, double tau) const {
  if (!(tau > 0.0)) throw UnsupportedConfigurationError("heat_step requires tau > 0");
  if (f.cloud.get() != cloud_.get())
    throw UnsupportedConfigurationError("field was built on a different cloud");
  const std::size_t n = f.values.size();

  // CG on (I + tau L), SPD; all dot products use the fixed pairwise tree
  std::vector<double> x = f.values;  // warm start
  std::vector<double> Ax(n), rres(n), p(n), Ap(n), tmp(n);

  auto matvec = [&](std::span<const double> v, std::span<double> out) {
    apply(v, out);
    for (std::size_t i = 0; i < n; ++i) out[i] = v[i] + tau * out[i];
  };
  auto dot = [&](std::span<const double> a, std::span<const double> b) {
    for (std::size_t i = 0; i < n; ++i) tmp[i] = a[i] * b[i];
    return pairwise_sum(tmp);
  };

  matvec(x, Ax);
  for (std::size_t i = 0; i < n; ++i) rres[i] = f.values[i] - Ax[i];
  p = rres;
  double rr = dot(rres, rres);
  const double b2 = std::max(dot(f.values, f.values), 1e-300);
  const double tol2 = 1e-20 * b2;  // relative residual 1e-10

  const int cap = 2000;
  int it = 0;
  while (rr > tol2 && it++ < cap) {
    matvec(p, Ap);
    const double alpha = rr / dot(p, Ap);
    for (std::size_t i = 0; i < n; ++i) x[i] += alpha * p[i];
    for (std::size_t i = 0; i < n; ++i) rres[i] -= alpha * Ap[i];
    const double rr_new = dot(rres, rres);
    const double beta = rr_new / rr;
    rr = rr_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = rres[i] + beta * p[i];
  }
  if (rr > tol2)
    throw SolverFailureError("heat_step CG stalled", std::sqrt(rr / b2));

  GraphField out;
  out.cloud = f.cloud;
  out.r = f.r;
  out.values = std::move(x);
  return out;
}

GraphField heat_step(const GraphField& f, double tau, LaplacianNormalization norm, int threads) {
  HeatFlowOperator op(f.cloud, f.r, norm, threads);
  return op.heat_step(f, tau);
}

HeatTrajectory minimizing_movement(const GraphField& g, double tau, double T,
                                   std::span<const double> snapshot_times, int threads) {
  HeatFlowOperator op(g.cloud, g.r, LaplacianNormalization::ExpectedDegree, threads);
  HeatTrajectory traj;
  traj.requested_times.assign(snapshot_times.begin(), snapshot_times.end());
  traj.snapshots.resize(snapshot_times.size());

  const std::int64_t steps = static_cast<std::int64_t>(std::ceil(T / tau - 1e-12));
  std::vector<std::int64_t> snap_step(snapshot_times.size());
  for (std::size_t i = 0; i < snapshot_times.size(); ++i)
    snap_step[i] = std::clamp<std::int64_t>(
        static_cast<std::int64_t>(std::floor(snapshot_times[i] / tau * (1.0 + 1e-15))), 0, steps);

  GraphField cur = g;
  traj.energies.push_back(dirichlet_energy(cur, threads));
  for (std::size_t i = 0; i < snap_step.size(); ++i)
    if (snap_step[i] == 0) traj.snapshots[i] = cur;

  for (std::int64_t s = 1; s <= steps; ++s) {
    GraphField next = op.heat_step(cur, tau);
    traj.max_step_distance = std::max(traj.max_step_distance, graph_distance(next, cur));
    const double en = dirichlet_energy(next, threads);
    // implicit Euler on a convex energy is a descent method
    if (en > traj.energies.back() * (1.0 + 1e-9) + 1e-300) traj.energy_monotone = false;
    traj.energies.push_back(en);
    cur = std::move(next);
    for (std::size_t i = 0; i < snap_step.size(); ++i)
      if (snap_step[i] == s) traj.snapshots[i] = cur;
  }
  traj.final_field = cur;
  return traj;
}

// ---------------------------------------------------------------------------
// nonlocal TV / Young-angle energy

namespace {

void check_unit_range(std::span<const double> v) {
  for (double x : v)
    if (!(x >= 0.0 && x <= 1.0))
      throw Error(errc::heatflow, "tv_energy requires values in [0,1]");
}

}  // namespace

double tv_energy(const GraphField& f, const KernelSpec& spec, double s, int threads) {
  check_unit_range(f.values);
  const auto& cloud = *f.cloud;
  const std::size_t n = cloud.size();
  const int d = cloud.dim();
  const double rh = spec.r;  // sqrt(h)
  const double kap = spec.is_indicator() ? spec.kappa_at_r() : 0.0;
  const double r_in = kap * rh;
  const double wd = unit_ball_volume(d);
  const double kernel_mass = wd * std::pow(rh, d) * (1.0 - std::pow(kap, d));
  const bool radial = !spec.is_indicator();

  std::vector<double> partial(n, 0.0);
  parallel_for(n, threads, [&](std::size_t b, std::size_t e) {
    std::vector<std::uint32_t> ids;
    for (std::size_t i = b; i < e; ++i) {
      cloud.neighbors_unsorted_into(cloud.point(i), rh, r_in, ids);
      double acc = 0.0;
      const double ui = f.values[i];
      for (std::uint32_t j : ids) {
        double w = 1.0;
        if (radial) w = spec.radial(cloud.domain().dist(cloud.point(i), cloud.point(j)) / rh);
        acc += w * std::fabs(ui - f.values[j]);
      }
      partial[i] = acc;
    }
  });
  const double nn = static_cast<double>(n);
  // empirical double integral with the unit-mass kernel
  const double interior = pairwise_sum(partial) / (nn * nn * kernel_mass);

  // The full-space term of the Young-angle energy contains the interior pairs
  // again plus the interaction with the zero extension outside D:
  //   E_h = [ 2s I + (1-2s)(I + 2C) ] / sqrt(h) = [ I + 2(1-2s) C ] / sqrt(h).
  double boundary = 0.0;
  if (cloud.domain().kind() == Domain::Kind::Box && s != 0.5) {
    if (spec.shape != KernelSpec::Shape::Ball)
      throw UnsupportedConfigurationError(
          "the Young-angle boundary term is defined for the ball kernel");
    std::vector<double> bp(n, 0.0);
    parallel_for(n, threads, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        if (f.values[i] == 0.0) continue;
        const auto x = cloud.point(i);
        if (cloud.domain().signed_distance(x) <= -rh) continue;
        bp[i] = f.values[i] * volume_fractions(cloud.domain(), x, rh).frac_out;
      }
    });
    boundary = pairwise_sum(bp) / nn;  // C, the D x D^c interaction
  }
  return (interior + 2.0 * (1.0 - 2.0 * s) * boundary) / rh;
}

double tv_energy_grid(const std::function<double(std::span<const double>)>& u,
                      const Domain& domain, const KernelSpec& spec, double s, int resolution,
                      int threads) {
  if (domain.dim() != 2)
    throw UnsupportedConfigurationError("tv_energy_grid is implemented for d = 2");
  const int M = resolution;
  const double rh = spec.r;
  const double kap = spec.is_indicator() ? spec.kappa_at_r() : 0.0;

  const double lx = domain.hi()[0] - domain.lo()[0];
  const double ly = domain.hi()[1] - domain.lo()[1];
  const double dx = lx / M, dy = ly / M;
  const bool torus = domain.is_torus();

  // midpoint field samples; outside-the-box samples extend by zero
  std::vector<double> vals(static_cast<std::size_t>(M) * M);
  std::vector<std::uint8_t> inside(static_cast<std::size_t>(M) * M, 1);
  parallel_for(static_cast<std::size_t>(M) * M, threads, [&](std::size_t b, std::size_t e) {
    double x[2];
    for (std::size_t q = b; q < e; ++q) {
      const int iy = static_cast<int>(q / M), ix = static_cast<int>(q % M);
      x[0] = domain.lo()[0] + (ix + 0.5) * dx;
      x[1] = domain.lo()[1] + (iy + 0.5) * dy;
      if (!torus && !(domain.signed_distance({x, 2}) < 0.0)) {
        inside[q] = 0;
        vals[q] = 0.0;
        continue;
      }
      const double v = u({x, 2});
      if (!(v >= 0.0 && v <= 1.0))
        throw Error(errc::heatflow, "tv_energy requires values in [0,1]");
      vals[q] = v;
    }
  });

  // lattice offsets inside the stencil
  const int kx = static_cast<int>(std::floor(rh / dx));
  const int ky = static_cast<int>(std::floor(rh / dy));
  struct Off {
    int ox, oy;
    double w;
  };
  std::vector<Off> offs;
  double mass = 0.0;
  for (int oy = -ky; oy <= ky; ++oy) {
    for (int ox = -kx; ox <= kx; ++ox) {
      if (ox == 0 && oy == 0) continue;
      const double rr = std::hypot(ox * dx, oy * dy);
      if (rr > rh || rr <= kap * rh) continue;
      double w = 1.0;
      if (!spec.is_indicator()) w = spec.radial(rr / rh);
      offs.push_back({ox, oy, w});
      mass += w;
    }
  }
  if (offs.empty()) throw UnsupportedConfigurationError("tv grid resolution too coarse for h");
  // the center cell belongs to the ball stencil's mass even though its
  // |u(x)-u(x)| contribution vanishes
  if (kap == 0.0) mass += spec.is_indicator() ? 1.0 : spec.radial(0.0);

  // E_h = [ I + 2(1-2s) C ] / sqrt(h); ordered interior pairs are visited from
  // both endpoints, the complement interaction only from the inside endpoint,
  // hence its explicit factor 2
  std::vector<double> partial(static_cast<std::size_t>(M) * M, 0.0);
  parallel_for(static_cast<std::size_t>(M) * M, threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t q = b; q < e; ++q) {
      if (!inside[q]) continue;
      const int iy = static_cast<int>(q / M), ix = static_cast<int>(q % M);
      double inter = 0.0, cross = 0.0;
      const double ui = vals[q];
      for (const Off& o : offs) {
        int jx = ix + o.ox, jy = iy + o.oy;
        bool in_j = true;
        if (torus) {
          jx = (jx % M + M) % M;
          jy = (jy % M + M) % M;
        } else if (jx < 0 || jx >= M || jy < 0 || jy >= M) {
          in_j = false;
        }
        if (in_j && inside[static_cast<std::size_t>(jy) * M + jx]) {
          inter += o.w * std::fabs(ui - vals[static_cast<std::size_t>(jy) * M + jx]);
        } else {
          cross += o.w * ui;
        }
      }
      partial[q] = inter + 2.0 * (1.0 - 2.0 * s) * cross;
    }
  });
  // the mean over the discrete kernel replaces the unit-mass kernel integral
  const double cell_area = dx * dy;
  return pairwise_sum(partial) * cell_area / (mass * rh);
}

// ---------------------------------------------------------------------------
// TL2

double solve_assignment(const std::vector<double>& cost, std::size_t n,
                        std::vector<std::uint32_t>& col_of_row) {
  // shortest augmenting paths with potentials
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  col_of_row.assign(n, 0);
  double total = 0.0;
  for (std::size_t j = 1; j <= n; ++j) {
    if (p[j] == 0) continue;
    col_of_row[p[j] - 1] = static_cast<std::uint32_t>(j - 1);
    total += cost[(p[j] - 1) * n + (j - 1)];
  }
  return total;
}

TransportDistance tl2_distance(std::span<const double> xa, std::span<const double> fa,
                               std::span<const double> xb, std::span<const double> fb, int dim,
                               Tl2Mode mode) {
  const std::size_t na = fa.size(), nb = fb.size();
  if (na != nb || na == 0)
    throw UnsupportedConfigurationError("tl2_distance needs equal nonempty uniform supports");
  const std::size_t n = na;

  auto cost_of = [&](std::size_t i, std::size_t j) {
    double c = 0.0;
    for (int k = 0; k < dim; ++k) {
      const double d = xa[i * dim + k] - xb[j * dim + k];
      c += d * d;
    }
    const double df = fa[i] - fb[j];
    return c + df * df;
  };

  TransportDistance out;
  if (mode == Tl2Mode::ExactAssignment) {
    if (n > 64)
      throw UnsupportedConfigurationError("ExactAssignment supports at most 64 points");
    std::vector<double> cost(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) cost[i * n + j] = cost_of(i, j);
    std::vector<std::uint32_t> plan;
    const double total = solve_assignment(cost, n, plan);
    out.value = std::sqrt(std::max(0.0, total / static_cast<double>(n)));
    out.plan = std::move(plan);
  } else {
    // greedy nearest feasible matching: a valid plan, hence an upper bound
    std::vector<char> used(n, 0);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t bj = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (used[j]) continue;
        const double c = cost_of(i, j);
        if (c < best) {
          best = c;
          bj = j;
        }
      }
      used[bj] = 1;
      total += best;
    }
    out.value = std::sqrt(total / static_cast<double>(n));
    out.bound_only = true;
  }
  return out;
}

}  // namespace medflow
