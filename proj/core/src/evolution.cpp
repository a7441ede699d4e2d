#include "medflow/evolution.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "medflow/medians.hpp"
#include "medflow/parallel.hpp"

namespace medflow {

const char* to_string(EvolutionMode m) {
  switch (m) {
    case EvolutionMode::LevelSet: return "levelset";
    case EvolutionMode::MBO: return "mbo";
    case EvolutionMode::YoungAngle: return "youngangle";
    case EvolutionMode::SSL: return "ssl";
  }
  return "?";
}

EvolutionConfig EvolutionConfig::make(KernelSpec kernel, EvolutionMode mode, double T) {
  EvolutionConfig cfg;
  cfg.h = kernel.r * kernel.r;  // parabolic scaling
  cfg.kernel = std::move(kernel);
  cfg.mode = mode;
  cfg.T = T;
  return cfg;
}

void EvolutionConfig::validate(const Domain& domain) const {
  if (!(kernel.r > 0.0)) throw EvolutionError("kernel radius must be positive");
  if (h != kernel.r * kernel.r) throw EvolutionError("h must equal r^2 exactly");
  if (mode == EvolutionMode::YoungAngle) {
    if (domain.kind() != Domain::Kind::Box)
      throw EvolutionError("YoungAngle requires a Box domain");
    if (!(young_angle > 0.0 && young_angle < M_PI))
      throw EvolutionError("young_angle must lie in (0, pi)");
  }
  if (mode == EvolutionMode::SSL) {
    if (!(ssl.zeta > 1.0)) throw EvolutionError("ssl.zeta must exceed 1");
    if (!(ssl.r0 < ssl.R)) throw EvolutionError("ssl.r0 must be below ssl.R");
    if (!(ssl.exponent > domain.dim() - 2))
      throw EvolutionError("ssl.exponent must exceed d-2");
  }
}

LevelSetField make_field(std::shared_ptr<const PointCloud> cloud,
                         const std::function<double(std::span<const double>)>& f) {
  LevelSetField out;
  out.values.resize(cloud->size());
  for (std::size_t i = 0; i < cloud->size(); ++i) out.values[i] = f(cloud->point(i));
  out.cloud = std::move(cloud);
  return out;
}

// ---------------------------------------------------------------------------

Evolver::Evolver(std::shared_ptr<const PointCloud> cloud, EvolutionConfig cfg)
    : cloud_(std::move(cloud)), cfg_(std::move(cfg)) {
  cfg_.validate(cloud_->domain());
  const int d = cloud_->dim();
  c_A_ = moments(cfg_.kernel, d).c_A;
  r_outer_ = cfg_.kernel.r;
  r_inner_ = cfg_.kernel.kappa_at_r() * r_outer_;
  if (r_outer_ > cloud_->cell_size() * (1.0 + 1e-12))
    throw IndexConfigError("index cell size is below the kernel radius");
  if (cfg_.mode == EvolutionMode::YoungAngle) build_young_angle_cache();
  if (cfg_.mode == EvolutionMode::SSL) build_ssl_cache();
}

void Evolver::build_young_angle_cache() {
  const std::size_t n = cloud_->size();
  const double s = std::pow(std::sin(0.5 * cfg_.young_angle), 2.0);
  p_cache_.assign(n, 0.0);
  const double r = r_outer_;
  parallel_for(n, cfg_.threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      auto x = cloud_->point(i);
      if (cloud_->domain().signed_distance(x) <= -r) continue;  // interior: p = 0
      const auto f = volume_fractions(cloud_->domain(), x, r);
      if (f.frac_in <= 0.0) {
        p_cache_[i] = 0.0;
        continue;
      }
      const double p = -(1.0 - 2.0 * s) * f.frac_out / f.frac_in;
      p_cache_[i] = std::clamp(p, -1.0, 1.0);
    }
  });
}

void Evolver::build_ssl_cache() {
  const std::size_t n = cloud_->size();
  const auto& ssl = cfg_.ssl;
  gamma_cache_.assign(n, 1.0);
  label_value_.assign(n, std::numeric_limits<double>::quiet_NaN());
  for (const auto& [idx, val] : ssl.labels) {
    if (idx >= n) throw EvolutionError("SSL label index out of range");
    label_value_[idx] = val;
  }
  std::vector<std::span<const double>> anchors;
  anchors.reserve(ssl.labels.size());
  for (const auto& [idx, _] : ssl.labels) anchors.push_back(cloud_->point(idx));
  parallel_for(n, cfg_.threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      auto x = cloud_->point(i);
      double d2 = std::numeric_limits<double>::infinity();
      for (auto a : anchors) d2 = std::min(d2, cloud_->domain().dist2(x, a));
      const double dist = std::sqrt(d2);
      if (dist > ssl.R) continue;  // gamma extends as the constant 1
      const double g = dist <= 0.0
                           ? ssl.zeta
                           : 1.0 + std::pow(ssl.r0 / dist, ssl.exponent);
      gamma_cache_[i] = std::min(ssl.zeta, g);
    }
  });
}

void Evolver::step_into(const LevelSetField& in, std::span<const std::uint32_t> active,
                        LevelSetField& out, std::vector<std::uint8_t>& changed) {
  const auto& cloud = *cloud_;
  const std::vector<double>& u = in.values;
  std::vector<double>& v = out.values;
  const bool binary = binary_values_;
  const bool radial_kernel = !cfg_.kernel.is_indicator();
  std::atomic<std::size_t> empty_count{0};

  parallel_for(active.size(), cfg_.threads, [&](std::size_t b, std::size_t e) {
    std::vector<std::uint32_t> ids;
    std::vector<double> vals, weights, scratch;
    ids.reserve(1024);
    vals.reserve(1024);
    std::size_t local_empty = 0;
    for (std::size_t a = b; a < e; ++a) {
      const std::uint32_t i = active[a];
      const auto x = cloud.point(i);
      cloud.neighbors_unsorted_into(x, r_outer_, r_inner_, ids);
      if (ids.empty()) {
        v[i] = u[i];  // hold previous value
        ++local_empty;
        changed[i] = 0;
        continue;
      }
      const double p = p_cache_.empty() ? 0.0 : p_cache_[i];
      double result;
      if (cfg_.mode == EvolutionMode::SSL || radial_kernel) {
        vals.clear();
        weights.clear();
        const double inv_r = 1.0 / r_outer_;
        for (std::uint32_t j : ids) {
          vals.push_back(u[j]);
          double w = 1.0;
          if (radial_kernel)
            w = cfg_.kernel.radial(cloud.domain().dist(x, cloud.point(j)) * inv_r);
          if (cfg_.mode == EvolutionMode::SSL)
            w *= 0.5 * (gamma_cache_[i] + gamma_cache_[j]);
          weights.push_back(w);
        }
        result = weighted_median(vals, weights, p).value();
      } else if (binary) {
        // majority rule: the k-th order statistic of 0/1 values
        std::size_t zeros = 0;
        for (std::uint32_t j : ids) zeros += (u[j] == 0.0);
        const std::size_t k = p_median_rank(ids.size(), p);
        result = (zeros >= k) ? 0.0 : 1.0;
      } else {
        vals.clear();
        for (std::uint32_t j : ids) vals.push_back(u[j]);
        result = p_median(vals, p, scratch).value();
      }
      v[i] = result;
      changed[i] = (result != u[i]);
    }
    empty_count += local_empty;
  });

  // SSL hard constraint: labeled points are reset after the update
  if (cfg_.mode == EvolutionMode::SSL && cfg_.ssl.hard_labels) {
    for (const auto& [idx, val] : cfg_.ssl.labels) {
      changed[idx] |= (v[idx] != val);
      v[idx] = val;
    }
  }

  stats_.empty_neighborhoods += empty_count.load();
  out.step_count = in.step_count + 1;
  out.physical_time = static_cast<double>(out.step_count) * step_time();
  out.cloud = in.cloud;
  ++stats_.steps;
}

LevelSetField Evolver::step(const LevelSetField& field) {
  if (field.cloud.get() != cloud_.get())
    throw EvolutionError("field was built on a different cloud");
  LevelSetField in = field;
  if (cfg_.mode == EvolutionMode::MBO) {
    in = threshold(field, cfg_.mbo_threshold);
    binary_values_ = true;
  } else {
    binary_values_ = false;
  }
  LevelSetField out;
  out.values = in.values;
  std::vector<std::uint32_t> all(cloud_->size());
  std::iota(all.begin(), all.end(), 0u);
  std::vector<std::uint8_t> changed(cloud_->size(), 0);
  step_into(in, all, out, changed);
  return out;
}

Trajectory Evolver::run(const LevelSetField& g, std::span<const double> snapshot_times) {
  if (g.cloud.get() != cloud_.get()) throw EvolutionError("field was built on a different cloud");
  Trajectory traj;
  traj.requested_times.assign(snapshot_times.begin(), snapshot_times.end());

  LevelSetField cur = g;
  if (cfg_.mode == EvolutionMode::MBO) {
    cur = threshold(g, cfg_.mbo_threshold);
    binary_values_ = true;
  } else {
    binary_values_ = false;
  }

  const double dt = step_time();
  // piecewise-constant-in-time: a snapshot at t uses step floor(t / (cA h))
  std::vector<std::int64_t> snap_step(snapshot_times.size());
  for (std::size_t i = 0; i < snapshot_times.size(); ++i)
    snap_step[i] = std::max<std::int64_t>(
        0, static_cast<std::int64_t>(std::floor(snapshot_times[i] / dt * (1.0 + 1e-15))));
  traj.snapshots.resize(snapshot_times.size());

  std::int64_t total_steps = 0;
  if (cfg_.T > 0.0)
    total_steps = static_cast<std::int64_t>(std::ceil(cfg_.T / dt - 1e-12));
  for (std::size_t i = 0; i < snap_step.size(); ++i)
    snap_step[i] = std::min(snap_step[i], total_steps);

  auto record = [&](const LevelSetField& f) {
    for (std::size_t i = 0; i < snap_step.size(); ++i)
      if (snap_step[i] == f.step_count) traj.snapshots[i] = f;
  };
  record(cur);

  // double buffer plus narrow-band change tracking: a point can only change
  // when some stencil neighbor changed, and cell size >= r, so dilating the
  // changed cells by one ring is an exact superset of the points to revisit
  const std::size_t n = cloud_->size();
  LevelSetField next;
  next.values.resize(n);
  std::vector<std::uint8_t> changed(n, 0), prev_changed(n, 1);
  std::vector<std::uint32_t> active;
  std::vector<std::uint8_t> cell_active;
  std::vector<std::uint32_t> ring;

  for (std::int64_t s = 0; s < total_steps; ++s) {
    if (s == 0) {
      active.resize(n);
      std::iota(active.begin(), active.end(), 0u);
    } else {
      cell_active.assign(cloud_->bucket_count(), 0);
      bool any = false;
      for (std::size_t i = 0; i < n; ++i) {
        if (!prev_changed[i]) continue;
        any = true;
        cloud_->bucket_ring(cloud_->bucket_of(cloud_->point(i)), ring);
        for (auto c : ring) cell_active[c] = 1;
      }
      active.clear();
      if (any) {
        for (std::size_t c = 0; c < cell_active.size(); ++c) {
          if (!cell_active[c]) continue;
          auto pts = cloud_->bucket_points(c);
          active.insert(active.end(), pts.begin(), pts.end());
        }
        std::sort(active.begin(), active.end());
      }
    }

    next.values = cur.values;
    std::fill(changed.begin(), changed.end(), 0);
    step_into(cur, active, next, changed);
    std::swap(cur, next);
    std::swap(prev_changed, changed);
    record(cur);
    if (active.empty()) {
      // stationary: later snapshots equal the current field
      for (std::size_t i = 0; i < snap_step.size(); ++i)
        if (snap_step[i] > cur.step_count) {
          traj.snapshots[i] = cur;
          traj.snapshots[i].step_count = snap_step[i];
          traj.snapshots[i].physical_time = snap_step[i] * dt;
        }
      cur.step_count = total_steps;
      cur.physical_time = total_steps * dt;
      break;
    }
  }

  traj.final_field = cur;
  traj.stats = stats_;
  return traj;
}

LevelSetField step(const LevelSetField& field, const EvolutionConfig& cfg) {
  Evolver ev(field.cloud, cfg);
  return ev.step(field);
}

Trajectory run(const LevelSetField& g, const EvolutionConfig& cfg,
               std::span<const double> snapshot_times) {
  Evolver ev(g.cloud, cfg);
  return ev.run(g, snapshot_times);
}

LevelSetField threshold(const LevelSetField& field, double q) {
  LevelSetField out = field;
  for (auto& v : out.values) v = (v >= q) ? 1.0 : 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// contact angle measurement

namespace {

struct Face {
  int axis;     // varying axis of the face
  int normal;   // fixed axis
  double coord; // boundary coordinate on the fixed axis
  double n_in;  // inward normal sign along `normal`
};

double field_at(const LevelSetField& f, std::span<const double> x) {
  return f.values[f.cloud->nearest(x)];
}

}  // namespace

std::optional<double> contact_angle(const LevelSetField& field, double q, double r) {
  const auto& cloud = *field.cloud;
  const auto& dom = cloud.domain();
  if (dom.kind() != Domain::Kind::Box || dom.dim() != 2)
    throw EvolutionError("contact_angle requires a 2-D Box domain");

  const Face faces[4] = {
      {0, 1, dom.lo()[1], +1.0},
      {0, 1, dom.hi()[1], -1.0},
      {1, 0, dom.lo()[0], +1.0},
      {1, 0, dom.hi()[0], -1.0},
  };

  bool any_wet = false, any_dry = false;
  for (const Face& face : faces) {
    const double a0 = dom.lo()[face.axis], a1 = dom.hi()[face.axis];
    const int M = 256;
    double contact = std::numeric_limits<double>::quiet_NaN();
    double prev_v = 0.0;
    bool have_prev = false;
    double probe[2];
    for (int i = 0; i < M; ++i) {
      const double t = a0 + (i + 0.5) / M * (a1 - a0);
      probe[face.axis] = t;
      probe[face.normal] = face.coord + face.n_in * 0.5 * r;
      const double v = field_at(field, probe) - q;
      if (v >= 0.0) any_wet = true; else any_dry = true;
      if (have_prev && ((prev_v < 0.0) != (v < 0.0)))
        contact = t - 0.5 * (a1 - a0) / M;  // midpoint of the sign change
      have_prev = true;
      prev_v = v;
    }
    if (std::isnan(contact)) continue;

    // local raster over the 4r window, marching-squares point extraction
    const int G = 96;
    const double half = 2.0 * r;
    std::vector<double> vals((G + 1) * (G + 1));
    for (int iy = 0; iy <= G; ++iy) {
      for (int ix = 0; ix <= G; ++ix) {
        double pxy[2];
        pxy[face.axis] = contact - half + 2.0 * half * ix / G;
        pxy[face.normal] = face.coord + face.n_in * (2.0 * half * iy / G);
        pxy[0] = std::clamp(pxy[0], dom.lo()[0] + 1e-9, dom.hi()[0] - 1e-9);
        pxy[1] = std::clamp(pxy[1], dom.lo()[1] + 1e-9, dom.hi()[1] - 1e-9);
        vals[iy * (G + 1) + ix] = field_at(field, {pxy, 2}) - q;
      }
    }
    // zero crossings along grid edges, in face-local (tangent, inward) coords
    std::vector<std::pair<double, double>> pts;
    auto lerp = [](double a, double b) { return a / (a - b); };
    const double cell = 2.0 * half / G;
    for (int iy = 0; iy <= G; ++iy) {
      for (int ix = 0; ix <= G; ++ix) {
        const double v0 = vals[iy * (G + 1) + ix];
        if (ix < G) {
          const double v1 = vals[iy * (G + 1) + ix + 1];
          if ((v0 < 0.0) != (v1 < 0.0))
            pts.emplace_back(-half + cell * (ix + lerp(v0, v1)), cell * iy);
        }
        if (iy < G) {
          const double v1 = vals[(iy + 1) * (G + 1) + ix];
          if ((v0 < 0.0) != (v1 < 0.0))
            pts.emplace_back(-half + cell * ix, cell * (iy + lerp(v0, v1)));
        }
      }
    }
    // keep samples near the contact, away from the immediate wall layer
    std::vector<std::pair<double, double>> sel;
    for (auto [tx, ny] : pts)
      if (ny >= 0.35 * r && ny <= 2.0 * r && std::fabs(tx) <= 2.0 * r)
        sel.emplace_back(tx, ny);
    if (sel.size() < 4) continue;

    // total least squares via the 2x2 scatter matrix
    double mx = 0, my = 0;
    for (auto [tx, ny] : sel) {
      mx += tx;
      my += ny;
    }
    mx /= sel.size();
    my /= sel.size();
    double sxx = 0, sxy = 0, syy = 0;
    for (auto [tx, ny] : sel) {
      sxx += (tx - mx) * (tx - mx);
      sxy += (tx - mx) * (ny - my);
      syy += (ny - my) * (ny - my);
    }
    const double tr = sxx + syy, det = sxx * syy - sxy * sxy;
    const double lam = 0.5 * tr + std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
    double vx = sxy, vy = lam - sxx;  // principal eigenvector
    const double norm = std::hypot(vx, vy);
    if (norm < 1e-14) continue;
    vx /= norm;
    vy /= norm;
    // orient the tangent from the contact point toward the sample mass
    if (mx * vx + my * vy < 0.0) {
      vx = -vx;
      vy = -vy;
    }
    if (vy < 0.0) {
      vx = -vx;
      vy = -vy;
    }

    // boundary tangent toward the wetted side
    probe[face.axis] = contact - 2.0 * cell;
    probe[face.normal] = face.coord + face.n_in * 0.5 * r;
    probe[0] = std::clamp(probe[0], dom.lo()[0] + 1e-9, dom.hi()[0] - 1e-9);
    probe[1] = std::clamp(probe[1], dom.lo()[1] + 1e-9, dom.hi()[1] - 1e-9);
    const double t_omega = (field_at(field, probe) - q >= 0.0) ? -1.0 : 1.0;
    const double angle = std::atan2(vy, vx * t_omega);
    return angle;
  }

  if (any_wet && !any_dry) return M_PI;  // full wetting reading
  return std::nullopt;                   // level set does not meet the boundary
}

void save_snapshot(const std::string& path, const LevelSetField& field, EvolutionMode mode) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("cannot open for writing: " + path);
  const auto& cloud = *field.cloud;
  std::fprintf(f, "# medflow-cloud v1 d=%d n=%zu seed=%llu\n", cloud.dim(), cloud.size(),
               static_cast<unsigned long long>(cloud.seed()));
  std::fprintf(f, "# t=%.17g n=%lld mode=%s\n", field.physical_time,
               static_cast<long long>(field.step_count), to_string(mode));
  const int d = cloud.dim();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    auto p = cloud.point(i);
    for (int k = 0; k < d; ++k) std::fprintf(f, k ? " %.17g" : "%.17g", p[k]);
    std::fprintf(f, " %.17g\n", field.values[i]);
  }
  std::fclose(f);
}

}  // namespace medflow
