#include "medflow/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace medflow {

namespace fs = std::filesystem;

Domain domain_from_config(const RunConfig& cfg) {
  if (cfg.domain_kind == "torus") return Domain::torus(cfg.dim);
  Sdf sdf = nullptr;
  if (cfg.boundary.rfind("disk-complement:", 0) == 0) {
    double cx, cy, R;
    if (std::sscanf(cfg.boundary.c_str(), "disk-complement:%lf,%lf,%lf", &cx, &cy, &R) != 3)
      throw ConfigError("boundary disk-complement needs cx,cy,R");
    std::vector<double> lo = cfg.box_lo, hi = cfg.box_hi;
    sdf = [lo, hi, cx, cy, R](std::span<const double> x) {
      double inside = -1e300, out2 = 0.0;
      for (std::size_t i = 0; i < lo.size(); ++i) {
        const double dz = std::max(lo[i] - x[i], x[i] - hi[i]);
        inside = std::max(inside, dz);
        if (dz > 0.0) out2 += dz * dz;
      }
      const double box = inside <= 0.0 ? inside : std::sqrt(out2);
      const double disk = R - std::hypot(x[0] - cx, x[1] - cy);  // >0 inside the hole
      return std::max(box, disk);
    };
  } else if (cfg.boundary != "box") {
    throw ConfigError("unknown boundary '" + cfg.boundary + "'");
  }
  return Domain::box(cfg.box_lo, cfg.box_hi, sdf);
}

KernelSpec kernel_from_config(const RunConfig& cfg) {
  if (cfg.kernel == "ball") return KernelSpec::ball(cfg.r);
  if (cfg.kernel == "shrinking") return KernelSpec::shrinking(cfg.r);
  if (cfg.kernel.rfind("annulus:", 0) == 0) {
    const double k = std::stod(cfg.kernel.substr(8));
    return KernelSpec::annulus(k, cfg.r);
  }
  if (cfg.kernel.rfind("radial:", 0) == 0) {
    // file of "rho K(rho)" pairs, piecewise-linear, zero beyond the last knot
    const std::string path = cfg.kernel.substr(7);
    std::ifstream in(path);
    if (!in) throw IoError("cannot open kernel file: " + path);
    std::vector<double> rho, val;
    double a, b;
    while (in >> a >> b) {
      rho.push_back(a);
      val.push_back(b);
    }
    if (rho.size() < 2) throw ConfigError("radial kernel file needs at least 2 knots");
    auto k = [rho, val](double x) {
      if (x <= rho.front()) return val.front();
      if (x >= rho.back()) return 0.0;
      const auto it = std::upper_bound(rho.begin(), rho.end(), x);
      const std::size_t j = it - rho.begin();
      const double t = (x - rho[j - 1]) / (rho[j] - rho[j - 1]);
      return val[j - 1] * (1.0 - t) + val[j] * t;
    };
    return KernelSpec::radial_weight(k, cfg.r);
  }
  throw ConfigError("unknown kernel '" + cfg.kernel + "'");
}

ScalarField initial_field_from_config(const RunConfig& cfg) {
  const std::string& s = cfg.initial;
  double a, b, c, d;
  if (std::sscanf(s.c_str(), "disk:%lf,%lf,%lf", &a, &b, &c) == 3)
    return [a, b, c](std::span<const double> x) {
      return std::hypot(x[0] - a, x[1] - b) <= c ? 1.0 : 0.0;
    };
  if (std::sscanf(s.c_str(), "ellipse:%lf,%lf,%lf,%lf", &a, &b, &c, &d) == 4)
    return [a, b, c, d](std::span<const double> x) {
      const double u = (x[0] - a) / c, v = (x[1] - b) / d;
      return u * u + v * v <= 1.0 ? 1.0 : 0.0;
    };
  if (std::sscanf(s.c_str(), "radial:%lf,%lf", &a, &b) == 2)
    return [a, b](std::span<const double> x) {
      const double dx = x[0] - a, dy = x[1] - b;
      return dx * dx + dy * dy;
    };
  if (std::sscanf(s.c_str(), "halfspace:%lf", &a) == 1)
    return [a](std::span<const double> x) { return x[0] < a ? 1.0 : 0.0; };
  if (std::sscanf(s.c_str(), "halfdisk:%lf,%lf", &a, &b) == 2)
    return [a, b](std::span<const double> x) {
      return std::hypot(x[0] - a, x[1]) <= b ? 1.0 : 0.0;
    };
  if (std::sscanf(s.c_str(), "constant:%lf", &a) == 1)
    return [a](std::span<const double>) { return a; };
  if (s == "sin1")
    return [](std::span<const double> x) { return std::sin(2.0 * M_PI * x[0]); };
  if (s == "cos1")
    return [](std::span<const double> x) { return std::cos(2.0 * M_PI * x[0]); };
  if (s == "dumbbell")
    // two blobs joined by a bar; the classification demo's 2-phase seed
    return [](std::span<const double> x) {
      const bool left = std::hypot(x[0] - 0.3, x[1] - 0.5) <= 0.16;
      const bool right = std::hypot(x[0] - 0.7, x[1] - 0.5) <= 0.16;
      const bool bar = std::fabs(x[1] - 0.5) <= 0.035 && x[0] > 0.3 && x[0] < 0.7;
      return (left || right || bar) ? 1.0 : 0.0;
    };
  throw ConfigError("unknown initial field '" + s + "'");
}

// ---------------------------------------------------------------------------
// rasters

std::vector<std::uint8_t> rasterize(const LevelSetField& field, int resolution) {
  if (resolution < 16) throw ConfigError("raster resolution must be >= 16");
  const auto& cloud = *field.cloud;
  const auto& dom = cloud.domain();
  const int W = resolution;
  std::vector<double> vals(static_cast<std::size_t>(W) * W);
  double vmin = 1e300, vmax = -1e300;
  double x[2];
  for (int iy = 0; iy < W; ++iy) {
    for (int ix = 0; ix < W; ++ix) {
      x[0] = dom.lo()[0] + (ix + 0.5) / W * (dom.hi()[0] - dom.lo()[0]);
      x[1] = dom.lo()[1] + (iy + 0.5) / W * (dom.hi()[1] - dom.lo()[1]);
      const double v = field.values[cloud.nearest({x, 2})];
      vals[static_cast<std::size_t>(iy) * W + ix] = v;
      vmin = std::min(vmin, v);
      vmax = std::max(vmax, v);
    }
  }
  std::vector<std::uint8_t> px(vals.size());
  const double range = vmax - vmin;
  for (std::size_t i = 0; i < vals.size(); ++i)
    px[i] = range > 0.0
                ? static_cast<std::uint8_t>(std::lround(255.0 * (vals[i] - vmin) / range))
                : 0;
  return px;
}

std::vector<std::uint8_t> rasterize_overlay(const LevelSetField& field, int resolution, double q) {
  auto px = rasterize(field, resolution);
  const auto& cloud = *field.cloud;
  const auto& dom = cloud.domain();
  const int W = resolution;
  std::vector<std::uint8_t> above(px.size());
  double x[2];
  for (int iy = 0; iy < W; ++iy)
    for (int ix = 0; ix < W; ++ix) {
      x[0] = dom.lo()[0] + (ix + 0.5) / W * (dom.hi()[0] - dom.lo()[0]);
      x[1] = dom.lo()[1] + (iy + 0.5) / W * (dom.hi()[1] - dom.lo()[1]);
      above[static_cast<std::size_t>(iy) * W + ix] =
          field.values[cloud.nearest({x, 2})] >= q;
    }
  for (int iy = 0; iy < W; ++iy)
    for (int ix = 0; ix < W; ++ix) {
      const std::size_t i = static_cast<std::size_t>(iy) * W + ix;
      const bool edge = (ix + 1 < W && above[i] != above[i + 1]) ||
                        (iy + 1 < W && above[i] != above[i + W]);
      if (edge) px[i] = 255;
    }
  return px;
}

void write_pgm(const std::string& path, const std::vector<std::uint8_t>& pixels, int w, int h,
               const std::string& comment) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw IoError("cannot open for writing: " + path);
  std::fprintf(f, "P5\n");
  if (!comment.empty()) std::fprintf(f, "# %s\n", comment.c_str());
  std::fprintf(f, "%d %d\n255\n", w, h);
  std::fwrite(pixels.data(), 1, pixels.size(), f);
  std::fclose(f);
}

std::vector<double> probe_grid_values(const LevelSetField& field, int res) {
  const auto& cloud = *field.cloud;
  const auto& dom = cloud.domain();
  std::vector<double> nodes(static_cast<std::size_t>(res + 1) * (res + 1));
  double x[2];
  for (int iy = 0; iy <= res; ++iy)
    for (int ix = 0; ix <= res; ++ix) {
      x[0] = dom.lo()[0] + static_cast<double>(ix) / res * (dom.hi()[0] - dom.lo()[0]);
      x[1] = dom.lo()[1] + static_cast<double>(iy) / res * (dom.hi()[1] - dom.lo()[1]);
      x[0] = std::min(x[0], dom.hi()[0] - 1e-12);
      x[1] = std::min(x[1], dom.hi()[1] - 1e-12);
      nodes[static_cast<std::size_t>(iy) * (res + 1) + ix] = field.values[cloud.nearest({x, 2})];
    }
  return nodes;
}

// ---------------------------------------------------------------------------
// pipeline

namespace {

EvolutionMode mode_from_string(const std::string& s) {
  if (s == "levelset") return EvolutionMode::LevelSet;
  if (s == "mbo") return EvolutionMode::MBO;
  if (s == "youngangle") return EvolutionMode::YoungAngle;
  if (s == "ssl") return EvolutionMode::SSL;
  throw ConfigError("unknown mode '" + s + "'");
}

void append_manifest(const std::string& dir, const std::string& line) {
  std::ofstream m(dir + "/MANIFEST", std::ios::app);
  m << line << "\n";
}

}  // namespace

int run_pipeline(const RunConfig& cfg) {
  const std::string hash = [&] {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(config_hash(cfg)));
    return std::string(buf);
  }();
  std::string stage = "setup";
  try {
    fs::create_directories(cfg.out_dir);
    {
      std::ofstream m(cfg.out_dir + "/MANIFEST", std::ios::trunc);
      m << "# medflow run config=" << hash << " seed=" << cfg.seed << "\n";
    }
    std::ofstream(cfg.out_dir + "/config.resolved").write(serialize_config(cfg).data(),
                                                          serialize_config(cfg).size());
    append_manifest(cfg.out_dir, "config.resolved");

    const std::string header =
        "config=" + hash + " seed=" + std::to_string(cfg.seed);

    for (int sweep = 0; sweep < cfg.sweep_seeds; ++sweep) {
      const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(sweep);
      const std::string tag = cfg.sweep_seeds > 1 ? "_s" + std::to_string(seed) : "";

      stage = "domain";
      Domain dom = domain_from_config(cfg);
      stage = "sampler";
      SamplerConfig scfg = cfg.process == "iid" ? SamplerConfig::uniform_iid(cfg.n, seed)
                                                : SamplerConfig::poisson(cfg.n, seed);
      auto cloud = std::make_shared<const PointCloud>(sample(dom, scfg, cfg.r));
      if (cfg.verbosity > 0)
        std::fprintf(stderr, "medflow: sampled %zu points (seed %llu)\n", cloud->size(),
                     static_cast<unsigned long long>(seed));

      stage = "evolution";
      KernelSpec kernel = kernel_from_config(cfg);
      EvolutionConfig ecfg = EvolutionConfig::make(kernel, mode_from_string(cfg.mode), cfg.T);
      ecfg.threads = cfg.threads;
      ecfg.mbo_threshold = cfg.threshold;
      ecfg.young_angle = cfg.alpha_deg * M_PI / 180.0;
      ecfg.ssl.zeta = cfg.ssl_zeta;
      ecfg.ssl.r0 = cfg.ssl_r0;
      ecfg.ssl.R = cfg.ssl_R;
      ecfg.ssl.exponent = cfg.ssl_exponent;

      LevelSetField g = make_field(cloud, initial_field_from_config(cfg));
      std::vector<double> snaps = cfg.snapshots;
      if (snaps.empty()) snaps = {cfg.T};
      Trajectory traj = run(g, ecfg, snaps);

      for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
        char name[128];
        std::snprintf(name, sizeof name, "snapshot_%03zu%s.txt", i, tag.c_str());
        save_snapshot(cfg.out_dir + "/" + name, traj.snapshots[i], ecfg.mode);
        append_manifest(cfg.out_dir, name);
        std::snprintf(name, sizeof name, "snapshot_%03zu%s.pgm", i, tag.c_str());
        write_pgm(cfg.out_dir + "/" + name, rasterize(traj.snapshots[i], cfg.raster), cfg.raster,
                  cfg.raster, header);
        append_manifest(cfg.out_dir, name);
      }

      if (cfg.energy_csv) {
        stage = "heatflow";
        std::ofstream csv(cfg.out_dir + "/energy" + tag + ".csv");
        csv << "# " << header << "\n";
        csv << "step,time,dirichlet,tv,l2,min,max\n";
        csv.precision(17);
        auto emit_row = [&](const LevelSetField& f) {
          GraphField gf{cloud, f.values, cfg.r};
          const double dir = dirichlet_energy(gf, cfg.threads);
          double tv = 0.0;
          const bool unit = std::all_of(f.values.begin(), f.values.end(),
                                        [](double v) { return v >= 0.0 && v <= 1.0; });
          if (unit) tv = tv_energy(gf, kernel_from_config(cfg), 0.5, cfg.threads);
          double l2 = 0.0, mn = 1e300, mx = -1e300;
          for (double v : f.values) {
            l2 += v * v;
            mn = std::min(mn, v);
            mx = std::max(mx, v);
          }
          l2 = std::sqrt(l2 / static_cast<double>(f.values.size()));
          csv << f.step_count << "," << f.physical_time << "," << dir << "," << tv << "," << l2
              << "," << mn << "," << mx << "\n";
        };
        emit_row(g);
        for (const auto& s : traj.snapshots) emit_row(s);
        append_manifest(cfg.out_dir, "energy" + tag + ".csv");
      }

      if (cfg.heatflow_enabled && cfg.heat_T > 0.0) {
        stage = "heatflow";
        GraphField gf{cloud, g.values, cfg.r};
        HeatTrajectory ht = minimizing_movement(gf, cfg.heat_tau, cfg.heat_T, {}, cfg.threads);
        std::ofstream csv(cfg.out_dir + "/heat" + tag + ".csv");
        csv << "# " << header << "\n";
        csv << "step,time,dirichlet,tv,l2,min,max\n";
        csv.precision(17);
        for (std::size_t sdx = 0; sdx < ht.energies.size(); ++sdx)
          csv << sdx << "," << sdx * cfg.heat_tau << "," << ht.energies[sdx] << ",0,0,0,0\n";
        append_manifest(cfg.out_dir, "heat" + tag + ".csv");
      }
    }

    stage = "verify";
    bool all_pass = true;
    if (!cfg.verify.empty()) {
      std::vector<std::string> names;
      if (cfg.verify == "all") {
        names = verify_suite_names();
      } else {
        std::istringstream ss(cfg.verify);
        std::string tok;
        while (ss >> tok) names.push_back(tok);
      }
      std::vector<VerifyRow> rows;
      for (const auto& name : names) {
        SuiteResult res = run_verify_suite(name, cfg.threads);
        all_pass = all_pass && res.pass;
        rows.insert(rows.end(), res.rows.begin(), res.rows.end());
        if (cfg.verbosity > 0)
          std::fprintf(stderr, "medflow: verify %-18s %s (%.1fs)\n", name.c_str(),
                       res.pass ? "PASS" : "FAIL", res.seconds);
      }
      write_verify_csv(cfg.out_dir + "/verification.csv", rows, header);
      append_manifest(cfg.out_dir, "verification.csv");
    }

    append_manifest(cfg.out_dir, all_pass ? "# status: ok" : "# status: verification failed");
    return all_pass ? 0 : static_cast<int>(errc::verification);
  } catch (const Error& e) {
    std::fprintf(stderr, "medflow: error in stage %s: %s\n", stage.c_str(), e.what());
    try {
      append_manifest(cfg.out_dir, "# status: failed in stage " + stage + ": " + e.what());
    } catch (...) {
    }
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "medflow: error in stage %s: %s\n", stage.c_str(), e.what());
    return 1;
  }
}

}  // namespace medflow
