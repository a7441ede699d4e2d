#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>

#include "medflow/parallel.hpp"
#include "medflow/pipeline.hpp"
#include "medflow/rng.hpp"

// The named verification suites implement the acceptance gates: paper-quoted
// constants, oracle equivalences, and exact algebraic identities, each at a
// pinned tolerance. Statistical estimates run under fixed seeds so pass/fail
// is deterministic; envelope estimates are reported alongside.

namespace medflow {

namespace {

using Clock = std::chrono::steady_clock;

void add_row(SuiteResult& res, const std::string& test, const std::string& param, double measured,
             double predicted, double tolerance, bool pass) {
  res.rows.push_back({test, param, measured, predicted, tolerance, pass});
  res.pass = res.pass && pass;
}

void add_abs_row(SuiteResult& res, const std::string& test, const std::string& param,
                 double measured, double predicted, double tol_rel) {
  const double tol = tol_rel * std::fabs(predicted);
  add_row(res, test, param, measured, predicted, tol, std::fabs(measured - predicted) <= tol);
}

std::shared_ptr<const PointCloud> torus_cloud(std::size_t n, double cell, std::uint64_t seed) {
  return std::make_shared<const PointCloud>(
      sample(Domain::torus(2), SamplerConfig::uniform_iid(static_cast<double>(n), seed), cell));
}

// ---------------------------------------------------------------------------
// 1. consistency constants

SuiteResult suite_consistency(int threads) {
  (void)threads;
  SuiteResult res{"consistency", {}, true, 0.0};
  // a11 = 1 normal form: phi = x1^2 + x2; F = 2
  QuadraticTestField field;
  field.d = 2;
  field.a = {1.0};
  field.b = {0.0};
  field.b_d = 0.0;

  const double radii[] = {0.1, 0.05, 0.025};
  const std::size_t nodes = 1000000;
  const std::uint64_t seed = 18;  // fixed so the MC gate is deterministic

  for (auto [name, spec] : {std::pair<const char*, KernelSpec>{"ball", KernelSpec::ball(1.0)},
                            {"annulus:0.5", KernelSpec::annulus(0.5, 1.0)}}) {
    const auto rows = measure_consistency(field, spec, radii, nodes, seed);
    for (const auto& row : rows) {
      char param[96];
      std::snprintf(param, sizeof param, "%s r=%g env=%.3g", name, row.r, row.envelope);
      const bool gate = row.r == 0.025;
      if (gate) {
        add_abs_row(res, "consistency.mtilde", param, row.measured, row.predicted, 0.05);
      } else {
        // trend rows: report only, the gate is the finest radius
        add_row(res, "consistency.trend", param, row.measured, row.predicted,
                std::fabs(row.predicted), true);
      }
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// 2. Oberman counterexample

SuiteResult suite_oberman(int threads) {
  (void)threads;
  SuiteResult res{"oberman", {}, true, 0.0};
  const double r = 0.1;
  const KernelSpec thin = KernelSpec::annulus(0.999, r);
  const double center[2] = {r / 10.0, 0.0};
  const auto mc = continuous_median_mc(
      [](std::span<const double> x) { return x[0] * x[0]; }, {center, 2}, thin, 2, 1000000, 4);
  const double mtilde = (mc.value - center[0] * center[0]) / (r * r);
  // the thin-annulus median stays O(1): ~0.48, not O(r^2)
  add_row(res, "oberman.mtilde", "annulus:0.999 r=0.1", mtilde, 0.48, 0.05,
          std::fabs(mtilde - 0.48) <= 0.05);
  return res;
}

// ---------------------------------------------------------------------------
// 3. shrinking circle under MBO

SuiteResult suite_shrinking_circle(int threads) {
  SuiteResult res{"shrinking-circle", {}, true, 0.0};
  const double r = 0.01, kappa = 0.9, R0 = 0.3, Rmin = 0.15;
  const double T = 0.5 * (R0 * R0 - Rmin * Rmin);

  auto cloud = torus_cloud(1000000, r, 42);
  EvolutionConfig cfg = EvolutionConfig::make(KernelSpec::annulus(kappa, r), EvolutionMode::MBO, T);
  cfg.threads = threads;
  LevelSetField g = make_field(cloud, [&](std::span<const double> x) {
    return std::hypot(x[0] - 0.5, x[1] - 0.5) <= R0 ? 1.0 : 0.0;
  });

  std::vector<double> snaps;
  for (int k = 1; k <= 10; ++k) snaps.push_back(T * k / 10.0);
  Trajectory traj = run(g, cfg, snaps);

  // analytic circle for comparison
  auto circle_segs = [&](double R) {
    std::vector<double> segs;
    const int m = 720;
    for (int i = 0; i < m; ++i) {
      const double t0 = 2.0 * M_PI * i / m, t1 = 2.0 * M_PI * (i + 1) / m;
      segs.push_back(0.5 + R * std::cos(t0));
      segs.push_back(0.5 + R * std::sin(t0));
      segs.push_back(0.5 + R * std::cos(t1));
      segs.push_back(0.5 + R * std::sin(t1));
    }
    return segs;
  };

  double worst = 0.0;
  const int res_grid = 768;
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    const auto& f = traj.snapshots[i];
    const double t = f.physical_time;
    const double R = std::sqrt(std::max(0.0, R0 * R0 - 2.0 * t));
    const auto nodes = probe_grid_values(f, res_grid);
    const auto segs = extract_level_segments(nodes, res_grid, 0.0, 1.0, 0.5);
    const auto h = hausdorff_distance(segs, circle_segs(R), 0.002);
    const double err = h.value_or(1.0);
    worst = std::max(worst, err);
    char param[64];
    std::snprintf(param, sizeof param, "t=%.5f R=%.4f", t, R);
    add_row(res, "shrinking.hausdorff", param, err, 0.0, 0.02, err <= 0.02);
  }
  add_row(res, "shrinking.worst", "all checkpoints", worst, 0.0, 0.02, worst <= 0.02);
  return res;
}

// ---------------------------------------------------------------------------
// 4. exact algebraic identities

SuiteResult suite_identities(int threads) {
  SuiteResult res{"identities", {}, true, 0.0};
  const double r = 0.1;
  auto cloud = torus_cloud(2000, r, 7);
  EvolutionConfig cfg =
      EvolutionConfig::make(KernelSpec::ball(r), EvolutionMode::LevelSet, r * r);
  cfg.threads = threads;
  Evolver ev(cloud, cfg);
  const std::size_t n = cloud->size();

  Rng rng(1001);
  std::size_t fail_cmp = 0, fail_rel = 0, fail_con = 0, fail_thr = 0, fail_rng = 0;
  const int instances = 120;
  for (int inst = 0; inst < instances; ++inst) {
    LevelSetField u, v;
    u.cloud = v.cloud = cloud;
    u.values.resize(n);
    v.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      u.values[i] = rng.uniform(-1.0, 1.0);
      v.values[i] = u.values[i] + rng.uniform(0.0, 0.5);  // v >= u
    }
    const auto su = ev.step(u);
    const auto sv = ev.step(v);

    // comparison principle
    for (std::size_t i = 0; i < n; ++i) fail_cmp += !(su.values[i] <= sv.values[i]);

    // relabeling G(a u + c) = a G(u) + c
    const double a = rng.uniform(0.5, 2.0), c = rng.uniform(-1.0, 1.0);
    LevelSetField w;
    w.cloud = cloud;
    w.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) w.values[i] = a * u.values[i] + c;
    const auto sw = ev.step(w);
    for (std::size_t i = 0; i < n; ++i) fail_rel += (sw.values[i] != a * su.values[i] + c);

    // sup-norm contraction
    double duv = 0.0, dsus = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      duv = std::max(duv, std::fabs(u.values[i] - v.values[i]));
      dsus = std::max(dsus, std::fabs(su.values[i] - sv.values[i]));
    }
    fail_con += !(dsus <= duv);

    // threshold commutation
    const double q = rng.uniform(-1.0, 1.0);
    const auto lhs = threshold(su, q);
    const auto rhs = ev.step(threshold(u, q));
    for (std::size_t i = 0; i < n; ++i) fail_thr += (lhs.values[i] != rhs.values[i]);

    // range shrinkage
    const auto [mn, mx] = std::minmax_element(u.values.begin(), u.values.end());
    for (std::size_t i = 0; i < n; ++i)
      fail_rng += !(*mn <= su.values[i] && su.values[i] <= *mx);
  }
  add_row(res, "identities.comparison", "120 instances", static_cast<double>(fail_cmp), 0, 0,
          fail_cmp == 0);
  add_row(res, "identities.relabel", "120 instances", static_cast<double>(fail_rel), 0, 0,
          fail_rel == 0);
  add_row(res, "identities.contraction", "120 instances", static_cast<double>(fail_con), 0, 0,
          fail_con == 0);
  add_row(res, "identities.threshold", "120 instances", static_cast<double>(fail_thr), 0, 0,
          fail_thr == 0);
  add_row(res, "identities.range", "120 instances", static_cast<double>(fail_rng), 0, 0,
          fail_rng == 0);
  return res;
}

// ---------------------------------------------------------------------------
// 5. median oracle equivalence

double pmed_scan_oracle(std::span<const double> values, double p) {
  std::vector<double> s(values.begin(), values.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  // first value whose just-above sign sum satisfies the inequality
  std::size_t le = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    le = i + 1;
    while (le < s.size() && s[le] == s[i]) ++le;  // count the whole tie block
    if (2.0 * static_cast<double>(le) - n >= p * n) return s[i];
    i = le - 1;
  }
  return s.back();
}

double wmed_scan_oracle(std::span<const double> values, std::span<const double> weights,
                        double p) {
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0u);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b] || (values[a] == values[b] && a < b);
  });
  double total = 0.0;
  for (double w : weights) total += w;
  if (p <= -1.0 || p >= 1.0) {
    double ext = 0.0;
    bool found = false;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (weights[i] == 0.0) continue;
      if (!found || (p >= 1.0 ? values[i] > ext : values[i] < ext)) ext = values[i];
      found = true;
    }
    return ext;
  }
  const double target = 0.5 * (p * total + total);
  double cum = 0.0;
  double last = values[idx[0]];
  for (std::size_t j = 0; j < idx.size(); ++j) {
    if (weights[idx[j]] == 0.0) continue;
    cum += weights[idx[j]];
    last = values[idx[j]];
    if (cum >= target) return last;
  }
  return last;
}

SuiteResult suite_median_oracle(int) {
  SuiteResult res{"median-oracle", {}, true, 0.0};
  Rng rng(2024);
  const double ps[] = {-1.0, -0.5, 0.0, 0.5, 1.0};
  std::vector<double> scratch;
  std::size_t fail_p = 0, fail_w = 0, fail_u = 0;

  for (int inst = 0; inst < 1000; ++inst) {
    const std::size_t n = 1 + rng.index(257);
    std::vector<double> vals(n), weights(n);
    const bool with_ties = (inst % 3 == 0);
    for (std::size_t i = 0; i < n; ++i) {
      double v = rng.uniform(-10.0, 10.0);
      if (with_ties) v = std::round(v * 4.0) / 4.0;
      vals[i] = v;
      weights[i] = (inst % 5 == 0 && rng.uniform() < 0.1) ? 0.0 : rng.uniform(0.0, 3.0);
    }
    if (std::all_of(weights.begin(), weights.end(), [](double w) { return w == 0.0; }))
      weights[0] = 1.0;
    for (double p : ps) {
      const double got = p_median(vals, p, scratch).value();
      const double want = pmed_scan_oracle(vals, p);
      fail_p += (got != want);

      const double gw = weighted_median(vals, weights, p).value();
      const double ww = wmed_scan_oracle(vals, weights, p);
      fail_w += (gw != ww);
    }
    // unit weights reduce to the unweighted p-median
    std::vector<double> unit(n, 1.0);
    for (double p : ps)
      fail_u += (weighted_median(vals, unit, p).value() != p_median(vals, p, scratch).value());
  }
  add_row(res, "median.pmedian_vs_scan", "5000 cases", static_cast<double>(fail_p), 0, 0,
          fail_p == 0);
  add_row(res, "median.weighted_vs_scan", "5000 cases", static_cast<double>(fail_w), 0, 0,
          fail_w == 0);
  add_row(res, "median.unit_weights", "5000 cases", static_cast<double>(fail_u), 0, 0,
          fail_u == 0);
  return res;
}

// ---------------------------------------------------------------------------
// 6. DKW statistical gate

SuiteResult suite_dkw(int) {
  SuiteResult res{"dkw", {}, true, 0.0};
  auto uniform_sampler = [](Rng& rng) { return rng.uniform(); };
  auto uniform_cdf = [](double x) { return std::clamp(x, 0.0, 1.0); };

  const auto gate = dkw_envelope_test(uniform_sampler, uniform_cdf, 1000, 0.05, 2000, 1234);
  char param[96];
  std::snprintf(param, sizeof param, "N=1000 eps=0.05 bound=%.5g sigma=%.3g", gate.bound,
                gate.sigma);
  add_row(res, "dkw.rate", param, gate.violation_rate, gate.bound, 3.0 * gate.sigma, gate.pass);

  const auto sure = dkw_envelope_test(uniform_sampler, uniform_cdf, 200, 1.0, 200, 5);
  add_row(res, "dkw.eps1", "deviation <= 1 always", sure.violation_rate, 0.0, 0.0,
          sure.violation_rate == 0.0);

  const auto vac = dkw_envelope_test(uniform_sampler, uniform_cdf, 10, 0.01, 200, 5);
  add_row(res, "dkw.vacuous", "bound > 1 auto-skips", vac.vacuous ? 1.0 : 0.0, 1.0, 0.0,
          vac.vacuous && vac.pass);
  return res;
}

// ---------------------------------------------------------------------------
// 7. Dirichlet-energy Gamma-limit value

SuiteResult suite_dirichlet(int threads) {
  SuiteResult res{"dirichlet-gamma", {}, true, 0.0};
  const double pred = 0.25 * M_PI * M_PI;  // k2 * pi^2, d=2 ball
  auto sin_field = [](std::span<const double> x) { return std::sin(2.0 * M_PI * x[0]); };

  auto rel_err_at = [&](std::size_t n, double r) {
    auto cloud = torus_cloud(n, r, 11);
    GraphField f = make_graph_field(cloud, r, sin_field);
    const double e = dirichlet_energy(f, threads);
    return std::make_pair(e, std::fabs(e - pred) / pred);
  };

  const auto [e1, rel1] = rel_err_at(100000, 0.05);
  add_abs_row(res, "dirichlet.value", "N=1e5 r=0.05", e1, pred, 0.10);
  const auto [e2, rel2] = rel_err_at(400000, 0.035);
  add_abs_row(res, "dirichlet.value", "N=4e5 r=0.035", e2, pred, 0.10);
  add_row(res, "dirichlet.refinement", "rel err strictly smaller", rel2, rel1, 0.0, rel2 < rel1);
  return res;
}

// ---------------------------------------------------------------------------
// 8. heat-mode decay rate

SuiteResult suite_heat_decay(int threads) {
  SuiteResult res{"heat-decay", {}, true, 0.0};
  const double pred = 0.25 * (2.0 * M_PI) * (2.0 * M_PI);  // k2 (2 pi)^2 = pi^2
  const double r = 0.06, T = 0.06;
  auto cloud = torus_cloud(20000, r, 5);
  const std::size_t n = cloud->size();

  std::vector<double> cosv(n), sinv(n);
  for (std::size_t i = 0; i < n; ++i) {
    cosv[i] = std::cos(2.0 * M_PI * cloud->point(i)[0]);
    sinv[i] = std::sin(2.0 * M_PI * cloud->point(i)[0]);
  }
  auto amplitude = [&](const std::vector<double>& u) {
    std::vector<double> pc(n), psn(n);
    for (std::size_t i = 0; i < n; ++i) {
      pc[i] = u[i] * cosv[i];
      psn[i] = u[i] * sinv[i];
    }
    return std::hypot(pairwise_sum(pc), pairwise_sum(psn)) / static_cast<double>(n);
  };

  GraphField g = make_graph_field(cloud, r, [](std::span<const double> x) {
    return std::cos(2.0 * M_PI * x[0]);
  });
  const double a0 = amplitude(g.values);

  const double taus[] = {4e-4, 2e-4, 1e-4};
  double rates[3];
  HeatFlowOperator op(cloud, r, LaplacianNormalization::ExpectedDegree, threads);
  for (int k = 0; k < 3; ++k) {
    GraphField u = g;
    const auto steps = static_cast<std::int64_t>(std::llround(T / taus[k]));
    for (std::int64_t s = 0; s < steps; ++s) u = op.heat_step(u, taus[k]);
    rates[k] = -std::log(amplitude(u.values) / a0) / T;
    char param[64];
    std::snprintf(param, sizeof param, "tau=%g", taus[k]);
    add_row(res, "heat.rate", param, rates[k], pred, 0.05 * pred, true);
  }
  // Richardson: least-squares linear fit in tau, extrapolated to tau = 0
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int k = 0; k < 3; ++k) {
    sx += taus[k];
    sy += rates[k];
    sxx += taus[k] * taus[k];
    sxy += taus[k] * rates[k];
  }
  const double denom = 3.0 * sxx - sx * sx;
  const double slope = (3.0 * sxy - sx * sy) / denom;
  const double rate0 = (sy - slope * sx) / 3.0;
  add_abs_row(res, "heat.rate_extrapolated", "tau->0", rate0, pred, 0.05);
  return res;
}

// ---------------------------------------------------------------------------
// 9. nonlocal TV limit

SuiteResult suite_tv(int threads) {
  SuiteResult res{"tv-gamma", {}, true, 0.0};
  const double pred = 8.0 / (3.0 * M_PI);  // k1 * Per = (4/(3pi)) * 2
  auto half = [](std::span<const double> x) { return x[0] < 0.5 ? 1.0 : 0.0; };
  const Domain torus = Domain::torus(2);

  const double rs[] = {0.2, 0.1, 0.05};
  const int Ms[] = {80, 240, 640};
  double errs[3];
  for (int k = 0; k < 3; ++k) {
    KernelSpec spec = KernelSpec::ball(rs[k]);
    const double e = tv_energy_grid(half, torus, spec, 0.5, Ms[k], threads);
    errs[k] = std::fabs(e - pred) / pred;
    char param[64];
    std::snprintf(param, sizeof param, "h=%g grid=%d", rs[k] * rs[k], Ms[k]);
    add_row(res, "tv.value", param, e, pred, 0.10 * pred, k < 2 || errs[k] <= 0.10);
  }
  add_row(res, "tv.monotone", "error decreases with h", errs[2], errs[0], 0.0,
          errs[0] > errs[1] && errs[1] > errs[2]);
  add_abs_row(res, "tv.final", "smallest h", errs[2] * pred + pred, pred, 0.10);
  return res;
}

// ---------------------------------------------------------------------------
// 10. Young-angle stationarity

SuiteResult suite_young_angle(int threads) {
  SuiteResult res{"young-angle", {}, true, 0.0};
  const double r = 0.03;
  const double angles_deg[] = {60.0, 90.0, 120.0};

  Domain box = Domain::box({0.0, 0.0}, {1.0, 1.0});
  auto cloud = std::make_shared<const PointCloud>(
      sample(box, SamplerConfig::uniform_iid(100000, 3), r));

  for (double deg : angles_deg) {
    EvolutionConfig cfg =
        EvolutionConfig::make(KernelSpec::ball(r), EvolutionMode::YoungAngle, 0.0);
    cfg.threads = threads;
    cfg.young_angle = deg * M_PI / 180.0;
    Evolver ev(cloud, cfg);

    LevelSetField f = make_field(cloud, [](std::span<const double> x) {
      return std::hypot(x[0] - 0.5, x[1]) <= 0.28 ? 1.0 : 0.0;
    });

    // evolve in chunks until the measured angle settles
    double measured = -1.0;
    const int chunk = 12, max_chunks = 14;
    for (int cidx = 0; cidx < max_chunks; ++cidx) {
      for (int s = 0; s < chunk; ++s) f = ev.step(f);
      const auto a = contact_angle(f, 0.5, r);
      if (!a) break;
      const double now = *a * 180.0 / M_PI;
      if (measured >= 0.0 && std::fabs(now - measured) < 0.5 && cidx >= 3) {
        measured = now;
        break;
      }
      measured = now;
    }
    char param[48];
    std::snprintf(param, sizeof param, "alpha=%g deg", deg);
    add_row(res, "young.contact_angle", param, measured, deg, 7.0,
            measured >= 0.0 && std::fabs(measured - deg) <= 7.0);
  }
  return res;
}

// ---------------------------------------------------------------------------
// 11. TL2 exactness

SuiteResult suite_tl2(int) {
  SuiteResult res{"tl2", {}, true, 0.0};
  Rng rng(31);

  auto random_instance = [&](std::size_t n, std::vector<double>& x, std::vector<double>& f) {
    x.resize(2 * n);
    f.resize(n);
    for (auto& v : x) v = rng.uniform();
    for (auto& v : f) v = rng.uniform();
  };

  // exact assignment vs factorial brute force on 8-point instances
  std::size_t fail_bf = 0;
  for (int inst = 0; inst < 50; ++inst) {
    std::vector<double> xa, fa, xb, fb;
    random_instance(8, xa, fa);
    random_instance(8, xb, fb);
    const auto d = tl2_distance(xa, fa, xb, fb, 2, Tl2Mode::ExactAssignment);

    std::array<int, 8> perm{0, 1, 2, 3, 4, 5, 6, 7};
    double best = 1e300;
    do {
      double tot = 0.0;
      for (int i = 0; i < 8; ++i) {
        const double dx = xa[2 * i] - xb[2 * perm[i]];
        const double dy = xa[2 * i + 1] - xb[2 * perm[i] + 1];
        const double df = fa[i] - fb[perm[i]];
        tot += dx * dx + dy * dy + df * df;
      }
      best = std::min(best, tot);
    } while (std::next_permutation(perm.begin(), perm.end()));
    const double dbf = std::sqrt(best / 8.0);
    fail_bf += std::fabs(d.value - dbf) > 1e-12;
  }
  add_row(res, "tl2.brute_force", "50 instances n=8", static_cast<double>(fail_bf), 0, 0,
          fail_bf == 0);

  // triangle inequality on 16-point instances
  std::size_t fail_tri = 0;
  for (int inst = 0; inst < 100; ++inst) {
    std::vector<double> xa, fa, xb, fb, xc, fc;
    random_instance(16, xa, fa);
    random_instance(16, xb, fb);
    random_instance(16, xc, fc);
    const double dab = tl2_distance(xa, fa, xb, fb, 2, Tl2Mode::ExactAssignment).value;
    const double dbc = tl2_distance(xb, fb, xc, fc, 2, Tl2Mode::ExactAssignment).value;
    const double dac = tl2_distance(xa, fa, xc, fc, 2, Tl2Mode::ExactAssignment).value;
    fail_tri += !(dac <= dab + dbc + 1e-10);
  }
  add_row(res, "tl2.triangle", "100 triples n=16", static_cast<double>(fail_tri), 0, 0,
          fail_tri == 0);

  // identical pairs have distance zero; the 1-D deltas give sqrt(2)
  std::vector<double> x{0.25, 0.5}, f{0.75};
  const auto dzero = tl2_distance(x, f, x, f, 2, Tl2Mode::ExactAssignment);
  add_row(res, "tl2.identity", "d((m,f),(m,f))", dzero.value, 0.0, 1e-15, dzero.value <= 1e-15);
  std::vector<double> x0{0.0}, f0{0.0}, x1{1.0}, f1{1.0};
  const auto dd = tl2_distance(x0, f0, x1, f1, 1, Tl2Mode::ExactAssignment);
  add_abs_row(res, "tl2.deltas", "delta_0 vs delta_1", dd.value, std::sqrt(2.0), 1e-12);
  return res;
}

// ---------------------------------------------------------------------------
// 12. ball-kernel singular-point expected failure

SuiteResult suite_singular_ball(int) {
  SuiteResult res{"singular-ball", {}, true, 0.0};
  // radial paraboloid |x - p|^2: zero gradient at p, F = {2} exactly
  const double p0[2] = {0.31, 0.47};
  auto phi = [&](std::span<const double> x) {
    const double dx = x[0] - p0[0], dy = x[1] - p0[1];
    return dx * dx + dy * dy;
  };
  const std::size_t nodes = 400000;

  for (double r : {0.1, 0.05}) {
    const auto mc_ball =
        continuous_median_mc(phi, {p0, 2}, KernelSpec::ball(r), 2, nodes, 99);
    const double mt_ball = mc_ball.value / (r * r);
    const double pred_ball = 2.0 * moments(KernelSpec::ball(r), 2).c_A;  // 1/3
    const double rel_ball = std::fabs(mt_ball - pred_ball) / pred_ball;
    char param[96];
    std::snprintf(param, sizeof param, "ball r=%g mtilde=%.4f", r, mt_ball);
    // expected failure: the ball's error stays ~50% at every r
    add_row(res, "singular.ball_expected_fail", param, rel_ball, 0.5, 0.3, rel_ball > 0.20);

    const KernelSpec ann = KernelSpec::annulus(0.9, r);
    const auto mc_ann = continuous_median_mc(phi, {p0, 2}, ann, 2, nodes, 99);
    const double mt_ann = mc_ann.value / (r * r);
    const double pred_ann = 2.0 * moments(ann, 2).c_A;
    std::snprintf(param, sizeof param, "annulus:0.9 r=%g", r);
    add_abs_row(res, "singular.annulus_passes", param, mt_ann, pred_ann, 0.05);
  }

  // the closed-form gap between the measured and predicted values is
  // (1 - kappa)^2 / 6; the ball is its kappa = 0 extreme
  const double kap = 0.9;
  const double gap_pred = (1.0 - kap) * (1.0 - kap) / 6.0;
  const double mt_exact = 0.5 * (1.0 + kap * kap);
  const double pred = (1.0 / 3.0) * (1.0 + kap + kap * kap);
  add_row(res, "singular.gap_closed_form", "annulus:0.9", mt_exact - pred, gap_pred, 1e-12,
          std::fabs(mt_exact - pred - gap_pred) <= 1e-12);
  return res;
}

// ---------------------------------------------------------------------------

using SuiteFn = SuiteResult (*)(int);

const std::vector<std::pair<std::string, SuiteFn>>& registry() {
  static const std::vector<std::pair<std::string, SuiteFn>> reg = {
      {"consistency", suite_consistency},
      {"oberman", suite_oberman},
      {"shrinking-circle", suite_shrinking_circle},
      {"identities", suite_identities},
      {"median-oracle", suite_median_oracle},
      {"dkw", suite_dkw},
      {"dirichlet-gamma", suite_dirichlet},
      {"heat-decay", suite_heat_decay},
      {"tv-gamma", suite_tv},
      {"young-angle", suite_young_angle},
      {"tl2", suite_tl2},
      {"singular-ball", suite_singular_ball},
  };
  return reg;
}

}  // namespace

std::vector<std::string> verify_suite_names() {
  std::vector<std::string> names;
  for (const auto& [name, _] : registry()) names.push_back(name);
  return names;
}

SuiteResult run_verify_suite(const std::string& name, int threads) {
  for (const auto& [n, fn] : registry()) {
    if (n != name) continue;
    const auto t0 = Clock::now();
    SuiteResult res = fn(threads);
    res.name = name;
    res.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return res;
  }
  throw ConfigError("unknown verify suite '" + name + "'");
}

}  // namespace medflow
