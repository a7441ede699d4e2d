#include "medflow/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "medflow/parallel.hpp"

namespace medflow {

std::vector<double> symmetric_eigenvalues(std::span<const double> m, int d) {
  std::vector<double> a(m.begin(), m.end());
  auto at = [&](int i, int j) -> double& { return a[i * d + j]; };
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) off += at(i, j) * at(i, j);
    if (off < 1e-30) break;
    for (int p = 0; p < d; ++p) {
      for (int q = p + 1; q < d; ++q) {
        if (std::fabs(at(p, q)) < 1e-300) continue;
        const double theta = 0.5 * (at(q, q) - at(p, p)) / at(p, q);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < d; ++k) {
          const double akp = at(k, p), akq = at(k, q);
          at(k, p) = c * akp - s * akq;
          at(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < d; ++k) {
          const double apk = at(p, k), aqk = at(q, k);
          at(p, k) = c * apk - s * aqk;
          at(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(d);
  for (int i = 0; i < d; ++i) ev[i] = at(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

FValue levelset_F(std::span<const double> grad, std::span<const double> hess, int d) {
  double g2 = 0.0;
  for (int i = 0; i < d; ++i) g2 += grad[i] * grad[i];
  double trace = 0.0;
  for (int i = 0; i < d; ++i) trace += hess[i * d + i];

  if (g2 > 0.0) {
    // trace minus the normal-normal second derivative
    double nn = 0.0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) nn += grad[i] * hess[i * d + j] * grad[j];
    const double v = trace - nn / g2;
    return {v, v};
  }
  const auto ev = symmetric_eigenvalues(hess, d);
  return {trace - ev[d - 1], trace - ev[0]};
}

double QuadraticTestField::operator()(std::span<const double> x) const {
  const int m = d - 1;
  double v = x[d - 1];
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) v += a[i * m + j] * x[i] * x[j];
  for (int i = 0; i < m; ++i) v += b[i] * x[i] * x[d - 1];
  v += b_d * x[d - 1] * x[d - 1];
  return v;
}

double QuadraticTestField::exact_F() const {
  const int m = d - 1;
  double tr = 0.0;
  for (int i = 0; i < m; ++i) tr += a[i * m + i];
  return 2.0 * tr;
}

std::vector<ConsistencyRow> measure_consistency(const QuadraticTestField& field,
                                                const KernelSpec& shape,
                                                std::span<const double> radii,
                                                std::size_t mc_nodes, std::uint64_t seed) {
  std::vector<ConsistencyRow> rows;
  std::vector<double> origin(field.d, 0.0);
  for (double r : radii) {
    KernelSpec spec = shape;
    spec.r = r;
    const auto mom = moments(spec, field.d);
    const auto mc = continuous_median_mc(
        [&](std::span<const double> x) { return field(x); }, origin, spec, field.d, mc_nodes,
        seed);
    ConsistencyRow row;
    row.r = r;
    row.measured = mc.value / (r * r);  // phi(0) = 0 in normal form
    row.predicted = mom.c_A * field.exact_F();
    row.envelope = mc.envelope / (r * r);
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// front tracking

CurveFront CurveFront::circle(double cx, double cy, double radius, std::size_t n) {
  CurveFront f;
  f.xy.resize(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const double th = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(n);
    f.xy[2 * i] = cx + radius * std::cos(th);
    f.xy[2 * i + 1] = cy + radius * std::sin(th);
  }
  f.spacing = 2.0 * M_PI * radius / static_cast<double>(n);
  return f;
}

CurveFront CurveFront::ellipse(double cx, double cy, double a, double b, std::size_t n) {
  CurveFront f;
  f.xy.resize(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const double th = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(n);
    f.xy[2 * i] = cx + a * std::cos(th);
    f.xy[2 * i + 1] = cy + b * std::sin(th);
  }
  f.spacing = f.perimeter() / static_cast<double>(n);
  return f;
}

double CurveFront::area() const {
  const std::size_t n = size();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    s += xy[2 * i] * xy[2 * j + 1] - xy[2 * j] * xy[2 * i + 1];
  }
  return 0.5 * s;
}

double CurveFront::perimeter() const {
  const std::size_t n = size();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    s += std::hypot(xy[2 * j] - xy[2 * i], xy[2 * j + 1] - xy[2 * i + 1]);
  }
  return s;
}

namespace {

bool segments_intersect(const double* p, const double* q, const double* r, const double* s) {
  auto cross = [](double ax, double ay, double bx, double by) { return ax * by - ay * bx; };
  const double d1 = cross(q[0] - p[0], q[1] - p[1], r[0] - p[0], r[1] - p[1]);
  const double d2 = cross(q[0] - p[0], q[1] - p[1], s[0] - p[0], s[1] - p[1]);
  const double d3 = cross(s[0] - r[0], s[1] - r[1], p[0] - r[0], p[1] - r[1]);
  const double d4 = cross(s[0] - r[0], s[1] - r[1], q[0] - r[0], q[1] - r[1]);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
}

}  // namespace

bool CurveFront::is_simple() const {
  const std::size_t n = size();
  if (n > 2000) return true;  // scan is O(n^2); larger fronts skip the check
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t i2 = (i + 1) % n;
    for (std::size_t j = i + 1; j < n; ++j) {
      const std::size_t j2 = (j + 1) % n;
      if (j == i || j2 == i || j == i2) continue;
      if (segments_intersect(&xy[2 * i], &xy[2 * i2], &xy[2 * j], &xy[2 * j2])) return false;
    }
  }
  return true;
}

std::vector<double> front_curvatures(const CurveFront& front) {
  const std::size_t n = front.size();
  std::vector<double> k(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ip = (i + n - 1) % n, in = (i + 1) % n;
    const double ax = front.xy[2 * i] - front.xy[2 * ip];
    const double ay = front.xy[2 * i + 1] - front.xy[2 * ip + 1];
    const double bx = front.xy[2 * in] - front.xy[2 * i];
    const double by = front.xy[2 * in + 1] - front.xy[2 * i + 1];
    const double cx = front.xy[2 * in] - front.xy[2 * ip];
    const double cy = front.xy[2 * in + 1] - front.xy[2 * ip + 1];
    const double cross = ax * by - ay * bx;
    const double la = std::hypot(ax, ay), lb = std::hypot(bx, by), lc = std::hypot(cx, cy);
    if (la * lb * lc == 0.0) continue;
    // signed inverse circumradius of the vertex triple
    k[i] = 2.0 * cross / (la * lb * lc);
  }
  return k;
}

CurveFront front_tracking_step(const CurveFront& front, double dt) {
  const std::size_t n = front.size();
  if (n < 4) throw TopologyChangeError("front collapsed below 4 vertices");

  double min_edge = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    min_edge = std::min(min_edge, std::hypot(front.xy[2 * j] - front.xy[2 * i],
                                             front.xy[2 * j + 1] - front.xy[2 * i + 1]));
  }
  if (!(dt <= 0.1 * min_edge * min_edge))
    throw TopologyChangeError("dt exceeds 0.1 * (min edge)^2");
  if (!front.is_simple()) throw TopologyChangeError("front is not simple");

  const auto k = front_curvatures(front);
  CurveFront moved = front;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ip = (i + n - 1) % n, in = (i + 1) % n;
    double tx = front.xy[2 * in] - front.xy[2 * ip];
    double ty = front.xy[2 * in + 1] - front.xy[2 * ip + 1];
    const double lt = std::hypot(tx, ty);
    if (lt == 0.0) continue;
    tx /= lt;
    ty /= lt;
    // outward normal of a counterclockwise curve; velocity is -kappa * nu
    const double nx = ty, ny = -tx;
    moved.xy[2 * i] = front.xy[2 * i] - k[i] * dt * nx;
    moved.xy[2 * i + 1] = front.xy[2 * i + 1] - k[i] * dt * ny;
  }

  // resample to uniform spacing along the moved polygon
  std::vector<double> cum(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    cum[i + 1] = cum[i] + std::hypot(moved.xy[2 * j] - moved.xy[2 * i],
                                     moved.xy[2 * j + 1] - moved.xy[2 * i + 1]);
  }
  const double per = cum[n];
  if (!(per > 0.0)) throw TopologyChangeError("front collapsed to a point");
  CurveFront out;
  out.xy.resize(2 * n);
  out.spacing = per / static_cast<double>(n);
  std::size_t seg = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double target = per * static_cast<double>(i) / static_cast<double>(n);
    while (seg + 1 < n && cum[seg + 1] <= target) ++seg;
    const double len = cum[seg + 1] - cum[seg];
    const double t = len > 0.0 ? (target - cum[seg]) / len : 0.0;
    const std::size_t j = (seg + 1) % n;
    out.xy[2 * i] = moved.xy[2 * seg] * (1.0 - t) + moved.xy[2 * j] * t;
    out.xy[2 * i + 1] = moved.xy[2 * seg + 1] * (1.0 - t) + moved.xy[2 * j + 1] * t;
  }

  if (!out.is_simple()) throw TopologyChangeError("front self-intersected after step");
  return out;
}

// ---------------------------------------------------------------------------
// DKW

DkwResult dkw_envelope_test(const std::function<double(Rng&)>& sampler,
                            const std::function<double(double)>& cdf, std::size_t n, double eps,
                            std::size_t trials, std::uint64_t seed) {
  if (trials < 100) throw Error(errc::verification, "dkw_envelope_test needs >= 100 trials");
  DkwResult res;
  res.bound = 2.0 * std::exp(-2.0 * static_cast<double>(n) * eps * eps);
  if (res.bound >= 1.0) {
    res.vacuous = true;
    res.pass = true;
    return res;
  }

  std::vector<std::uint8_t> violated(trials, 0);
  parallel_for(trials, 0, [&](std::size_t b, std::size_t e) {
    std::vector<double> sample(n);
    for (std::size_t t = b; t < e; ++t) {
      Rng rng(seed + 0x9e37 * (t + 1));  // independent per-trial streams
      for (std::size_t i = 0; i < n; ++i) sample[i] = sampler(rng);
      std::sort(sample.begin(), sample.end());
      double sup = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double F = cdf(sample[i]);
        sup = std::max(sup, std::fabs(static_cast<double>(i + 1) / n - F));
        sup = std::max(sup, std::fabs(F - static_cast<double>(i) / n));
      }
      violated[t] = sup > eps;
    }
  });
  std::size_t count = 0;
  for (auto v : violated) count += v;
  res.violation_rate = static_cast<double>(count) / static_cast<double>(trials);
  res.sigma = std::sqrt(std::max(res.bound * (1.0 - res.bound), 1e-12) /
                        static_cast<double>(trials));
  res.pass = res.violation_rate <= res.bound + 3.0 * res.sigma;
  return res;
}

// ---------------------------------------------------------------------------
// error metrics

ErrorMetrics error_metrics(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(errc::verification, "error_metrics size mismatch");
  ErrorMetrics m;
  double s2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = std::fabs(a[i] - b[i]);
    m.sup = std::max(m.sup, d);
    s2 += d * d;
  }
  m.l2 = a.empty() ? 0.0 : std::sqrt(s2 / static_cast<double>(a.size()));
  return m;
}

namespace {

double point_segment_dist2(double px, double py, const double* s) {
  const double vx = s[2] - s[0], vy = s[3] - s[1];
  const double wx = px - s[0], wy = py - s[1];
  const double vv = vx * vx + vy * vy;
  double t = vv > 0.0 ? (wx * vx + wy * vy) / vv : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double dx = px - (s[0] + t * vx), dy = py - (s[1] + t * vy);
  return dx * dx + dy * dy;
}

double directed_hausdorff(std::span<const double> a, std::span<const double> b, double densify) {
  double worst = 0.0;
  for (std::size_t i = 0; i + 3 < a.size(); i += 4) {
    const double len = std::hypot(a[i + 2] - a[i], a[i + 3] - a[i + 1]);
    const int steps = std::max(1, static_cast<int>(std::ceil(len / densify)));
    for (int s = 0; s <= steps; ++s) {
      const double t = static_cast<double>(s) / steps;
      const double px = a[i] + t * (a[i + 2] - a[i]);
      const double py = a[i + 1] + t * (a[i + 3] - a[i + 1]);
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j + 3 < b.size(); j += 4)
        best = std::min(best, point_segment_dist2(px, py, &b[j]));
      worst = std::max(worst, best);
    }
  }
  return std::sqrt(worst);
}

}  // namespace

std::optional<double> hausdorff_distance(std::span<const double> segs_a,
                                         std::span<const double> segs_b, double densify) {
  if (segs_a.empty() || segs_b.empty()) return std::nullopt;
  return std::max(directed_hausdorff(segs_a, segs_b, densify),
                  directed_hausdorff(segs_b, segs_a, densify));
}

std::vector<double> extract_level_segments(std::span<const double> nodes, int res, double lo,
                                           double hi, double q) {
  std::vector<double> segs;
  const double step = (hi - lo) / res;
  auto at = [&](int ix, int iy) { return nodes[iy * (res + 1) + ix] - q; };
  auto interp = [&](double a, double b) { return a / (a - b); };
  for (int iy = 0; iy < res; ++iy) {
    for (int ix = 0; ix < res; ++ix) {
      const double v00 = at(ix, iy), v10 = at(ix + 1, iy);
      const double v01 = at(ix, iy + 1), v11 = at(ix + 1, iy + 1);
      // crossing points on the four cell edges
      double px[4], py[4];
      int np = 0;
      if ((v00 < 0) != (v10 < 0)) {
        px[np] = lo + (ix + interp(v00, v10)) * step;
        py[np++] = lo + iy * step;
      }
      if ((v10 < 0) != (v11 < 0)) {
        px[np] = lo + (ix + 1) * step;
        py[np++] = lo + (iy + interp(v10, v11)) * step;
      }
      if ((v01 < 0) != (v11 < 0)) {
        px[np] = lo + (ix + interp(v01, v11)) * step;
        py[np++] = lo + (iy + 1) * step;
      }
      if ((v00 < 0) != (v01 < 0)) {
        px[np] = lo + ix * step;
        py[np++] = lo + (iy + interp(v00, v01)) * step;
      }
      if (np >= 2) {
        segs.push_back(px[0]);
        segs.push_back(py[0]);
        segs.push_back(px[1]);
        segs.push_back(py[1]);
        if (np == 4) {  // saddle: emit the second pair as well
          segs.push_back(px[2]);
          segs.push_back(py[2]);
          segs.push_back(px[3]);
          segs.push_back(py[3]);
        }
      }
    }
  }
  return segs;
}

void write_verify_csv(const std::string& path, std::span<const VerifyRow> rows,
                      const std::string& header_comment) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("cannot open for writing: " + path);
  if (!header_comment.empty()) std::fprintf(f, "# %s\n", header_comment.c_str());
  std::fprintf(f, "test,parameter,measured,predicted,tolerance,pass\n");
  for (const auto& r : rows)
    std::fprintf(f, "%s,%s,%.17g,%.17g,%.17g,%d\n", r.test.c_str(), r.parameter.c_str(),
                 r.measured, r.predicted, r.tolerance, r.pass ? 1 : 0);
  std::fclose(f);
}

}  // namespace medflow
