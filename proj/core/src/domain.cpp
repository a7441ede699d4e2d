#include "medflow/domain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "medflow/rng.hpp"

namespace medflow {

double unit_ball_volume(int d) {
  // omega_d = pi^(d/2) / Gamma(d/2 + 1)
  return std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

Domain Domain::torus(int d) {
  if (d < 2 || d > 8) throw InvalidDomainError("torus dimension must be in [2,8]");
  Domain dom;
  dom.kind_ = Kind::Torus;
  dom.dim_ = d;
  dom.lo_.assign(d, 0.0);
  dom.hi_.assign(d, 1.0);
  return dom;
}

Domain Domain::box(std::vector<double> lo, std::vector<double> hi, Sdf boundary_sdf) {
  if (lo.size() != hi.size() || lo.size() < 2 || lo.size() > 8)
    throw InvalidDomainError("box needs matching lo/hi bounds with dimension in [2,8]");
  for (std::size_t i = 0; i < lo.size(); ++i)
    if (!(lo[i] < hi[i])) throw InvalidDomainError("box has zero or negative extent");
  Domain dom;
  dom.kind_ = Kind::Box;
  dom.dim_ = static_cast<int>(lo.size());
  dom.lo_ = std::move(lo);
  dom.hi_ = std::move(hi);
  if (!boundary_sdf) {
    // signed distance of the axis box itself
    std::vector<double> l = dom.lo_, h = dom.hi_;
    boundary_sdf = [l, h](std::span<const double> x) {
      double inside = -std::numeric_limits<double>::infinity();
      double out2 = 0.0;
      for (std::size_t i = 0; i < l.size(); ++i) {
        double dz = std::max(l[i] - x[i], x[i] - h[i]);
        inside = std::max(inside, dz);
        if (dz > 0.0) out2 += dz * dz;
      }
      return inside <= 0.0 ? inside : std::sqrt(out2);
    };
  }
  dom.sdf_ = std::make_shared<const Sdf>(std::move(boundary_sdf));
  return dom;
}

double Domain::bounding_volume() const {
  double v = 1.0;
  for (int i = 0; i < dim_; ++i) v *= hi_[i] - lo_[i];
  return v;
}

double Domain::signed_distance(std::span<const double> x) const {
  if (kind_ != Kind::Box) throw InvalidDomainError("signed_distance requires a Box domain");
  return (*sdf_)(x);
}

bool Domain::contains(std::span<const double> x) const {
  if (kind_ == Kind::Torus) {
    for (int i = 0; i < dim_; ++i)
      if (x[i] < 0.0 || x[i] >= 1.0) return false;
    return true;
  }
  return signed_distance(x) < 0.0;
}

double Domain::dist2(std::span<const double> a, std::span<const double> b) const {
  double s = 0.0;
  if (kind_ == Kind::Torus) {
    for (int i = 0; i < dim_; ++i) {
      double d = std::fabs(a[i] - b[i]);
      d = std::min(d, 1.0 - d);
      s += d * d;
    }
  } else {
    for (int i = 0; i < dim_; ++i) {
      double d = a[i] - b[i];
      s += d * d;
    }
  }
  return s;
}

double Domain::dist(std::span<const double> a, std::span<const double> b) const {
  return std::sqrt(dist2(a, b));
}

// ---------------------------------------------------------------------------
// PointCloud

PointCloud::PointCloud(Domain domain, std::vector<double> positions, double cell_size,
                       std::uint64_t seed)
    : domain_(std::move(domain)),
      n_(positions.size() / static_cast<std::size_t>(domain_.dim())),
      pts_(std::move(positions)),
      seed_(seed),
      requested_cell_(cell_size) {
  if (pts_.size() != n_ * static_cast<std::size_t>(domain_.dim()))
    throw InvalidDomainError("positions length is not a multiple of the dimension");
  if (!(cell_size > 0.0)) throw IndexConfigError("index cell size must be positive");
  build_index();
}

void PointCloud::build_index() {
  const int d = dim();
  cells_per_axis_.resize(d);
  cell_len_.resize(d);
  min_cell_ = std::numeric_limits<double>::infinity();
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) {
    const double len = domain_.hi()[i] - domain_.lo()[i];
    int m = std::max(1, static_cast<int>(std::floor(len / requested_cell_)));
    cells_per_axis_[i] = m;
    cell_len_[i] = len / m;  // >= requested_cell_
    min_cell_ = std::min(min_cell_, cell_len_[i]);
    total *= static_cast<std::size_t>(m);
  }

  std::vector<std::uint32_t> cell_of(n_);
  for (std::size_t p = 0; p < n_; ++p) {
    const double* x = pts_.data() + p * d;
    std::size_t c = 0;
    for (int i = 0; i < d; ++i) {
      int ci = static_cast<int>((x[i] - domain_.lo()[i]) / cell_len_[i]);
      ci = std::clamp(ci, 0, cells_per_axis_[i] - 1);
      c = c * static_cast<std::size_t>(cells_per_axis_[i]) + static_cast<std::size_t>(ci);
    }
    cell_of[p] = static_cast<std::uint32_t>(c);
  }

  bucket_start_.assign(total + 1, 0);
  for (std::size_t p = 0; p < n_; ++p) bucket_start_[cell_of[p] + 1]++;
  for (std::size_t c = 0; c < total; ++c) bucket_start_[c + 1] += bucket_start_[c];
  order_.resize(n_);
  std::vector<std::uint32_t> cursor(bucket_start_.begin(), bucket_start_.end() - 1);
  for (std::size_t p = 0; p < n_; ++p) order_[cursor[cell_of[p]]++] = static_cast<std::uint32_t>(p);
}

namespace {

// Enumerates the grid cells overlapping a center cell's 3^d neighborhood,
// with wraparound on the torus. Cells are deduplicated when an axis has
// fewer than 3 cells.
struct CellRange {
  int lo, hi;  // inclusive, possibly out of [0,m) before wrapping
};

}  // namespace

void PointCloud::neighbors_unsorted_into(std::span<const double> center, double r_outer,
                                         double r_inner, std::vector<std::uint32_t>& out) const {
  out.clear();
  if (r_inner > r_outer) throw IndexConfigError("r_inner exceeds r_outer");
  if (r_outer > min_cell_ * (1.0 + 1e-12))
    throw IndexConfigError("query radius exceeds the index cell size");
  if (r_inner == r_outer) return;

  const int d = dim();
  const double r2o = r_outer * r_outer;
  const double r2i = r_inner * r_inner;

  // per-axis candidate cell coordinates
  int counts[8];
  int axis_cells[8][3];
  for (int i = 0; i < d; ++i) {
    const int m = cells_per_axis_[i];
    int ci = static_cast<int>((center[i] - domain_.lo()[i]) / cell_len_[i]);
    ci = std::clamp(ci, 0, m - 1);
    int cnt = 0;
    for (int off = -1; off <= 1; ++off) {
      int c = ci + off;
      if (domain_.is_torus()) {
        c = (c % m + m) % m;
      } else if (c < 0 || c >= m) {
        continue;
      }
      bool dup = false;
      for (int k = 0; k < cnt; ++k) dup |= (axis_cells[i][k] == c);
      if (!dup) axis_cells[i][cnt++] = c;
    }
    counts[i] = cnt;
  }

  // walk the cartesian product of candidate cells
  int idx[8] = {0};
  for (;;) {
    std::size_t cell = 0;
    for (int i = 0; i < d; ++i)
      cell = cell * static_cast<std::size_t>(cells_per_axis_[i]) +
             static_cast<std::size_t>(axis_cells[i][idx[i]]);
    const std::uint32_t b = bucket_start_[cell];
    const std::uint32_t e = bucket_start_[cell + 1];
    for (std::uint32_t k = b; k < e; ++k) {
      const std::uint32_t p = order_[k];
      const double d2 = domain_.dist2(center, point(p));
      if (d2 > r2i && d2 <= r2o) out.push_back(p);
    }
    int i = d - 1;
    while (i >= 0 && ++idx[i] == counts[i]) idx[i--] = 0;
    if (i < 0) break;
  }
}

void PointCloud::neighbors_into(std::span<const double> center, double r_outer, double r_inner,
                                std::vector<std::uint32_t>& out) const {
  neighbors_unsorted_into(center, r_outer, r_inner, out);
  std::sort(out.begin(), out.end());
}

std::vector<std::uint32_t> PointCloud::neighbors(std::span<const double> center, double r_outer,
                                                 double r_inner) const {
  std::vector<std::uint32_t> out;
  neighbors_into(center, r_outer, r_inner, out);
  return out;
}

std::size_t PointCloud::bucket_of(std::span<const double> x) const {
  const int d = dim();
  std::size_t c = 0;
  for (int i = 0; i < d; ++i) {
    int ci = static_cast<int>((x[i] - domain_.lo()[i]) / cell_len_[i]);
    ci = std::clamp(ci, 0, cells_per_axis_[i] - 1);
    c = c * static_cast<std::size_t>(cells_per_axis_[i]) + static_cast<std::size_t>(ci);
  }
  return c;
}

void PointCloud::bucket_ring(std::size_t b, std::vector<std::uint32_t>& out) const {
  out.clear();
  const int d = dim();
  int coord[8];
  for (int i = d - 1; i >= 0; --i) {
    coord[i] = static_cast<int>(b % static_cast<std::size_t>(cells_per_axis_[i]));
    b /= static_cast<std::size_t>(cells_per_axis_[i]);
  }
  int counts[8];
  int axis_cells[8][3];
  for (int i = 0; i < d; ++i) {
    const int m = cells_per_axis_[i];
    int cnt = 0;
    for (int off = -1; off <= 1; ++off) {
      int c = coord[i] + off;
      if (domain_.is_torus()) {
        c = (c % m + m) % m;
      } else if (c < 0 || c >= m) {
        continue;
      }
      bool dup = false;
      for (int k = 0; k < cnt; ++k) dup |= (axis_cells[i][k] == c);
      if (!dup) axis_cells[i][cnt++] = c;
    }
    counts[i] = cnt;
  }
  int idx[8] = {0};
  for (;;) {
    std::size_t cell = 0;
    for (int i = 0; i < d; ++i)
      cell = cell * static_cast<std::size_t>(cells_per_axis_[i]) +
             static_cast<std::size_t>(axis_cells[i][idx[i]]);
    out.push_back(static_cast<std::uint32_t>(cell));
    int i = d - 1;
    while (i >= 0 && ++idx[i] == counts[i]) idx[i--] = 0;
    if (i < 0) break;
  }
}

std::uint32_t PointCloud::nearest(std::span<const double> x) const {
  if (n_ == 0) throw InvalidDomainError("nearest() on an empty cloud");
  const int d = dim();
  int ci[8];
  for (int i = 0; i < d; ++i) {
    int c = static_cast<int>((x[i] - domain_.lo()[i]) / cell_len_[i]);
    ci[i] = std::clamp(c, 0, cells_per_axis_[i] - 1);
  }
  double best2 = std::numeric_limits<double>::infinity();
  std::uint32_t best = 0;
  for (int ring = 0;; ++ring) {
    // all cells with Chebyshev cell-distance == ring
    bool any_cell = false;
    int offs[8];
    for (int i = 0; i < d; ++i) offs[i] = -ring;
    for (;;) {
      int cheb = 0;
      for (int i = 0; i < d; ++i) cheb = std::max(cheb, std::abs(offs[i]));
      if (cheb == ring) {
        std::size_t cell = 0;
        bool valid = true;
        for (int i = 0; i < d; ++i) {
          const int m = cells_per_axis_[i];
          int c = ci[i] + offs[i];
          if (domain_.is_torus()) {
            if (2 * ring + 1 > m && (offs[i] < -(m / 2) || offs[i] > m / 2)) valid = false;
            c = (c % m + m) % m;
          } else if (c < 0 || c >= m) {
            valid = false;
          }
          if (!valid) break;
          cell = cell * static_cast<std::size_t>(m) + static_cast<std::size_t>(c);
        }
        if (valid) {
          any_cell = true;
          for (std::uint32_t k = bucket_start_[cell]; k < bucket_start_[cell + 1]; ++k) {
            const std::uint32_t p = order_[k];
            const double d2 = domain_.dist2(x, point(p));
            if (d2 < best2 || (d2 == best2 && p < best)) {
              best2 = d2;
              best = p;
            }
          }
        }
      }
      int i = d - 1;
      while (i >= 0 && ++offs[i] > ring) offs[i--] = -ring;
      if (i < 0) break;
    }
    // a hit within `ring` cells is final once the next ring cannot be closer
    const double safe = ring * min_cell_;
    if (best2 <= safe * safe) break;
    if (!any_cell && ring > 0 && best2 < std::numeric_limits<double>::infinity()) break;
    int max_cells = *std::max_element(cells_per_axis_.begin(), cells_per_axis_.end());
    if (ring > max_cells + 1) break;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Sampling

PointCloud sample(const Domain& domain, const SamplerConfig& cfg, double index_cell_size) {
  const int d = domain.dim();
  if (domain.bounding_volume() <= 0.0) throw InvalidDomainError("zero-volume domain");

  Rng rng(cfg.seed);
  std::size_t target;
  if (cfg.process == SamplerConfig::Process::UniformIID) {
    if (cfg.count_or_intensity < 1.0) throw InvalidDomainError("UniformIID needs N >= 1");
    target = static_cast<std::size_t>(cfg.count_or_intensity);
  } else {
    if (!(cfg.count_or_intensity > 0.0)) throw InvalidDomainError("Poisson needs intensity > 0");
    // thinning: a Poisson process on the bounding box restricted to D is a
    // Poisson process on D with the same intensity
    target = static_cast<std::size_t>(
        rng.poisson(cfg.count_or_intensity * domain.bounding_volume()));
  }

  std::vector<double> pts;
  pts.reserve(target * static_cast<std::size_t>(d));
  double x[8];
  std::size_t accepted = 0;
  std::size_t proposals = 0;
  const std::size_t max_proposals = 1000 * std::max<std::size_t>(target, 1) + 100000;
  while (accepted < target) {
    if (++proposals > max_proposals)
      throw InvalidDomainError("rejection sampling stalled; boundary_sdf admits no interior");
    for (int i = 0; i < d; ++i) x[i] = rng.uniform(domain.lo()[i], domain.hi()[i]);
    std::span<const double> xs(x, static_cast<std::size_t>(d));
    if (domain.kind() == Domain::Kind::Box) {
      if (!(domain.signed_distance(xs) < 0.0)) {
        if (cfg.process == SamplerConfig::Process::Poisson) --target;  // thinned away
        continue;
      }
    }
    pts.insert(pts.end(), x, x + d);
    ++accepted;
  }
  return PointCloud(domain, std::move(pts), index_cell_size, cfg.seed);
}

// ---------------------------------------------------------------------------
// Volume fractions

VolumeFractions volume_fractions(const Domain& domain, std::span<const double> center, double r,
                                 std::size_t nodes) {
  if (domain.kind() != Domain::Kind::Box)
    throw InvalidDomainError("volume_fractions requires a Box domain");
  nodes = std::max<std::size_t>(nodes, 4096);
  const int d = domain.dim();

  // interior centers short-circuit: sdf is 1-Lipschitz so depth > r covers B_r
  const double sd = domain.signed_distance(center);
  if (sd <= -r) return {1.0, 0.0};

  static thread_local std::vector<double> nodes2, nodes3;
  std::vector<double>* cache = (d == 2) ? &nodes2 : &nodes3;
  if (cache->size() != nodes * static_cast<std::size_t>(d)) *cache = qmc_unit_ball(d, nodes);

  std::size_t inside = 0;
  double y[8];
  for (std::size_t i = 0; i < nodes; ++i) {
    const double* u = cache->data() + i * d;
    for (int k = 0; k < d; ++k) y[k] = center[k] + r * u[k];
    if (domain.signed_distance({y, static_cast<std::size_t>(d)}) < 0.0) ++inside;
  }
  const double fin = static_cast<double>(inside) / static_cast<double>(nodes);
  return {fin, 1.0 - fin};
}

VolumeFractions volume_fractions_counting(const PointCloud& cloud, std::span<const double> center,
                                          double r) {
  auto ids = cloud.neighbors(center, r, 0.0);
  const double expected = static_cast<double>(cloud.size()) * unit_ball_volume(cloud.dim()) *
                          std::pow(r, cloud.dim()) / cloud.domain().bounding_volume();
  if (expected <= 0.0) return {0.0, 1.0};
  const double fin = std::min(1.0, static_cast<double>(ids.size()) / expected);
  return {fin, 1.0 - fin};
}

// ---------------------------------------------------------------------------
// Serialization

void save_cloud(const std::string& path, const PointCloud& cloud) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("cannot open for writing: " + path);
  std::fprintf(f, "# medflow-cloud v1 d=%d n=%zu seed=%llu\n", cloud.dim(), cloud.size(),
               static_cast<unsigned long long>(cloud.seed()));
  const int d = cloud.dim();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    auto p = cloud.point(i);
    for (int k = 0; k < d; ++k) std::fprintf(f, k ? " %.17g" : "%.17g", p[k]);
    std::fputc('\n', f);
  }
  std::fclose(f);
}

PointCloud load_cloud(const std::string& path, double index_cell_size) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  std::string header;
  std::getline(in, header);
  int d = 0;
  std::size_t n = 0;
  unsigned long long seed = 0;
  if (std::sscanf(header.c_str(), "# medflow-cloud v1 d=%d n=%zu seed=%llu", &d, &n, &seed) != 3)
    throw IoError("bad cloud header in " + path);
  std::vector<double> pts;
  pts.reserve(n * static_cast<std::size_t>(d));
  double v;
  while (in >> v) pts.push_back(v);
  if (pts.size() < n * static_cast<std::size_t>(d))
    throw IoError("truncated cloud file " + path);
  pts.resize(n * static_cast<std::size_t>(d));
  return PointCloud(Domain::torus(std::max(2, d)), std::move(pts), index_cell_size, seed);
}

}  // namespace medflow
