#pragma once

// Simulation domains (flat torus, box with a signed-distance boundary),
// point-process sampling, and fixed-radius neighbor queries over an immutable
// uniform bucket grid.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "medflow/errors.hpp"

namespace medflow {

using Sdf = std::function<double(std::span<const double>)>;

double unit_ball_volume(int d);

class Domain {
public:
  enum class Kind { Torus, Box };

  static Domain torus(int d);

  // boundary_sdf < 0 inside, > 0 outside, 1-Lipschitz. When absent, the
  // box's own signed distance is used.
  static Domain box(std::vector<double> lo, std::vector<double> hi, Sdf boundary_sdf = nullptr);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  bool is_torus() const { return kind_ == Kind::Torus; }

  std::span<const double> lo() const { return lo_; }
  std::span<const double> hi() const { return hi_; }
  double bounding_volume() const;

  double signed_distance(std::span<const double> x) const;  // Box only
  bool contains(std::span<const double> x) const;

  // squared distance with periodic wraparound on the torus
  double dist2(std::span<const double> a, std::span<const double> b) const;
  double dist(std::span<const double> a, std::span<const double> b) const;

private:
  Kind kind_ = Kind::Torus;
  int dim_ = 2;
  std::vector<double> lo_, hi_;
  std::shared_ptr<const Sdf> sdf_;
};

struct SamplerConfig {
  enum class Process { UniformIID, Poisson };
  Process process = Process::UniformIID;
  double count_or_intensity = 0.0;  // N for UniformIID, intensity per unit volume for Poisson
  std::uint64_t seed = 0;

  static SamplerConfig uniform_iid(double n, std::uint64_t seed) {
    return {Process::UniformIID, n, seed};
  }
  static SamplerConfig poisson(double intensity, std::uint64_t seed) {
    return {Process::Poisson, intensity, seed};
  }
};

// Sampled positions plus a uniform-grid bucket index. Immutable after
// construction; neighbors() is reentrant and mutation-free.
class PointCloud {
public:
  PointCloud(Domain domain, std::vector<double> positions, double cell_size,
             std::uint64_t seed = 0);

  const Domain& domain() const { return domain_; }
  int dim() const { return domain_.dim(); }
  std::size_t size() const { return n_; }
  std::uint64_t seed() const { return seed_; }
  double cell_size() const { return min_cell_; }

  std::span<const double> point(std::size_t i) const {
    return {pts_.data() + i * dim(), static_cast<std::size_t>(dim())};
  }
  std::span<const double> positions() const { return pts_; }

  // Exactly the indices with r_inner < dist(center, p) <= r_outer, ascending.
  // r_inner == r_outer yields the empty list (the fixed measure-zero
  // convention for annulus boundaries).
  std::vector<std::uint32_t> neighbors(std::span<const double> center, double r_outer,
                                       double r_inner = 0.0) const;
  void neighbors_into(std::span<const double> center, double r_outer, double r_inner,
                      std::vector<std::uint32_t>& out) const;
  // same point set in grid-bucket visit order; selection-type consumers do not
  // need the ascending sort
  void neighbors_unsorted_into(std::span<const double> center, double r_outer, double r_inner,
                               std::vector<std::uint32_t>& out) const;

  // index of the cloud point nearest to x (expanding ring search)
  std::uint32_t nearest(std::span<const double> x) const;

  // bucket-level access for narrow-band sweeps
  std::size_t bucket_count() const { return bucket_start_.size() - 1; }
  std::size_t bucket_of(std::span<const double> x) const;
  std::span<const std::uint32_t> bucket_points(std::size_t b) const {
    return {order_.data() + bucket_start_[b], bucket_start_[b + 1] - bucket_start_[b]};
  }
  // the 3^d bucket neighborhood of b (wrapping on the torus), deduplicated
  void bucket_ring(std::size_t b, std::vector<std::uint32_t>& out) const;

private:
  void build_index();
  friend struct GridWalker;

  Domain domain_;
  std::size_t n_;
  std::vector<double> pts_;
  std::uint64_t seed_;

  double requested_cell_;
  double min_cell_ = 0.0;
  std::vector<int> cells_per_axis_;
  std::vector<double> cell_len_;
  std::vector<std::uint32_t> bucket_start_;  // CSR offsets, size prod(cells)+1
  std::vector<std::uint32_t> order_;         // point ids grouped by bucket
};

// i.i.d. uniform or Poisson sampling of the domain; the grid cell size must
// be at least the largest radius later passed to neighbors().
PointCloud sample(const Domain& domain, const SamplerConfig& cfg, double index_cell_size);

// (|B_r(x) n D| / |B_r(x)| , complement fraction); deterministic QMC with at
// least 4096 nodes, frac_in + frac_out = 1 exactly.
struct VolumeFractions {
  double frac_in;
  double frac_out;
};
VolumeFractions volume_fractions(const Domain& domain, std::span<const double> center, double r,
                                 std::size_t nodes = 16384);

// Empirical fallback (cloud counting) for comparison with the quadrature.
VolumeFractions volume_fractions_counting(const PointCloud& cloud, std::span<const double> center,
                                          double r);

// `# medflow-cloud v1 d=<d> n=<n> seed=<seed>` then one point per line,
// 17 significant digits, single-space separated.
void save_cloud(const std::string& path, const PointCloud& cloud);
PointCloud load_cloud(const std::string& path, double index_cell_size);

}  // namespace medflow
