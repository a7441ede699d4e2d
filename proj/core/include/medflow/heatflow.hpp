#pragma once

// Discrete heat flow on the random geometric graph: graph Dirichlet energy,
// implicit-Euler minimizing movement, nonlocal TV / Young-angle energies, and
// TL2 transport distances between measure-function pairs.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "medflow/domain.hpp"
#include "medflow/kernels.hpp"

namespace medflow {

struct GraphField {
  std::shared_ptr<const PointCloud> cloud;
  std::vector<double> values;
  double r = 0.0;  // connection radius
};

GraphField make_graph_field(std::shared_ptr<const PointCloud> cloud, double r,
                            const std::function<double(std::span<const double>)>& f);

struct EnergyReport {
  double dirichlet = 0.0;
  double tv = 0.0;
  double l2 = 0.0;
  KernelMoments constants;
};

enum class LaplacianNormalization {
  ExpectedDegree,  // the 1/(N r^{d+2} omega_d) scaling
  Degree,          // per-point degree normalization (experiments only)
};

// E_{r,N}(u) = (1/2N) sum_x (1/(N r^d w_d)) sum_{y in B_r(x)} |(u(x)-u(y))/r|^2
double dirichlet_energy(const GraphField& f, int threads = 0);

// discrete L2 distance d_N(u,v) = sqrt((1/N) sum (u-v)^2)
double graph_distance(const GraphField& a, const GraphField& b);

// Precomputed adjacency for repeated solves. heat_step solves the implicit
// Euler / minimizing-movement system (I + tau L) u^{n+1} = u^n, with
// L = (2/(N r^{d+2} omega_d)) (D - W), the Euler-Lagrange operator of
// E_{r,N} in the d_N metric.
class HeatFlowOperator {
public:
  HeatFlowOperator(std::shared_ptr<const PointCloud> cloud, double r,
                   LaplacianNormalization norm = LaplacianNormalization::ExpectedDegree,
                   int threads = 0);

  void apply(std::span<const double> u, std::span<double> out) const;  // out = L u
  // iterative CG to relative residual 1e-10; SolverFailureError on stall
  GraphField heat_step(const GraphField& f, double tau) const;

  std::size_t components() const { return components_; }
  bool connected() const { return components_ == 1; }
  double scale() const { return scale_; }

private:
  std::shared_ptr<const PointCloud> cloud_;
  double r_;
  LaplacianNormalization norm_;
  int threads_;
  double scale_;
  std::vector<std::uint32_t> row_start_;
  std::vector<std::uint32_t> col_;
  std::size_t components_;
};

GraphField heat_step(const GraphField& f, double tau,
                     LaplacianNormalization norm = LaplacianNormalization::ExpectedDegree,
                     int threads = 0);

struct HeatTrajectory {
  std::vector<GraphField> snapshots;
  std::vector<double> requested_times;
  GraphField final_field;
  std::vector<double> energies;  // E_{r,N}(u^n) per step, starting at u^0
  bool energy_monotone = true;
  double max_step_distance = 0.0;  // max_n d_N(u^{n+1}, u^n)
};

HeatTrajectory minimizing_movement(const GraphField& g, double tau, double T,
                                   std::span<const double> snapshot_times = {},
                                   int threads = 0);

// Two-term Young-angle energy
//   E_h = (2s/sqrt(h)) II_D K_rh |u(x)-u(y)| + ((1-2s)/sqrt(h)) II K_rh |~u - ~u|
// with rh = sqrt(h), ~u the zero extension outside D; s = 1/2 is the pure
// interior nonlocal perimeter term. Values must lie in [0,1].
double tv_energy(const GraphField& f, const KernelSpec& spec, double s, int threads = 0);

// deterministic midpoint-grid evaluation for continuum fields; resolution is
// the number of cells per axis
double tv_energy_grid(const std::function<double(std::span<const double>)>& u,
                      const Domain& domain, const KernelSpec& spec, double s, int resolution,
                      int threads = 0);

struct TransportDistance {
  double value = 0.0;
  bool bound_only = false;               // NearestMatch gives an upper bound
  std::vector<std::uint32_t> plan;       // ExactAssignment: matched index per source point
};

enum class Tl2Mode { ExactAssignment, NearestMatch };

// d_TL2 between uniform empirical measure-function pairs with equal support
// sizes; ExactAssignment solves the n<=64 assignment problem optimally.
TransportDistance tl2_distance(std::span<const double> xa, std::span<const double> fa,
                               std::span<const double> xb, std::span<const double> fb, int dim,
                               Tl2Mode mode);

// O(n^3) optimal assignment on a square cost matrix; returns minimal total
// cost, fills col_of_row
double solve_assignment(const std::vector<double>& cost, std::size_t n,
                        std::vector<std::uint32_t>& col_of_row);

}  // namespace medflow
