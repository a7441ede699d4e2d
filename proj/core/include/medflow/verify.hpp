#pragma once

// Oracles and statistical checks: the level-set operator F, consistency
// measurement against closed-form constants, a front-tracking curve-shortening
// oracle, DKW envelope tests, and error metrics.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "medflow/kernels.hpp"
#include "medflow/medians.hpp"
#include "medflow/rng.hpp"

namespace medflow {

// F(grad, hess): scalar for nonzero gradient, otherwise the eigenvalue
// interval [tr H - lambda_max, tr H - lambda_min]
struct FValue {
  double lo = 0.0;
  double hi = 0.0;
  bool is_interval() const { return lo != hi; }
};

FValue levelset_F(std::span<const double> grad, std::span<const double> hess, int d);

// ascending eigenvalues of a symmetric d x d matrix (cyclic Jacobi)
std::vector<double> symmetric_eigenvalues(std::span<const double> m, int d);

// Taylor normal form a_ij x_i x_j + x_d + b_i x_i x_d + b_d x_d^2 with
// exact F value 2 tr(a)
struct QuadraticTestField {
  int d = 2;
  std::vector<double> a;  // (d-1) x (d-1), symmetric
  std::vector<double> b;  // d-1 entries
  double b_d = 0.0;

  double operator()(std::span<const double> x) const;
  double exact_F() const;
};

struct ConsistencyRow {
  double r = 0.0;
  double measured = 0.0;   // normalized median (median - phi(0)) / r^2
  double predicted = 0.0;  // c_A * F
  double envelope = 0.0;   // MC envelope on the normalized median
};

// measured vs predicted c_A F over an r-sequence; the error trend should
// shrink linearly in r modulo the MC envelope
std::vector<ConsistencyRow> measure_consistency(const QuadraticTestField& field,
                                                const KernelSpec& shape,
                                                std::span<const double> radii,
                                                std::size_t mc_nodes, std::uint64_t seed);

// ---------------------------------------------------------------------------
// front tracking

// closed, simple, counterclockwise polygon with roughly uniform spacing
struct CurveFront {
  std::vector<double> xy;  // 2n, closed implicitly
  double spacing = 0.0;

  std::size_t size() const { return xy.size() / 2; }
  static CurveFront circle(double cx, double cy, double radius, std::size_t n);
  static CurveFront ellipse(double cx, double cy, double a, double b, std::size_t n);

  double area() const;       // signed (positive when counterclockwise)
  double perimeter() const;
  bool is_simple() const;    // segment-pair scan, O(n^2)
};

// one explicit Euler step of curve shortening: each vertex moves by
// -kappa * dt along the outward normal, with kappa from the circumscribed
// circle of its neighbor triple; the front is resampled to uniform spacing.
// Requires dt <= 0.1 * (min edge length)^2; throws TopologyChangeError on
// self-intersection.
CurveFront front_tracking_step(const CurveFront& front, double dt);

// signed circumcircle curvatures at every vertex (counterclockwise positive)
std::vector<double> front_curvatures(const CurveFront& front);

// ---------------------------------------------------------------------------
// statistics

struct DkwResult {
  double violation_rate = 0.0;
  double bound = 0.0;    // 2 exp(-2 N eps^2)
  double sigma = 0.0;    // binomial sd of the rate estimate
  bool vacuous = false;  // bound >= 1; the test auto-skips
  bool pass = false;     // rate <= bound + 3 sigma (or vacuous)
};

// empirical violation rate of sup_x |F_N - F| > eps for i.i.d. draws from
// `sampler` (values must have continuous CDF `cdf`)
DkwResult dkw_envelope_test(const std::function<double(Rng&)>& sampler,
                            const std::function<double(double)>& cdf, std::size_t n, double eps,
                            std::size_t trials, std::uint64_t seed);

// ---------------------------------------------------------------------------
// error metrics

struct ErrorMetrics {
  double sup = 0.0;
  double l2 = 0.0;
};

ErrorMetrics error_metrics(std::span<const double> a, std::span<const double> b);

// bidirectional nearest-point Hausdorff distance between two polylines given
// as segment soups (4 doubles per segment), sampled at `densify` spacing
std::optional<double> hausdorff_distance(std::span<const double> segs_a,
                                         std::span<const double> segs_b, double densify);

// marching-squares extraction of the q-level of a (res+1)^2 node grid over
// [lo,hi]^2; returns a segment soup
std::vector<double> extract_level_segments(std::span<const double> nodes, int res, double lo,
                                           double hi, double q);

// ---------------------------------------------------------------------------
// report rows

struct VerifyRow {
  std::string test;
  std::string parameter;
  double measured = 0.0;
  double predicted = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

void write_verify_csv(const std::string& path, std::span<const VerifyRow> rows,
                      const std::string& header_comment = "");

}  // namespace medflow
