#pragma once

// The time-stepping engine: simultaneous (Jacobi) median-filter updates on a
// point cloud, with MBO thresholding, Young-angle boundary, and SSL-weighted
// variants. One step of size h = r^2 advances physical MCF time by c_A * h.

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "medflow/domain.hpp"
#include "medflow/kernels.hpp"

namespace medflow {

enum class EvolutionMode { LevelSet, MBO, YoungAngle, SSL };

const char* to_string(EvolutionMode m);

struct SSLWeightConfig {
  std::vector<std::pair<std::uint32_t, double>> labels;  // (point index, label value)
  double zeta = 16.0;      // singularity cutoff, > 1
  double r0 = 0.05;        // weight length scale
  double R = 0.2;          // influence radius; gamma == 1 beyond
  double exponent = 1.0;   // must exceed d - 2
  bool hard_labels = true; // reset labeled points after every step
};

struct EvolutionConfig {
  KernelSpec kernel;
  double h = 0.0;  // time step, must equal kernel.r^2 exactly
  EvolutionMode mode = EvolutionMode::LevelSet;
  double mbo_threshold = 0.5;
  double young_angle = 0.5 * M_PI;  // radians, in (0, pi)
  SSLWeightConfig ssl;
  double T = 0.0;  // final physical time
  int threads = 0; // 0 = hardware concurrency

  static EvolutionConfig make(KernelSpec kernel, EvolutionMode mode, double T);
  void validate(const Domain& domain) const;
};

struct LevelSetField {
  std::shared_ptr<const PointCloud> cloud;
  std::vector<double> values;
  std::int64_t step_count = 0;
  double physical_time = 0.0;
};

LevelSetField make_field(std::shared_ptr<const PointCloud> cloud,
                         const std::function<double(std::span<const double>)>& f);

struct StepStats {
  std::size_t empty_neighborhoods = 0;
  std::size_t steps = 0;
};

struct Trajectory {
  std::vector<LevelSetField> snapshots;  // one per requested time, rounded down
  std::vector<double> requested_times;
  LevelSetField final_field;
  StepStats stats;
};

// Holds the per-cloud caches (Young-angle p values, SSL gamma weights, the
// narrow-band change tracking used inside run()). step() is a pure
// field -> field map; identical inputs give identical outputs for any thread
// count.
class Evolver {
public:
  Evolver(std::shared_ptr<const PointCloud> cloud, EvolutionConfig cfg);

  LevelSetField step(const LevelSetField& field);
  Trajectory run(const LevelSetField& g, std::span<const double> snapshot_times);

  double c_A() const { return c_A_; }
  double step_time() const { return c_A_ * cfg_.h; }
  const StepStats& stats() const { return stats_; }
  const EvolutionConfig& config() const { return cfg_; }

private:
  void step_into(const LevelSetField& in, std::span<const std::uint32_t> active,
                 LevelSetField& out, std::vector<std::uint8_t>& changed);
  void build_young_angle_cache();
  void build_ssl_cache();

  std::shared_ptr<const PointCloud> cloud_;
  EvolutionConfig cfg_;
  double c_A_;
  double r_outer_, r_inner_;
  bool binary_values_ = false;
  std::vector<double> p_cache_;      // YoungAngle: per-point p
  std::vector<double> gamma_cache_;  // SSL: per-point gamma_zeta
  std::vector<double> label_value_;  // SSL: NaN where unlabeled
  StepStats stats_;
};

// single step with a fresh Evolver (cache-building cost included)
LevelSetField step(const LevelSetField& field, const EvolutionConfig& cfg);
Trajectory run(const LevelSetField& g, const EvolutionConfig& cfg,
               std::span<const double> snapshot_times);

// indicator of {u >= q}
LevelSetField threshold(const LevelSetField& field, double q);

// Measured contact angle (radians) between the q-level curve and the domain
// boundary, from a least-squares fit of the level curve over a window of
// width 4r around the contact point. d = 2 Box domains. nullopt when the
// level set does not reach the boundary; a fully wetted boundary reads pi.
std::optional<double> contact_angle(const LevelSetField& field, double q, double r);

// cloud format plus a u column; step metadata on a second header line
void save_snapshot(const std::string& path, const LevelSetField& field, EvolutionMode mode);

}  // namespace medflow
