#pragma once

// Plain `key = value` run configuration, sectioned by module name. Unknown
// keys are hard errors; cross-field invariants are enforced at parse time.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "medflow/errors.hpp"

namespace medflow {

struct RunConfig {
  // [domain]
  std::string domain_kind = "torus";  // torus | box
  int dim = 2;
  std::vector<double> box_lo{0.0, 0.0};
  std::vector<double> box_hi{1.0, 1.0};
  std::string boundary = "box";  // box | disk-complement:cx,cy,R

  // [sampler]
  std::string process = "iid";  // iid | poisson
  double n = 100000;            // count (iid) or intensity (poisson)
  std::uint64_t seed = 0;

  // [kernel]
  std::string kernel = "annulus:0.9";  // ball | annulus:<k> | shrinking | radial:<file>
  double r = 0.02;
  std::optional<double> h;  // must equal r^2 when given

  // [evolution]
  std::string mode = "levelset";  // levelset | mbo | youngangle | ssl
  double T = 0.01;
  double alpha_deg = 90.0;
  double threshold = 0.5;
  std::string initial = "disk:0.5,0.5,0.3";
  std::vector<double> snapshots;
  double ssl_zeta = 16.0, ssl_r0 = 0.05, ssl_R = 0.2, ssl_exponent = 1.0;

  // [heatflow]
  bool heatflow_enabled = false;
  double heat_tau = 1e-4;
  double heat_T = 0.0;

  // [output]
  std::string out_dir = "out";
  int raster = 256;
  bool energy_csv = true;
  int verbosity = 1;

  // [run]
  int threads = 0;
  std::string verify;  // suite name, "all", or empty
  int sweep_seeds = 1;
  int probe_grid = 256;
};

RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& origin = "<string>");

// canonical serialization; parse(serialize(cfg)) == cfg
std::string serialize_config(const RunConfig& cfg);

// FNV-1a over the canonical serialization; stamped into output headers
std::uint64_t config_hash(const RunConfig& cfg);

void validate_config(const RunConfig& cfg);

}  // namespace medflow
