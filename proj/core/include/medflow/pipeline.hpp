#pragma once

// Batch orchestration: build the domain/cloud from a RunConfig, run the
// requested evolution and heat-flow stages, emit CSV tables and PGM rasters,
// and run named verification suites. Exit codes follow the errc contract.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "medflow/config.hpp"
#include "medflow/evolution.hpp"
#include "medflow/heatflow.hpp"
#include "medflow/verify.hpp"

namespace medflow {

Domain domain_from_config(const RunConfig& cfg);
KernelSpec kernel_from_config(const RunConfig& cfg);
ScalarField initial_field_from_config(const RunConfig& cfg);

// nearest-cloud-point value per pixel, linearly mapped to [0,255]
std::vector<std::uint8_t> rasterize(const LevelSetField& field, int resolution);
// base raster with the q-level set marked at 255 (thresholded neighbor
// difference)
std::vector<std::uint8_t> rasterize_overlay(const LevelSetField& field, int resolution, double q);

void write_pgm(const std::string& path, const std::vector<std::uint8_t>& pixels, int w, int h,
               const std::string& comment = "");

// node grid of nearest-point values over the cloud's bounding box
std::vector<double> probe_grid_values(const LevelSetField& field, int res);

struct SuiteResult {
  std::string name;
  std::vector<VerifyRow> rows;
  bool pass = true;
  double seconds = 0.0;
};

// Named verification suites; these implement the acceptance criteria and are
// the CLI's CI gate. "all" runs every suite.
std::vector<std::string> verify_suite_names();
SuiteResult run_verify_suite(const std::string& name, int threads);

int run_pipeline(const RunConfig& cfg);

}  // namespace medflow
