#pragma once

// Selection primitives: discrete median, p-median, kernel-weighted median,
// worst-case O(n) k-select, and a Monte Carlo oracle for the continuous
// median over a stencil.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "medflow/errors.hpp"
#include "medflow/kernels.hpp"

namespace medflow {

struct MedianQuery {
  std::span<const double> values;
  std::span<const double> weights;  // empty -> uniform
  double p = 0.0;                   // in [-1,1]; clamped upstream
};

// k-th smallest (1-based) of the scratch buffer; destructive. Random pivots
// with a deterministic stream, median-of-medians fallback after 2*log2(n)
// rounds, so the worst case stays O(n).
double kth_smallest(std::span<double> scratch, std::size_t k);

// inf{m : p <= (1/n) sum sign(m - v_i)} == the ceil(n(1+p)/2)-th order
// statistic, clamped to [1,n]; p = +-1 gives max/min (the min-max cutoff
// semantics). Empty input -> nullopt (empty-neighborhood signal).
std::optional<double> p_median(std::span<const double> values, double p,
                               std::vector<double>& scratch);

// the 1-based order statistic p_median selects for a given sample size
std::size_t p_median_rank(std::size_t n, double p);

// lower median, i.e. p_median with p = 0
std::optional<double> discrete_median(std::span<const double> values,
                                      std::vector<double>& scratch);

// infimum m with sum_{v_i <= m} w_i >= (1+p)/2 * sum w_i; zero-weight entries
// carry no mass. All-zero weights -> DegenerateWeightsError.
std::optional<double> weighted_median(std::span<const double> values,
                                      std::span<const double> weights, double p);

std::optional<double> median_of(const MedianQuery& q, std::vector<double>& scratch);

struct McMedian {
  double value = 0.0;
  double envelope = 0.0;  // DKW half-width at the given level
  double level = 0.05;
  std::size_t nodes = 0;
};

using ScalarField = std::function<double(std::span<const double>)>;

// Empirical lower median of phi over mc_nodes i.i.d. uniform samples of the
// stencil A_r(center); the uncertainty estimate converts the DKW CDF envelope
// at level 0.05 into value units.
McMedian continuous_median_mc(const ScalarField& phi, std::span<const double> center,
                              const KernelSpec& spec, int d, std::size_t mc_nodes,
                              std::uint64_t seed);

}  // namespace medflow
