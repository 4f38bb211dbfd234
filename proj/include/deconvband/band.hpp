#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "deconvband/deconv.hpp"
#include "deconvband/estimate.hpp"
#include "deconvband/sample.hpp"

namespace deconvband {

struct MultiplierOptions {
  int threads = 1;
  // Clamped-density points stay in the sup by default; they are flagged in
  // the diagnostics either way.
  bool include_clamped = true;
};

// Conditional (1-level)-quantiles of sup_x |Z^xi| over the grid, one per
// confidence level. Per-rep multipliers come from the (seed, rep) counter
// stream, so results are independent of scheduling order and thread count.
std::vector<double> multiplier_quantile(const Sample& s, const DeconvTable& tbl,
                                        const EstimateGrid& grid,
                                        std::span<const double> levels, int reps,
                                        std::uint64_t seed,
                                        const MultiplierOptions& opts = {});

struct BandDiagnostics {
  std::vector<std::uint8_t> clamped;
  int clamped_points = 0;
  int truncated_nodes = 0;
  int degenerate_variance_points = 0;
  int points_outside_hull = 0;
};

// Uniform confidence band: g(x) +- s(x) * quantile / (fx(x) sqrt(n) h) per
// level, with the clamped density in the denominator where flagged.
struct BandResult {
  std::vector<double> x;
  std::vector<double> g;
  std::vector<double> fx;  // raw density values
  std::vector<double> s;
  std::vector<double> levels;     // confidence levels 1 - tau
  std::vector<double> quantiles;  // per level
  std::vector<std::vector<double>> half_width;  // per level
  std::vector<std::vector<double>> lower;
  std::vector<std::vector<double>> upper;
  double h = 0.0;
  std::size_t n = 0;
  int reps = 0;
  std::uint64_t seed = 0;
  BandDiagnostics diag;
};

BandResult assemble_band(const EstimateGrid& grid, std::span<const double> levels,
                         std::span<const double> quantiles, int reps,
                         std::uint64_t seed);

// estimate_on_grid + multiplier_quantile + assemble_band in one call.
BandResult uniform_band(const Sample& s, const DeconvTable& tbl,
                        std::vector<double> x_grid, std::span<const double> levels,
                        int reps, std::uint64_t seed,
                        const MultiplierOptions& opts = {});

struct SpecTestResult {
  bool reject = false;
  std::vector<double> violations;  // grid points where g_theta leaves the band
};

// Rejects the parametric null when the fitted g_theta exits the band
// anywhere on the grid. Assumes g_theta was estimated at a rate fast enough
// for the band's level to carry over (not checkable from data).
SpecTestResult spec_test(const BandResult& band, std::span<const double> g_theta,
                         std::size_t level_index);

// Band for the conditional distribution function on the y_grid x x_grid
// rectangle, built from indicator responses 1(Y_j <= y) with the sup taken
// jointly over both grids.
struct CdfBandResult {
  std::vector<double> y;
  std::vector<double> x;
  std::vector<double> g;  // row-major: g[yi * x.size() + xi]
  std::vector<double> s;  // same layout
  std::vector<double> fx;
  std::vector<double> levels;
  std::vector<double> quantiles;
  std::vector<std::vector<double>> lower;  // per level, row-major
  std::vector<std::vector<double>> upper;
  double h = 0.0;
  std::size_t n = 0;
  int reps = 0;
  std::uint64_t seed = 0;
  BandDiagnostics diag;

  std::size_t idx(std::size_t yi, std::size_t xi) const { return yi * x.size() + xi; }
};

CdfBandResult cdf_band(const Sample& s, const DeconvTable& tbl,
                       std::vector<double> x_grid, std::vector<double> y_grid,
                       std::span<const double> levels, int reps, std::uint64_t seed,
                       const MultiplierOptions& opts = {});

}  // namespace deconvband
