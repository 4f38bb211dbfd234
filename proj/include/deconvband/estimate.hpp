#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "deconvband/deconv.hpp"
#include "deconvband/sample.hpp"

namespace deconvband {

struct EstimateDiagnostics {
  std::vector<std::uint8_t> clamped;  // per grid point
  int clamped_points = 0;
  double density_floor = 0.0;  // 1e-3 * max_x fx
  int truncated_nodes = 0;     // copied from the table
  int points_outside_hull = 0;
};

// Point estimates on the evaluation grid. fx stores the raw density values;
// wherever fx < density_floor, g is computed with the floor instead and the
// point is flagged. s is the band variance sqrt (no A_n^2 subtraction).
struct EstimateGrid {
  std::vector<double> x;
  std::vector<double> fx;
  std::vector<double> mu;
  std::vector<double> g;
  std::vector<double> s;
  double h = 0.0;
  std::size_t n = 0;
  EstimateDiagnostics diag;

  // Denominator actually used for g and the band half-width at point i.
  double fx_clamped(std::size_t i) const {
    return fx[i] < diag.density_floor ? diag.density_floor : fx[i];
  }
};

EstimateGrid estimate_on_grid(const Sample& s, const DeconvTable& tbl,
                              std::vector<double> x_grid);

// Max over unclamped grid points of |sum_j (Y_j - g(x)) Khat((x-W_j)/h)|,
// evaluated from per-observation kernel values. Checks the normal-equation
// identity of the estimator against the frequency-domain aggregates.
double zero_sum_check(const Sample& s, const EstimateGrid& grid,
                      const DeconvTable& tbl);

std::vector<double> linspace(double lo, double hi, int count);

}  // namespace deconvband
