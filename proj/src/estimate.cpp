#include "deconvband/estimate.hpp"

#include <algorithm>
#include <cmath>

#include "deconvband/errors.hpp"

namespace deconvband {

std::vector<double> linspace(double lo, double hi, int count) {
  if (count < 1 || !(lo <= hi)) throw input_error("bad grid bounds");
  if (count == 1) return {(lo + hi) / 2.0};
  std::vector<double> out(count);
  const double step = (hi - lo) / static_cast<double>(count - 1);
  for (int i = 0; i < count; ++i) out[i] = lo + step * i;
  out.back() = hi;
  return out;
}

EstimateGrid estimate_on_grid(const Sample& s, const DeconvTable& tbl,
                              std::vector<double> x_grid) {
  s.validate_for_estimation();
  if (x_grid.empty()) throw input_error("empty evaluation grid");
  for (double x : x_grid) {
    if (!std::isfinite(x)) throw input_error("non-finite grid point");
  }

  EstimateGrid out;
  out.x = std::move(x_grid);
  out.h = tbl.h;
  out.n = s.n();
  out.diag.truncated_nodes = tbl.truncated_nodes;

  const auto [w_min, w_max] = std::minmax_element(s.w.begin(), s.w.end());
  for (double x : out.x) {
    if (x < *w_min || x > *w_max) ++out.diag.points_outside_hull;
  }

  const auto sums = all_kernel_sums(s, tbl, out.x);
  const std::size_t g_count = out.x.size();
  out.fx.resize(g_count);
  out.mu.resize(g_count);
  out.g.resize(g_count);
  out.s.resize(g_count);
  out.diag.clamped.assign(g_count, 0);

  double fx_max = -1.0;
  for (std::size_t i = 0; i < g_count; ++i) {
    out.fx[i] = sums.lin.s0[i] / tbl.h;
    out.mu[i] = sums.lin.s1[i] / tbl.h;
    fx_max = std::max(fx_max, out.fx[i]);
  }
  if (!(fx_max > 0.0)) {
    throw estimation_error(
        "density estimate non-positive on the whole grid (bandwidth/data mismatch)");
  }
  out.diag.density_floor = 1e-3 * fx_max;

  for (std::size_t i = 0; i < g_count; ++i) {
    double denom = out.fx[i];
    if (denom < out.diag.density_floor) {
      denom = out.diag.density_floor;
      out.diag.clamped[i] = 1;
      ++out.diag.clamped_points;
    }
    out.g[i] = out.mu[i] / denom;
    // shat^2(x) = (1/n) sum (Y_j - g(x))^2 Khat^2, expanded in (1, Y, Y^2)
    const double g = out.g[i];
    const double s2 = sums.sq.yy[i] - 2.0 * g * sums.sq.y[i] + g * g * sums.sq.one[i];
    out.s[i] = std::sqrt(std::max(0.0, s2));
  }
  return out;
}

double zero_sum_check(const Sample& s, const EstimateGrid& grid,
                      const DeconvTable& tbl) {
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.x.size(); ++i) {
    if (grid.diag.clamped[i]) continue;
    const auto row = kernel_row(tbl, s.w, grid.x[i]);
    double acc = 0.0;
    for (std::size_t j = 0; j < s.n(); ++j) {
      acc += (s.y[j] - grid.g[i]) * row[j];
    }
    worst = std::max(worst, std::fabs(acc));
  }
  return worst;
}

}  // namespace deconvband
