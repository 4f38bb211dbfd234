#include "deconvband/band.hpp"

#include <algorithm>
#include <cmath>

#include "deconvband/errors.hpp"
#include "deconvband/parallel.hpp"
#include "deconvband/rng.hpp"

namespace deconvband {

namespace {

void validate_levels(std::span<const double> levels) {
  if (levels.empty()) throw input_error("no confidence levels given");
  for (double l : levels) {
    if (!(l >= 0.0 && l < 1.0)) throw input_error("levels must lie in [0, 1)");
  }
}

// ceil(level * reps)-th order statistic, ties toward the larger value;
// index 0 (level 0) degenerates to a zero-width band.
double empirical_quantile(const std::vector<double>& sorted_sups, double level) {
  const int reps = static_cast<int>(sorted_sups.size());
  int idx = static_cast<int>(std::ceil(level * reps - 1e-9));
  if (idx < 1) return 0.0;
  idx = std::min(idx, reps);
  return sorted_sups[idx - 1];
}

std::vector<double> quantiles_from_sups(std::vector<double> sups,
                                        std::span<const double> levels) {
  std::sort(sups.begin(), sups.end());
  std::vector<double> out(levels.size());
  for (std::size_t i = 0; i < levels.size(); ++i) {
    out[i] = empirical_quantile(sups, levels[i]);
  }
  return out;
}

}  // namespace

std::vector<double> multiplier_quantile(const Sample& s, const DeconvTable& tbl,
                                        const EstimateGrid& grid,
                                        std::span<const double> levels, int reps,
                                        std::uint64_t seed,
                                        const MultiplierOptions& opts) {
  s.validate_for_estimation();
  validate_levels(levels);
  if (reps < 100) throw input_error("need at least 100 bootstrap replications");
  if (grid.h != tbl.h) throw input_error("estimate grid and table bandwidth differ");
  if (grid.n != s.n()) throw input_error("estimate grid built from a different sample");

  const std::size_t gn = grid.x.size();
  const std::size_t n = s.n();
  std::vector<std::size_t> pts;
  pts.reserve(gn);
  for (std::size_t i = 0; i < gn; ++i) {
    if (opts.include_clamped || !grid.diag.clamped[i]) pts.push_back(i);
  }
  if (pts.empty()) throw input_error("no grid points left for the sup");

  bool any_scale = false;
  std::vector<double> scale(pts.size());  // 1 / (shat(x) sqrt(n)), 0 if degenerate
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  for (std::size_t q = 0; q < pts.size(); ++q) {
    const double sd = grid.s[pts[q]];
    scale[q] = sd > 0.0 ? 1.0 / (sd * sqrt_n) : 0.0;
    any_scale = any_scale || sd > 0.0;
  }
  if (!any_scale) {
    throw estimation_error("variance estimate is zero everywhere (constant response?)");
  }

  const KernelMatrix km = kernel_matrix(tbl, s.w, grid.x, opts.threads);
  // residuals (Y_j - g(x)) Khat((x-W_j)/h), rows restricted to included points
  std::vector<double> resid(pts.size() * n);
  for (std::size_t q = 0; q < pts.size(); ++q) {
    const double* row = km.row(pts[q]);
    const double g = grid.g[pts[q]];
    double* dst = resid.data() + q * n;
    for (std::size_t j = 0; j < n; ++j) dst[j] = (s.y[j] - g) * row[j];
  }

  std::vector<double> sups(reps);
  parallel_for(static_cast<std::size_t>(reps), opts.threads, [&](std::size_t rep) {
    Rng rng(derive_seed(seed, rep));
    std::vector<double> xi(n);
    for (std::size_t j = 0; j < n; ++j) xi[j] = rng.normal();
    double sup = 0.0;
    for (std::size_t q = 0; q < pts.size(); ++q) {
      const double* row = resid.data() + q * n;
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += xi[j] * row[j];
      sup = std::max(sup, std::fabs(acc * scale[q]));
    }
    sups[rep] = sup;
  });

  return quantiles_from_sups(std::move(sups), levels);
}

BandResult assemble_band(const EstimateGrid& grid, std::span<const double> levels,
                         std::span<const double> quantiles, int reps,
                         std::uint64_t seed) {
  validate_levels(levels);
  if (levels.size() != quantiles.size()) {
    throw input_error("levels/quantiles size mismatch");
  }
  for (double q : quantiles) {
    if (!(q >= 0.0)) throw input_error("quantiles must be non-negative");
  }

  BandResult out;
  out.x = grid.x;
  out.g = grid.g;
  out.fx = grid.fx;
  out.s = grid.s;
  out.levels.assign(levels.begin(), levels.end());
  out.quantiles.assign(quantiles.begin(), quantiles.end());
  out.h = grid.h;
  out.n = grid.n;
  out.reps = reps;
  out.seed = seed;
  out.diag.clamped = grid.diag.clamped;
  out.diag.clamped_points = grid.diag.clamped_points;
  out.diag.truncated_nodes = grid.diag.truncated_nodes;
  out.diag.points_outside_hull = grid.diag.points_outside_hull;

  const std::size_t gn = grid.x.size();
  const double sqrt_nh = std::sqrt(static_cast<double>(grid.n)) * grid.h;
  out.half_width.assign(levels.size(), std::vector<double>(gn));
  out.lower.assign(levels.size(), std::vector<double>(gn));
  out.upper.assign(levels.size(), std::vector<double>(gn));
  for (std::size_t l = 0; l < levels.size(); ++l) {
    for (std::size_t i = 0; i < gn; ++i) {
      const double hw = grid.s[i] * out.quantiles[l] / (grid.fx_clamped(i) * sqrt_nh);
      out.half_width[l][i] = hw;
      out.lower[l][i] = grid.g[i] - hw;
      out.upper[l][i] = grid.g[i] + hw;
    }
  }
  return out;
}

BandResult uniform_band(const Sample& s, const DeconvTable& tbl,
                        std::vector<double> x_grid, std::span<const double> levels,
                        int reps, std::uint64_t seed, const MultiplierOptions& opts) {
  const EstimateGrid grid = estimate_on_grid(s, tbl, std::move(x_grid));
  const auto q = multiplier_quantile(s, tbl, grid, levels, reps, seed, opts);
  BandResult band = assemble_band(grid, levels, q, reps, seed);
  for (std::size_t i = 0; i < grid.x.size(); ++i) {
    if (grid.s[i] == 0.0) ++band.diag.degenerate_variance_points;
  }
  return band;
}

SpecTestResult spec_test(const BandResult& band, std::span<const double> g_theta,
                         std::size_t level_index) {
  if (g_theta.size() != band.x.size()) {
    throw input_error("g_theta is not aligned with the band grid");
  }
  if (level_index >= band.levels.size()) throw input_error("bad level index");
  SpecTestResult out;
  for (std::size_t i = 0; i < band.x.size(); ++i) {
    if (g_theta[i] < band.lower[level_index][i] ||
        g_theta[i] > band.upper[level_index][i]) {
      out.violations.push_back(band.x[i]);
    }
  }
  out.reject = !out.violations.empty();
  return out;
}

CdfBandResult cdf_band(const Sample& s, const DeconvTable& tbl,
                       std::vector<double> x_grid, std::vector<double> y_grid,
                       std::span<const double> levels, int reps, std::uint64_t seed,
                       const MultiplierOptions& opts) {
  s.validate_for_estimation();
  validate_levels(levels);
  if (reps < 100) throw input_error("need at least 100 bootstrap replications");
  if (x_grid.empty() || y_grid.empty()) throw input_error("empty grid");
  for (double y : y_grid) {
    if (!std::isfinite(y)) throw input_error("non-finite y grid point");
  }
  if (!std::is_sorted(y_grid.begin(), y_grid.end())) {
    throw input_error("y grid must be sorted ascending");
  }

  const std::size_t nx = x_grid.size();
  const std::size_t ny = y_grid.size();
  const std::size_t n = s.n();
  const KernelMatrix km = kernel_matrix(tbl, s.w, x_grid, opts.threads);

  CdfBandResult out;
  out.x = std::move(x_grid);
  out.y = std::move(y_grid);
  out.levels.assign(levels.begin(), levels.end());
  out.h = tbl.h;
  out.n = n;
  out.reps = reps;
  out.seed = seed;
  out.diag.truncated_nodes = tbl.truncated_nodes;

  // density and clamping from the same per-observation values, so the
  // indicator-above-max reduction g == 1 is exact
  std::vector<std::size_t> ord(n);
  for (std::size_t j = 0; j < n; ++j) ord[j] = j;
  std::sort(ord.begin(), ord.end(),
            [&](std::size_t a, std::size_t b) { return s.y[a] < s.y[b]; });

  // totals in Y-sorted order so the full prefix reproduces them bitwise and
  // the indicator-above-max reduction lands exactly on g = 1
  const double inv_nh = 1.0 / (static_cast<double>(n) * tbl.h);
  out.fx.resize(nx);
  double fx_max = -1.0;
  std::vector<double> total1(nx, 0.0), total2(nx, 0.0);
  for (std::size_t i = 0; i < nx; ++i) {
    const double* row = km.row(i);
    double a1 = 0.0, a2 = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      const double k = row[ord[p]];
      a1 += k;
      a2 += k * k;
    }
    total1[i] = a1;
    total2[i] = a2;
    out.fx[i] = a1 * inv_nh;
    fx_max = std::max(fx_max, out.fx[i]);
  }
  if (!(fx_max > 0.0)) {
    throw estimation_error(
        "density estimate non-positive on the whole grid (bandwidth/data mismatch)");
  }
  const double floor = 1e-3 * fx_max;
  out.diag.clamped.assign(nx, 0);
  std::vector<double> denom(nx);
  for (std::size_t i = 0; i < nx; ++i) {
    if (out.fx[i] < floor) {
      denom[i] = floor;
      out.diag.clamped[i] = 1;
      ++out.diag.clamped_points;
    } else {
      denom[i] = out.fx[i];
    }
  }

  // g(y, x) and shat(y, x) by prefix sums over Y-sorted observations
  out.g.resize(ny * nx);
  out.s.resize(ny * nx);
  {
    std::vector<double> acc1(nx, 0.0), acc2(nx, 0.0);
    std::size_t p = 0;
    for (std::size_t yi = 0; yi < ny; ++yi) {
      while (p < n && s.y[ord[p]] <= out.y[yi]) {
        const std::size_t j = ord[p];
        for (std::size_t i = 0; i < nx; ++i) {
          const double k = km.at(i, j);
          acc1[i] += k;
          acc2[i] += k * k;
        }
        ++p;
      }
      for (std::size_t i = 0; i < nx; ++i) {
        const double mu = acc1[i] * inv_nh;
        const double g = mu / denom[i];
        out.g[out.idx(yi, i)] = g;
        const double s2 =
            ((1.0 - 2.0 * g) * acc2[i] + g * g * total2[i]) / static_cast<double>(n);
        out.s[out.idx(yi, i)] = std::sqrt(std::max(0.0, s2));
      }
    }
  }

  std::vector<std::size_t> pts;
  for (std::size_t i = 0; i < nx; ++i) {
    if (opts.include_clamped || !out.diag.clamped[i]) pts.push_back(i);
  }
  if (pts.empty()) throw input_error("no grid points left for the sup");
  bool any_scale = false;
  for (std::size_t yi = 0; yi < ny && !any_scale; ++yi) {
    for (std::size_t i : pts) {
      if (out.s[out.idx(yi, i)] > 0.0) {
        any_scale = true;
        break;
      }
    }
  }
  if (!any_scale) {
    throw estimation_error("variance estimate is zero on the whole rectangle");
  }

  const double sqrt_n = std::sqrt(static_cast<double>(n));
  std::vector<double> sups(reps);
  parallel_for(static_cast<std::size_t>(reps), opts.threads, [&](std::size_t rep) {
    Rng rng(derive_seed(seed, rep));
    std::vector<double> xi(n);
    for (std::size_t j = 0; j < n; ++j) xi[j] = rng.normal();
    std::vector<double> p_all(nx, 0.0), p_le(nx, 0.0);
    for (std::size_t i = 0; i < nx; ++i) {
      const double* row = km.row(i);
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += xi[j] * row[j];
      p_all[i] = acc;
    }
    double sup = 0.0;
    std::size_t p = 0;
    for (std::size_t yi = 0; yi < ny; ++yi) {
      while (p < n && s.y[ord[p]] <= out.y[yi]) {
        const std::size_t j = ord[p];
        const double x_j = xi[j];
        for (std::size_t i = 0; i < nx; ++i) p_le[i] += x_j * km.at(i, j);
        ++p;
      }
      for (std::size_t i : pts) {
        const double sd = out.s[out.idx(yi, i)];
        if (sd <= 0.0) continue;
        const double z = (p_le[i] - out.g[out.idx(yi, i)] * p_all[i]) / (sd * sqrt_n);
        sup = std::max(sup, std::fabs(z));
      }
    }
    sups[rep] = sup;
  });

  out.quantiles = quantiles_from_sups(std::move(sups), levels);

  const double sqrt_nh = sqrt_n * tbl.h;
  out.lower.assign(levels.size(), std::vector<double>(ny * nx));
  out.upper.assign(levels.size(), std::vector<double>(ny * nx));
  for (std::size_t l = 0; l < levels.size(); ++l) {
    for (std::size_t yi = 0; yi < ny; ++yi) {
      for (std::size_t i = 0; i < nx; ++i) {
        const std::size_t id = out.idx(yi, i);
        const double hw = out.s[id] * out.quantiles[l] / (denom[i] * sqrt_nh);
        out.lower[l][id] = out.g[id] - hw;
        out.upper[l][id] = out.g[id] + hw;
      }
    }
  }
  return out;
}

}  // namespace deconvband
