#include <doctest.h>

#include <cmath>

#include "deconvband/errors.hpp"
#include "deconvband/estimate.hpp"
#include "deconvband/rng.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace deconvband;

namespace {
const KernelSpec kSpec;

DeconvTable empirical_table(const Sample& s, double h, int nodes = 1025) {
  return build_table(empirical_cf(s.eta, FrequencyGrid::symmetric_half(1.0, 129)),
                     kSpec, h, nodes);
}
}  // namespace

TEST_CASE("constant response gives a flat regression estimate") {
  Sample s = testutil::laplace_error_sample(60, 2.0, 17);
  for (auto& y : s.y) y = 3.25;
  const DeconvTable tbl = empirical_table(s, 0.8);
  const EstimateGrid grid = estimate_on_grid(s, tbl, linspace(-2.0, 2.0, 41));
  for (std::size_t i = 0; i < grid.x.size(); ++i) {
    if (grid.diag.clamped[i]) continue;
    CHECK(grid.g[i] == doctest::Approx(3.25).epsilon(1e-12));
    CHECK(grid.s[i] <= 1e-7);  // shat^2 = 0 up to round-off
  }
}

TEST_CASE("error-free reduction: KDE and Nadaraya-Watson from scratch") {
  const Sample s = testutil::laplace_error_sample(200, 2.0, 31415);
  const double h = 0.5;
  const DeconvTable tbl = build_table(constant_one_cf(), kSpec, h, 2049);
  const EstimateGrid grid = estimate_on_grid(s, tbl, linspace(-2.0, 2.0, 21));
  for (std::size_t i = 0; i < grid.x.size(); ++i) {
    const double fx_ref = oracle::kde_ref(kSpec, s.w, h, grid.x[i]);
    const double g_ref = oracle::nw_ref(kSpec, s.y, s.w, h, grid.x[i]);
    CHECK(testutil::rel_close(grid.fx[i], fx_ref, 1e-8));
    REQUIRE(!grid.diag.clamped[i]);
    CHECK(testutil::rel_close(grid.g[i], g_ref, 1e-8));
  }
}

TEST_CASE("hand sample matches the direct-space brute force") {
  const Sample s = testutil::laplace_error_sample(10, 2.0, 99);
  const DeconvTable tbl = build_table(laplace_cf(std::sqrt(0.5)), kSpec, 0.8, 1025);
  const EstimateGrid grid = estimate_on_grid(s, tbl, linspace(-1.5, 1.5, 7));
  for (std::size_t i = 0; i < grid.x.size(); ++i) {
    const oracle::DirectSums d = oracle::direct_sums(s, tbl, grid.x[i]);
    CHECK(testutil::rel_close(grid.fx[i], d.s0 / tbl.h, 1e-10));
    CHECK(testutil::rel_close(grid.mu[i], d.s1 / tbl.h, 1e-10));
    if (!grid.diag.clamped[i]) {
      const double g_ref = (d.s1 / tbl.h) / (d.s0 / tbl.h);
      CHECK(testutil::rel_close(grid.g[i], g_ref, 1e-10));
      const double s2_ref =
          d.s2_yy - 2.0 * g_ref * d.s2_y + g_ref * g_ref * d.s2_one;
      CHECK(testutil::rel_close(grid.s[i] * grid.s[i], std::max(0.0, s2_ref), 1e-8));
    }
  }
}

TEST_CASE("zero-sum identity") {
  SUBCASE("generic sample stays within the contract") {
    const Sample s = testutil::laplace_error_sample(80, 2.0, 5150);
    const DeconvTable tbl = empirical_table(s, 0.7);
    const EstimateGrid grid = estimate_on_grid(s, tbl, linspace(-2.0, 2.0, 31));
    double y_max = 0.0;
    for (double y : s.y) y_max = std::max(y_max, std::fabs(y));
    const double bound = 1e-8 * (1.0 + y_max) * static_cast<double>(s.n());
    CHECK(zero_sum_check(s, grid, tbl) < bound);
  }
  SUBCASE("zero responses give an exactly zero residual") {
    Sample s = testutil::laplace_error_sample(40, 2.0, 5151);
    for (auto& y : s.y) y = 0.0;
    const DeconvTable tbl = empirical_table(s, 0.7);
    const EstimateGrid grid = estimate_on_grid(s, tbl, linspace(-2.0, 2.0, 11));
    CHECK(zero_sum_check(s, grid, tbl) == 0.0);
  }
}

TEST_CASE("affine response transform maps the estimate exactly") {
  const Sample s = testutil::laplace_error_sample(70, 2.0, 2718);
  Sample t = s;
  const double a = -1.7, b = 4.0;
  for (auto& y : t.y) y = a * y + b;
  const DeconvTable tbl = empirical_table(s, 0.65);
  const auto x_grid = linspace(-2.0, 2.0, 21);
  const EstimateGrid g0 = estimate_on_grid(s, tbl, x_grid);
  const EstimateGrid g1 = estimate_on_grid(t, tbl, x_grid);
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    if (g0.diag.clamped[i]) continue;
    CHECK(testutil::rel_close(g1.g[i], a * g0.g[i] + b, 1e-10));
    CHECK(testutil::rel_close(g1.s[i], std::fabs(a) * g0.s[i], 1e-8));
  }
}

TEST_CASE("translation equivariance") {
  const Sample s = testutil::laplace_error_sample(50, 2.0, 161);
  const double shift = 13.5;
  Sample t = s;
  for (auto& w : t.w) w += shift;
  const DeconvTable tbl = empirical_table(s, 0.7);
  auto x0 = linspace(-1.5, 1.5, 11);
  auto x1 = x0;
  for (auto& x : x1) x += shift;
  const EstimateGrid g0 = estimate_on_grid(s, tbl, x0);
  const EstimateGrid g1 = estimate_on_grid(t, tbl, x1);
  for (std::size_t i = 0; i < x0.size(); ++i) {
    if (g0.diag.clamped[i] || g1.diag.clamped[i]) continue;
    CHECK(testutil::rel_close(g1.g[i], g0.g[i], 1e-8));
    CHECK(testutil::rel_close(g1.fx[i], g0.fx[i], 1e-8));
  }
}

TEST_CASE("density clamping is flagged, far-out grids fail loudly") {
  const Sample s = testutil::laplace_error_sample(60, 1.0, 404);
  const DeconvTable tbl = empirical_table(s, 0.5);
  SUBCASE("grid reaching past the data flags low-density points") {
    const EstimateGrid grid = estimate_on_grid(s, tbl, linspace(-9.0, 9.0, 61));
    CHECK(grid.diag.clamped_points > 0);
    CHECK(grid.diag.points_outside_hull > 0);
    for (std::size_t i = 0; i < grid.x.size(); ++i) {
      CHECK(std::isfinite(grid.g[i]));
      CHECK(grid.s[i] >= 0.0);
    }
  }
  SUBCASE("grid where the density estimate is negative everywhere fails") {
    // point mass at zero with the error-free CF: fx(x) = K(x/h)/h, and the
    // flat-top kernel is negative on its first side lobe u in [5, 9]
    Sample pm;
    pm.y.assign(10, 1.0);
    pm.w.assign(10, 0.0);
    pm.eta = {0.0, 0.0};
    const DeconvTable one = build_table(constant_one_cf(), kSpec, 1.0, 1025);
    CHECK_THROWS_AS(estimate_on_grid(pm, one, linspace(5.5, 8.5, 5)),
                    estimation_error);
  }
}

TEST_CASE("estimator outputs are stable under quadrature refinement") {
  const Sample s = testutil::laplace_error_sample(60, 2.0, 10101);
  const auto x_grid = linspace(-2.0, 2.0, 15);
  const EstimateGrid coarse = estimate_on_grid(s, empirical_table(s, 0.7, 2049), x_grid);
  const EstimateGrid fine = estimate_on_grid(s, empirical_table(s, 0.7, 4097), x_grid);
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    CHECK(testutil::rel_close(coarse.fx[i], fine.fx[i], 1e-8));
    CHECK(testutil::rel_close(coarse.g[i], fine.g[i], 1e-8));
    CHECK(testutil::rel_close(coarse.s[i], fine.s[i], 1e-8));
  }
}
