#include "deconvband/simulate.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "deconvband/bandwidth.hpp"
#include "deconvband/errors.hpp"
#include "deconvband/estimate.hpp"
#include "deconvband/parallel.hpp"
#include "deconvband/rng.hpp"

namespace deconvband {

namespace {
constexpr double kModel1LaplaceScale = 0.7071067811865476;  // 2^{-1/2}, Var = 1
constexpr double kModel2ComponentScale = 0.5;               // per-component, Var(eps) = 1/4
}  // namespace

void DgpSpec::validate() const {
  if (n < 10) throw input_error("DGP needs n >= 10");
  if (!(sigma_x > 0.0)) throw input_error("sigma_x must be positive");
  if (shape == RegressionShape::custom && !custom_g) {
    throw input_error("custom regression shape needs a function");
  }
}

double DgpSpec::g(double x) const {
  switch (shape) {
    case RegressionShape::linear: return x;
    case RegressionShape::quadratic: return x * x;
    case RegressionShape::cubic: return x * x * x;
    case RegressionShape::sine: return std::sin(x);
    case RegressionShape::cosine: return std::cos(x);
    case RegressionShape::custom: return custom_g(x);
  }
  return x;
}

Sample gen_model1(const DgpSpec& spec, LatentDraws* latent) {
  spec.validate();
  Rng rng(spec.seed);
  const std::size_t n = static_cast<std::size_t>(spec.n);
  std::vector<double> x(n), u(n), eps(n), eta(n);
  for (auto& v : x) v = rng.normal(0.0, spec.sigma_x);
  for (auto& v : u) v = rng.normal();
  for (auto& v : eps) v = rng.laplace(kModel1LaplaceScale);
  for (auto& v : eta) v = rng.laplace(kModel1LaplaceScale);
  Sample s;
  s.y.resize(n);
  s.w.resize(n);
  s.eta = std::move(eta);
  for (std::size_t j = 0; j < n; ++j) {
    s.y[j] = spec.g(x[j]) + u[j];
    s.w[j] = x[j] + eps[j];
  }
  if (latent) {
    latent->x = std::move(x);
    latent->u = std::move(u);
  }
  return s;
}

Sample gen_model2(const DgpSpec& spec, LatentDraws* latent) {
  spec.validate();
  Rng rng(spec.seed);
  const std::size_t n = static_cast<std::size_t>(spec.n);
  std::vector<double> x(n), u(n), eps1(n), eps2(n);
  for (auto& v : x) v = rng.normal(0.0, spec.sigma_x);
  for (auto& v : u) v = rng.normal();
  for (auto& v : eps1) v = rng.laplace(kModel2ComponentScale);
  for (auto& v : eps2) v = rng.laplace(kModel2ComponentScale);
  RepeatedMeasurements rm;
  rm.y.resize(n);
  rm.w1.resize(n);
  rm.w2.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    rm.y[j] = spec.g(x[j]) + u[j];
    rm.w1[j] = x[j] + eps1[j];
    rm.w2[j] = x[j] + eps2[j];
  }
  if (latent) {
    latent->x = std::move(x);
    latent->u = std::move(u);
  }
  return from_repeated(rm);
}

Sample generate(const DgpSpec& spec, LatentDraws* latent) {
  return spec.model == ModelKind::model1 ? gen_model1(spec, latent)
                                         : gen_model2(spec, latent);
}

CoverageReport coverage_experiment(const DgpSpec& dgp, const CoverageConfig& cfg,
                                   int mc_reps, std::uint64_t master_seed) {
  dgp.validate();
  if (mc_reps < 50) throw input_error("coverage experiment needs mc_reps >= 50");
  if (cfg.levels.empty()) throw input_error("no confidence levels given");

  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n_levels = cfg.levels.size();
  const std::vector<double> x_grid =
      linspace(-dgp.sigma_x, dgp.sigma_x, cfg.grid_points);

  CoverageReport report;
  report.levels = cfg.levels;
  report.requested_reps = mc_reps;
  report.covered.assign(static_cast<std::size_t>(mc_reps) * n_levels, 0);
  report.failed.assign(mc_reps, 0);
  std::vector<double> h_used(mc_reps, 0.0);

  parallel_for(static_cast<std::size_t>(mc_reps), cfg.threads, [&](std::size_t rep) {
    DgpSpec rep_dgp = dgp;
    rep_dgp.seed = derive_seed(master_seed, 2 * rep);
    const std::uint64_t boot_seed = derive_seed(master_seed, 2 * rep + 1);
    try {
      const Sample sample = generate(rep_dgp);
      double h = cfg.fixed_h;
      if (!(h > 0.0)) {
        BandwidthConfig bw;
        bw.cn_exponent = cfg.cn_exponent;
        bw.pilot_degree = cfg.pilot_degree;
        bw.x_grid = x_grid;
        bw.kernel = cfg.kernel;
        bw.n_nodes = cfg.n_nodes;
        bw.trunc_floor = cfg.trunc_floor;
        bw.default_grid_size = cfg.bw_grid_size;
        h = select_bandwidth(sample, bw).h;
      }
      const CharFnTable cf =
          empirical_cf(sample.eta, FrequencyGrid::symmetric_half(1.0, 129));
      const DeconvTable tbl =
          build_table(cf, cfg.kernel, h, cfg.n_nodes, cfg.trunc_floor);
      const BandResult band =
          uniform_band(sample, tbl, x_grid, cfg.levels, cfg.boot_reps, boot_seed);
      h_used[rep] = h;
      for (std::size_t l = 0; l < n_levels; ++l) {
        bool ok = true;
        for (std::size_t i = 0; i < x_grid.size() && ok; ++i) {
          const double truth = dgp.g(x_grid[i]);
          ok = band.lower[l][i] <= truth && truth <= band.upper[l][i];
        }
        report.covered[rep * n_levels + l] = ok ? 1 : 0;
      }
    } catch (const numeric_error&) {
      report.failed[rep] = 1;
    }
  });

  int failed = 0;
  double h_sum = 0.0;
  std::vector<int> hits(n_levels, 0);
  for (int rep = 0; rep < mc_reps; ++rep) {
    if (report.failed[rep]) {
      ++failed;
      continue;
    }
    h_sum += h_used[rep];
    for (std::size_t l = 0; l < n_levels; ++l) {
      hits[l] += report.covered[rep * n_levels + l];
    }
  }
  report.failed_reps = failed;
  report.completed_reps = mc_reps - failed;
  if (failed > 0.02 * mc_reps || report.completed_reps == 0) {
    throw estimation_error("coverage experiment: " + std::to_string(failed) +
                           " of " + std::to_string(mc_reps) + " reps failed");
  }
  report.coverage.resize(n_levels);
  for (std::size_t l = 0; l < n_levels; ++l) {
    report.coverage[l] =
        static_cast<double>(hits[l]) / static_cast<double>(report.completed_reps);
  }
  report.mean_h = h_sum / static_cast<double>(report.completed_reps);
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace deconvband
