#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "deconvband/band.hpp"
#include "deconvband/charfn.hpp"
#include "deconvband/sample.hpp"

namespace deconvband {

enum class ModelKind { model1, model2 };

enum class RegressionShape { linear, quadratic, cubic, sine, cosine, custom };

// Model 1: X ~ N(0, sigma_x^2), U ~ N(0,1), eps and an independent eta both
// Laplace(0, 2^{-1/2}); Y = g(X) + U, W = X + eps, m = n.
// Model 2: two Laplace(0, 1/2) measurement errors per unit, observed through
// the half-sum/half-difference transform.
struct DgpSpec {
  ModelKind model = ModelKind::model1;
  RegressionShape shape = RegressionShape::linear;
  std::function<double(double)> custom_g;  // used when shape == custom
  double sigma_x = 2.0;
  int n = 500;
  std::uint64_t seed = 0;

  void validate() const;
  double g(double x) const;
};

// Latent variables exposed for distribution sanity checks.
struct LatentDraws {
  std::vector<double> x;
  std::vector<double> u;
};

Sample gen_model1(const DgpSpec& spec, LatentDraws* latent = nullptr);
Sample gen_model2(const DgpSpec& spec, LatentDraws* latent = nullptr);
Sample generate(const DgpSpec& spec, LatentDraws* latent = nullptr);

struct CoverageConfig {
  std::vector<double> levels{0.80, 0.90, 0.95};
  int boot_reps = 500;
  int grid_points = 101;
  KernelSpec kernel;
  int n_nodes = 2049;
  double trunc_floor = -1.0;
  double fixed_h = -1.0;  // <= 0 selects the data-driven bandwidth
  double cn_exponent = 0.3;
  int pilot_degree = 3;
  int bw_grid_size = 20;
  int threads = 1;
};

struct CoverageReport {
  std::vector<double> levels;
  std::vector<double> coverage;  // fraction of completed reps fully covered
  int requested_reps = 0;
  int completed_reps = 0;
  int failed_reps = 0;
  std::vector<std::uint8_t> covered;  // rep-major: covered[rep * levels + l]
  std::vector<std::uint8_t> failed;   // per rep
  double mean_h = 0.0;
  double runtime_seconds = 0.0;
};

// Bands on I = [-sigma_x, sigma_x]; a rep counts as covered at a level when
// the true g stays inside the band at every grid point. Per-rep data and
// multiplier streams derive from (master_seed, rep), so reports are
// byte-identical for any thread count.
CoverageReport coverage_experiment(const DgpSpec& dgp, const CoverageConfig& cfg,
                                   int mc_reps, std::uint64_t master_seed);

}  // namespace deconvband
