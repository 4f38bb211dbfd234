#include <doctest.h>

#include <cmath>

#include "deconvband/errors.hpp"
#include "deconvband/simulate.hpp"
#include "test_util.hpp"

using namespace deconvband;

namespace {

double mean_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  return m / static_cast<double>(v.size());
}

double var_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return acc / static_cast<double>(v.size() - 1);
}

}  // namespace

TEST_CASE("generators are deterministic in the seed") {
  DgpSpec spec;
  spec.model = ModelKind::model2;
  spec.shape = RegressionShape::sine;
  spec.n = 200;
  spec.seed = 424242;
  const Sample a = generate(spec);
  const Sample b = generate(spec);
  CHECK(a.y == b.y);
  CHECK(a.w == b.w);
  CHECK(a.eta == b.eta);
  spec.seed = 424243;
  const Sample c = generate(spec);
  CHECK(a.w != c.w);
}

TEST_CASE("Model 1 moments") {
  DgpSpec spec;
  spec.sigma_x = 2.0;
  spec.seed = 99;

  SUBCASE("eta variance is near one at a million draws") {
    spec.n = 1000000;
    const Sample s = gen_model1(spec);
    // Var(eta) = 2 b^2 = 1; 3 standard errors of the variance estimate
    CHECK(std::fabs(var_of(s.eta) - 1.0) < 0.0068);
  }
  SUBCASE("latent first and second moments at n = 1e5") {
    spec.n = 100000;
    LatentDraws latent;
    const Sample s = gen_model1(spec, &latent);
    const double rn = std::sqrt(static_cast<double>(spec.n));
    CHECK(std::fabs(mean_of(latent.x)) < 4.0 * 2.0 / rn);
    CHECK(std::fabs(var_of(latent.x) - 4.0) < 4.0 * 4.0 * std::sqrt(2.0) / rn);
    CHECK(std::fabs(mean_of(latent.u)) < 4.0 / rn);
    CHECK(std::fabs(var_of(latent.u) - 1.0) < 4.0 * std::sqrt(2.0) / rn);
    CHECK(std::fabs(mean_of(s.eta)) < 4.0 / rn);
    // W - X = eps has the same law as eta; compare their spreads
    std::vector<double> eps(s.n());
    for (std::size_t j = 0; j < s.n(); ++j) eps[j] = s.w[j] - latent.x[j];
    CHECK(std::fabs(var_of(eps) - 1.0) < 4.0 * std::sqrt(20.0) / rn);
    // responses follow the linear truth
    for (std::size_t j = 0; j < 50; ++j) {
      CHECK(s.y[j] == latent.x[j] + latent.u[j]);
    }
  }
}

TEST_CASE("Model 2 moments and transform identity") {
  DgpSpec spec;
  spec.model = ModelKind::model2;
  spec.sigma_x = 2.0;
  spec.n = 100000;
  spec.seed = 321;
  LatentDraws latent;
  const Sample s = gen_model2(spec, &latent);
  const double rn = std::sqrt(static_cast<double>(spec.n));
  // Var(eta) = Var((e1 - e2)/2) = 1/4 and Var(W - X) = Var((e1 + e2)/2) = 1/4
  CHECK(std::fabs(var_of(s.eta) - 0.25) < 0.005);
  std::vector<double> eps(s.n());
  for (std::size_t j = 0; j < s.n(); ++j) eps[j] = s.w[j] - latent.x[j];
  CHECK(std::fabs(var_of(eps) - 0.25) < 0.005);
  CHECK(std::fabs(var_of(eps) - var_of(s.eta)) < 0.006);
  CHECK(std::fabs(mean_of(latent.x)) < 4.0 * 2.0 / rn);
}

TEST_CASE("DgpSpec validation") {
  DgpSpec spec;
  spec.n = 5;
  CHECK_THROWS_AS(spec.validate(), input_error);
  spec.n = 100;
  spec.sigma_x = 0.0;
  CHECK_THROWS_AS(spec.validate(), input_error);
  spec.sigma_x = 1.0;
  spec.shape = RegressionShape::custom;
  CHECK_THROWS_AS(spec.validate(), input_error);
  spec.custom_g = [](double x) { return 2.0 * x; };
  CHECK_NOTHROW(spec.validate());
  CHECK(spec.g(3.0) == 6.0);
}

TEST_CASE("coverage experiment smoke run") {
  DgpSpec dgp;
  dgp.model = ModelKind::model1;
  dgp.shape = RegressionShape::linear;
  dgp.sigma_x = 2.0;
  dgp.n = 150;
  CoverageConfig cfg;
  cfg.levels = {0.0, 0.80, 0.90};
  cfg.boot_reps = 150;
  cfg.grid_points = 41;
  cfg.n_nodes = 513;
  cfg.threads = 2;
  const CoverageReport report = coverage_experiment(dgp, cfg, 60, 777);

  CHECK(report.requested_reps == 60);
  CHECK(report.completed_reps + report.failed_reps == 60);
  CHECK(report.failed_reps <= 1);
  CHECK(report.runtime_seconds > 0.0);
  CHECK(report.mean_h > 0.0);
  // zero-width bands never cover; honest levels land in a sane range
  CHECK(report.coverage[0] == 0.0);
  CHECK(report.coverage[1] > 0.4);
  CHECK(report.coverage[1] <= 1.0);
  CHECK(report.coverage[2] >= report.coverage[1]);

  SUBCASE("byte-identical across thread counts") {
    CoverageConfig c1 = cfg;
    c1.threads = 1;
    const CoverageReport again = coverage_experiment(dgp, c1, 60, 777);
    CHECK(again.coverage == report.coverage);
    CHECK(again.covered == report.covered);
    CHECK(again.mean_h == report.mean_h);
  }
  SUBCASE("preconditions") {
    CHECK_THROWS_AS(coverage_experiment(dgp, cfg, 10, 1), input_error);
  }
}
