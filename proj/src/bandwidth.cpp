#include "deconvband/bandwidth.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "deconvband/errors.hpp"
#include "deconvband/parallel.hpp"

namespace deconvband {

namespace {

std::vector<double> binomial_row_table(int max_k) {
  // C(k, q) packed row by row, row k at offset k*(k+1)/2
  std::vector<double> c((max_k + 1) * (max_k + 2) / 2);
  for (int k = 0; k <= max_k; ++k) {
    const int off = k * (k + 1) / 2;
    c[off] = 1.0;
    c[off + k] = 1.0;
    for (int q = 1; q < k; ++q) {
      const int prev = (k - 1) * k / 2;
      c[off + q] = c[prev + q - 1] + c[prev + q];
    }
  }
  return c;
}

// E[X^k] for k = 0..order from sample power means of W and error moments.
std::vector<double> corrected_moments(const std::vector<double>& w_means,
                                      const std::vector<double>& eps_means,
                                      const std::vector<double>& binom) {
  const int order = static_cast<int>(w_means.size()) - 1;
  std::vector<double> x(order + 1);
  x[0] = 1.0;
  for (int k = 1; k <= order; ++k) {
    double corr = 0.0;
    const int off = k * (k + 1) / 2;
    for (int q = 0; q < k; ++q) {
      corr += binom[off + q] * x[q] * eps_means[k - q];
    }
    x[k] = w_means[k] - corr;
  }
  return x;
}

std::vector<double> power_means(std::span<const double> v, int order,
                                std::span<const double> mult = {}) {
  std::vector<double> out(order + 1, 0.0);
  for (std::size_t j = 0; j < v.size(); ++j) {
    double p = mult.empty() ? 1.0 : mult[j];
    out[0] += p;
    for (int k = 1; k <= order; ++k) {
      p *= v[j];
      out[k] += p;
    }
  }
  const double inv = 1.0 / static_cast<double>(v.size());
  for (auto& m : out) m *= inv;
  return out;
}

// Gaussian elimination with partial pivoting; throws on (near-)singularity.
std::vector<double> solve_dense(std::vector<std::vector<double>> a,
                                std::vector<double> b) {
  const std::size_t d = b.size();
  double scale = 0.0;
  for (const auto& row : a) {
    for (double v : row) scale = std::max(scale, std::fabs(v));
  }
  if (!(scale > 0.0)) throw pilot_error("pilot moment matrix is zero");
  for (std::size_t c = 0; c < d; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < d; ++r) {
      if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
    }
    if (std::fabs(a[piv][c]) < 1e-12 * scale) {
      throw pilot_error("pilot moment matrix is singular");
    }
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < d; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < d; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(d);
  for (std::size_t rc = d; rc-- > 0;) {
    double acc = b[rc];
    for (std::size_t k = rc + 1; k < d; ++k) acc -= a[rc][k] * x[k];
    x[rc] = acc / a[rc][rc];
  }
  return x;
}

}  // namespace

double PilotFit::eval(double x) const {
  double acc = 0.0;
  for (std::size_t p = coef.size(); p-- > 0;) acc = acc * x + coef[p];
  return acc;
}

PilotFit pilot_eiv_polyfit(const Sample& s, int degree) {
  s.validate_for_estimation();
  if (degree < 1) throw input_error("pilot degree must be at least 1");
  const int order = 2 * degree;
  const auto binom = binomial_row_table(order);

  const auto centered = center_eta(s);
  const std::vector<double>& eta_c = centered.sample.eta;

  double w_mean = 0.0;
  for (double w : s.w) w_mean += w;
  w_mean /= static_cast<double>(s.n());
  double w_var = 0.0;
  for (double w : s.w) w_var += (w - w_mean) * (w - w_mean);
  w_var /= static_cast<double>(s.n() - 1);
  const double w_sd = std::sqrt(w_var);
  if (!(w_sd > 0.0)) throw pilot_error("predictor column is constant");

  // standardized coordinates for the solve
  std::vector<double> w_std(s.n()), eta_std(eta_c.size());
  for (std::size_t j = 0; j < s.n(); ++j) w_std[j] = (s.w[j] - w_mean) / w_sd;
  for (std::size_t i = 0; i < eta_c.size(); ++i) eta_std[i] = eta_c[i] / w_sd;

  const auto eps_std = power_means(eta_std, order);
  const auto x_std = corrected_moments(power_means(w_std, order), eps_std, binom);
  std::vector<double> yx_std(degree + 1);
  {
    const auto yw = power_means(w_std, degree, s.y);
    yx_std[0] = yw[0];
    for (int k = 1; k <= degree; ++k) {
      double corr = 0.0;
      const int off = k * (k + 1) / 2;
      for (int q = 0; q < k; ++q) {
        corr += binom[off + q] * yx_std[q] * eps_std[k - q];
      }
      yx_std[k] = yw[k] - corr;
    }
  }

  std::vector<std::vector<double>> m(degree + 1, std::vector<double>(degree + 1));
  for (int p = 0; p <= degree; ++p) {
    for (int q = 0; q <= degree; ++q) m[p][q] = x_std[p + q];
  }
  const auto beta_std = solve_dense(std::move(m), yx_std);

  PilotFit fit;
  // map g(x) = sum_p beta_p ((x - w_mean)/w_sd)^p back to the raw basis
  fit.coef.assign(degree + 1, 0.0);
  for (int p = 0; p <= degree; ++p) {
    const double bp = beta_std[p] / std::pow(w_sd, p);
    double shift_pow = 1.0;  // (-w_mean)^{p-i}, filled from i = p downward
    for (int i = p; i >= 0; --i) {
      fit.coef[i] += bp * binom[p * (p + 1) / 2 + i] * shift_pow;
      shift_pow *= -w_mean;
    }
  }
  fit.eps_moments = power_means(eta_c, order);
  fit.x_moments =
      corrected_moments(power_means(s.w, order), fit.eps_moments, binom);
  for (double c : fit.coef) {
    if (!std::isfinite(c)) throw pilot_error("pilot fit produced non-finite coefficients");
  }
  return fit;
}

SelectorCriteria selector_criteria(const Sample& s, const PilotFit& fit,
                                   const DeconvTable& tbl,
                                   std::span<const double> x_grid) {
  if (x_grid.empty()) throw input_error("empty evaluation grid");
  const auto sums = all_kernel_sums(s, tbl, x_grid);
  SelectorCriteria out;
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    const double gt = fit.eval(x_grid[i]);
    const double a = sums.lin.s1[i] - gt * sums.lin.s0[i];
    const double msq =
        sums.sq.yy[i] - 2.0 * gt * sums.sq.y[i] + gt * gt * sums.sq.one[i];
    const double s2 = std::max(0.0, msq - a * a);  // variance form, >= 0
    out.sup_a2 = std::max(out.sup_a2, a * a);
    out.sup_s2_over_n = std::max(out.sup_s2_over_n, s2 / static_cast<double>(s.n()));
  }
  return out;
}

std::pair<std::vector<double>, std::vector<double>> monotonize(
    std::span<const double> delta_a, std::span<const double> delta_s) {
  if (delta_a.size() != delta_s.size()) {
    throw input_error("delta sequences must have equal length");
  }
  if (delta_a.empty()) throw input_error("empty delta sequences");
  std::vector<double> a(delta_a.begin(), delta_a.end());
  std::vector<double> s(delta_s.begin(), delta_s.end());
  for (std::size_t j = 0; j + 1 < a.size(); ++j) {
    if (a[j] > a[j + 1]) a[j + 1] = a[j];
    if (s[j] < s[j + 1]) s[j + 1] = s[j];
  }
  return {std::move(a), std::move(s)};
}

int select_index(std::span<const double> mono_a, std::span<const double> mono_s,
                 double cn) {
  for (std::size_t i = 0; i < mono_a.size(); ++i) {
    if (cn * mono_a[i] >= -mono_s[i]) return static_cast<int>(i);
  }
  return -1;
}

void BandwidthConfig::validate() const {
  kernel.validate();
  if (!(cn_exponent > 0.0)) throw input_error("cn exponent must be positive");
  if (pilot_degree < 1) throw input_error("pilot degree must be at least 1");
  if (x_grid.empty()) throw input_error("bandwidth selection needs an evaluation grid");
  if (n_nodes < 64) throw input_error("need at least 64 quadrature nodes");
  if (grid.empty()) {
    if (default_grid_size < 2) throw input_error("candidate grid needs J >= 2");
  } else {
    if (grid.size() < 2) throw input_error("candidate grid needs J >= 2");
    for (std::size_t j = 0; j < grid.size(); ++j) {
      if (!(grid[j] > 0.0)) throw input_error("candidate bandwidths must be positive");
      if (j > 0 && !(grid[j] > grid[j - 1])) {
        throw input_error("candidate bandwidths must be strictly increasing");
      }
    }
  }
}

std::vector<double> default_bandwidth_grid(const Sample& s, int grid_size) {
  if (grid_size < 2) throw input_error("candidate grid needs J >= 2");
  double mean = 0.0;
  for (double w : s.w) mean += w;
  mean /= static_cast<double>(s.n());
  double var = 0.0;
  for (double w : s.w) var += (w - mean) * (w - mean);
  var /= static_cast<double>(s.n() - 1);
  const double sd = std::sqrt(var);
  if (!(sd > 0.0)) throw input_error("predictor column is constant");
  const double lo = 0.2 * sd / std::sqrt(static_cast<double>(s.n()) / 100.0);
  const double hi = 1.5 * sd;
  std::vector<double> grid(grid_size);
  const double ratio = std::pow(hi / lo, 1.0 / static_cast<double>(grid_size - 1));
  double h = lo;
  for (int j = 0; j < grid_size; ++j) {
    grid[j] = h;
    h *= ratio;
  }
  grid.back() = hi;
  return grid;
}

SelectionResult select_bandwidth(const Sample& s, const BandwidthConfig& cfg) {
  s.validate_for_estimation();
  cfg.validate();
  const std::vector<double> grid =
      cfg.grid.empty() ? default_bandwidth_grid(s, cfg.default_grid_size) : cfg.grid;
  const std::size_t big_j = grid.size();

  const PilotFit pilot = pilot_eiv_polyfit(s, cfg.pilot_degree);
  const CharFnTable cf =
      empirical_cf(s.eta, FrequencyGrid::symmetric_half(1.0, 129));

  std::vector<double> sup_a2(big_j), sup_s2n(big_j);
  parallel_for(big_j, cfg.threads, [&](std::size_t j) {
    const DeconvTable tbl =
        build_table(cf, cfg.kernel, grid[j], cfg.n_nodes, cfg.trunc_floor);
    const SelectorCriteria crit = selector_criteria(s, pilot, tbl, cfg.x_grid);
    sup_a2[j] = crit.sup_a2;
    sup_s2n[j] = crit.sup_s2_over_n;
  });
  for (std::size_t j = 0; j < big_j; ++j) {
    if (!std::isfinite(sup_a2[j]) || !std::isfinite(sup_s2n[j])) {
      throw numeric_error("bandwidth criteria are non-finite");
    }
  }

  std::vector<double> da(big_j - 1), ds(big_j - 1);
  for (std::size_t j = 1; j < big_j; ++j) {
    da[j - 1] = sup_a2[j] - sup_a2[j - 1];
    ds[j - 1] = sup_s2n[j] - sup_s2n[j - 1];
  }
  auto [mono_a, mono_s] = monotonize(da, ds);

  const double cn =
      std::pow(static_cast<double>(s.n()) / 100.0, cfg.cn_exponent);
  const int idx = select_index(mono_a, mono_s, cn);

  SelectionResult out;
  out.trace.h_grid = grid;
  out.trace.sup_a2 = std::move(sup_a2);
  out.trace.sup_s2_over_n = std::move(sup_s2n);
  out.trace.delta_a2_raw = std::move(da);
  out.trace.delta_s2_raw = std::move(ds);
  out.trace.delta_a2_mono = std::move(mono_a);
  out.trace.delta_s2_mono = std::move(mono_s);
  out.trace.cn = cn;
  out.trace.cn_exponent = cfg.cn_exponent;
  out.trace.pilot_degree = cfg.pilot_degree;
  out.trace.pilot_coef = pilot.coef;
  if (idx >= 0) {
    out.trace.selected_j = idx + 2;
    out.trace.no_crossing = false;
  } else {
    out.trace.selected_j = static_cast<int>(big_j);
    out.trace.no_crossing = true;
  }
  out.trace.selected_h = grid[out.trace.selected_j - 1];
  out.h = out.trace.selected_h;
  return out;
}

std::string trace_to_json(const SelectionTrace& trace) {
  nlohmann::json j;
  j["h_grid"] = trace.h_grid;
  j["sup_a2"] = trace.sup_a2;
  j["sup_s2_over_n"] = trace.sup_s2_over_n;
  j["delta_a2_raw"] = trace.delta_a2_raw;
  j["delta_s2_raw"] = trace.delta_s2_raw;
  j["delta_a2_mono"] = trace.delta_a2_mono;
  j["delta_s2_mono"] = trace.delta_s2_mono;
  j["selected_j"] = trace.selected_j;
  j["selected_h"] = trace.selected_h;
  j["cn"] = trace.cn;
  j["cn_exponent"] = trace.cn_exponent;
  j["no_crossing"] = trace.no_crossing;
  j["pilot_degree"] = trace.pilot_degree;
  j["pilot_coef"] = trace.pilot_coef;
  return j.dump(2);
}

}  // namespace deconvband
