#include "deconvband/charfn.hpp"

#include <cmath>
#include <cstddef>

#include "deconvband/errors.hpp"

namespace deconvband {

FrequencyGrid FrequencyGrid::uniform(double lo, double hi, int n) {
  if (!(lo < hi) || n < 2) throw input_error("bad frequency grid bounds");
  FrequencyGrid g;
  g.nodes.resize(n);
  g.weights.resize(n);
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (int k = 0; k < n; ++k) {
    g.nodes[k] = lo + step * k;
    g.weights[k] = (k == 0 || k == n - 1) ? step / 2.0 : step;
  }
  return g;
}

FrequencyGrid FrequencyGrid::symmetric_half(double extent, int full_nodes) {
  if (!(extent > 0.0) || full_nodes < 3) throw input_error("bad frequency grid");
  if (full_nodes % 2 == 0) ++full_nodes;
  const int half = (full_nodes - 1) / 2;
  FrequencyGrid g = uniform(0.0, extent, half + 1);
  g.even_symmetric = true;
  return g;
}

void FrequencyGrid::validate() const {
  if (nodes.size() != weights.size() || nodes.size() < 2) {
    throw input_error("frequency grid: nodes/weights mismatch");
  }
  for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
    if (!(nodes[k] < nodes[k + 1])) {
      throw input_error("frequency grid: nodes must be strictly increasing");
    }
  }
  for (double w : weights) {
    if (!(w > 0.0)) throw input_error("frequency grid: weights must be positive");
  }
  if (even_symmetric && nodes.front() < 0.0) {
    throw input_error("even-symmetric grid must be non-negative");
  }
}

void KernelSpec::validate() const {
  if (!(b > 0.0)) throw input_error("kernel b must be positive");
  if (!(c > 0.0 && c < 1.0)) throw input_error("kernel c must lie in (0,1)");
}

double flat_top_cf(const KernelSpec& spec, double t) {
  const double a = std::fabs(t);
  if (a <= spec.c) return 1.0;
  if (a >= 1.0) return 0.0;
  const double dc = a - spec.c;
  const double d1 = a - 1.0;
  // inner exp underflows to 0 as a -> c+ and the outer argument blows up as
  // a -> 1-, so both one-sided limits are handled by plain evaluation
  return std::exp(-spec.b * std::exp(-spec.b / (dc * dc)) / (d1 * d1));
}

std::complex<double> apply_modulus_floor(std::complex<double> z, double floor_value) {
  const double mod = std::abs(z);
  if (mod >= floor_value) return z;
  if (mod == 0.0) return {floor_value, 0.0};
  return z * (floor_value / mod);
}

namespace {

std::complex<double> laplace_value(double scale, double t) {
  return {1.0 / (1.0 + scale * scale * t * t), 0.0};
}

std::complex<double> averaged_pair_value(double scale, double t) {
  const double one = 1.0 + scale * scale * t * t / 4.0;
  return {1.0 / (one * one), 0.0};
}

void check_table_invariants(const CharFnTable& cf) {
  for (std::size_t k = 0; k < cf.grid.nodes.size(); ++k) {
    if (cf.grid.nodes[k] == 0.0 && std::abs(cf.values[k] - 1.0) > 1e-12) {
      throw numeric_error("characteristic function table violates phi(0) = 1");
    }
  }
}

}  // namespace

std::complex<double> CharFnTable::eval(double t) const {
  switch (kind) {
    case CfKind::constant_one:
      return {1.0, 0.0};
    case CfKind::analytic_laplace:
      return laplace_value(scale, t);
    case CfKind::analytic_product:
      return averaged_pair_value(scale, t);
    case CfKind::empirical: {
      double re = 0.0, im = 0.0;
      for (double e : eta) {
        re += std::cos(t * e);
        im += std::sin(t * e);
      }
      const double inv_m = 1.0 / static_cast<double>(eta.size());
      return {re * inv_m, im * inv_m};
    }
  }
  return {1.0, 0.0};
}

std::vector<std::complex<double>> CharFnTable::eval_lattice(double step,
                                                            int count) const {
  std::vector<std::complex<double>> out(count, std::complex<double>(0.0, 0.0));
  if (kind != CfKind::empirical) {
    for (int l = 0; l < count; ++l) out[l] = eval(step * l);
    return out;
  }
  if (eta.empty()) throw input_error("empirical CF has no eta draws");
  constexpr int renorm_every = 256;
  for (double e : eta) {
    const double theta = step * e;
    const std::complex<double> stp(std::cos(theta), std::sin(theta));
    std::complex<double> p(1.0, 0.0);
    for (int l = 0; l < count; ++l) {
      if (l % renorm_every == 0) {
        p = std::polar(1.0, theta * static_cast<double>(l));
      }
      out[l] += p;
      p *= stp;
    }
  }
  const double inv_m = 1.0 / static_cast<double>(eta.size());
  for (auto& v : out) v *= inv_m;
  return out;
}

CharFnTable empirical_cf(std::span<const double> eta, FrequencyGrid grid) {
  if (eta.empty()) throw input_error("empirical CF: eta is empty");
  grid.validate();
  CharFnTable cf;
  cf.kind = CfKind::empirical;
  cf.eta.assign(eta.begin(), eta.end());
  cf.grid = std::move(grid);
  cf.values.resize(cf.grid.nodes.size());
  for (std::size_t k = 0; k < cf.grid.nodes.size(); ++k) {
    cf.values[k] = cf.eval(cf.grid.nodes[k]);
  }
  check_table_invariants(cf);
  return cf;
}

CharFnTable laplace_cf(double scale, FrequencyGrid grid) {
  if (!(scale > 0.0)) throw input_error("laplace scale must be positive");
  grid.validate();
  CharFnTable cf;
  cf.kind = CfKind::analytic_laplace;
  cf.scale = scale;
  cf.grid = std::move(grid);
  cf.values.resize(cf.grid.nodes.size());
  for (std::size_t k = 0; k < cf.grid.nodes.size(); ++k) {
    cf.values[k] = cf.eval(cf.grid.nodes[k]);
  }
  return cf;
}

CharFnTable averaged_pair_cf(double component_scale, FrequencyGrid grid) {
  if (!(component_scale > 0.0)) throw input_error("component scale must be positive");
  grid.validate();
  CharFnTable cf;
  cf.kind = CfKind::analytic_product;
  cf.scale = component_scale;
  cf.grid = std::move(grid);
  cf.values.resize(cf.grid.nodes.size());
  for (std::size_t k = 0; k < cf.grid.nodes.size(); ++k) {
    cf.values[k] = cf.eval(cf.grid.nodes[k]);
  }
  return cf;
}

CharFnTable constant_one_cf(FrequencyGrid grid) {
  grid.validate();
  CharFnTable cf;
  cf.kind = CfKind::constant_one;
  cf.grid = std::move(grid);
  cf.values.assign(cf.grid.nodes.size(), {1.0, 0.0});
  return cf;
}

namespace {
FrequencyGrid default_half_grid() { return FrequencyGrid::symmetric_half(1.0, 257); }
}  // namespace

CharFnTable laplace_cf(double scale) { return laplace_cf(scale, default_half_grid()); }
CharFnTable averaged_pair_cf(double component_scale) {
  return averaged_pair_cf(component_scale, default_half_grid());
}
CharFnTable constant_one_cf() { return constant_one_cf(default_half_grid()); }

CharFnTable truncate_cf(const CharFnTable& cf, double floor_value, int* modified) {
  if (!(floor_value > 0.0)) throw input_error("truncation floor must be positive");
  CharFnTable out = cf;
  int count = 0;
  for (auto& v : out.values) {
    const std::complex<double> floored = apply_modulus_floor(v, floor_value);
    if (floored != v) {
      v = floored;
      ++count;
    }
  }
  if (modified) *modified = count;
  return out;
}

}  // namespace deconvband
