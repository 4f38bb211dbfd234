#include "deconvband/deconv.hpp"

#include <cmath>
#include <numbers>

#include "deconvband/errors.hpp"
#include "deconvband/parallel.hpp"

namespace deconvband {

namespace {

constexpr double kInvTwoPi = 1.0 / (2.0 * std::numbers::pi);
constexpr int kRenormEvery = 256;

// Full-lattice trapezoid weight for |k| <= K mapped onto the half storage.
double full_weight(const DeconvTable& tbl, int k) {
  return (k == tbl.half_count()) ? tbl.delta / 2.0 : tbl.delta;
}

// Hermitian pair sum: 2 * sum_k w_k Re(coef_k * e^{-i t_k u}) with the k = 0
// term counted once through w_0 = delta/2... the half grid stores w_0 =
// delta/2 so the doubling yields the single full-lattice delta. coef must be
// pre-multiplied by the half-grid weights when use_weights is false.
double phased_pair_sum(std::span<const std::complex<double>> coef, double delta,
                       double u, std::span<const double> weights) {
  const double c = std::cos(delta * u);
  const double s = std::sin(delta * u);
  double pr = 1.0, pi = 0.0;  // e^{-i t_k u} phasor, rotated by e^{-i delta u}
  double acc = 0.0;
  const int count = static_cast<int>(coef.size());
  for (int k = 0; k < count; ++k) {
    if (k > 0 && k % kRenormEvery == 0) {
      const double a = delta * u * static_cast<double>(k);
      pr = std::cos(a);
      pi = -std::sin(a);
    }
    const double w = weights.empty() ? 1.0 : weights[k];
    acc += w * (coef[k].real() * pr - coef[k].imag() * pi);
    const double t = pr * c - pi * (-s);
    pi = pr * (-s) + pi * c;
    pr = t;
  }
  return 2.0 * acc;
}

// Weighted sample CFs on the doubled lattice s_l = l*delta, l = 0..2K:
// out1 = (1/n) sum e^{i s_l w_j / h}, outy weighted by y, outyy by y^2.
struct EcfLattice {
  std::vector<std::complex<double>> one;
  std::vector<std::complex<double>> y;
  std::vector<std::complex<double>> yy;
};

EcfLattice ecf_lattice(const Sample& s, const DeconvTable& tbl, int count) {
  EcfLattice out;
  out.one.assign(count, {0.0, 0.0});
  out.y.assign(count, {0.0, 0.0});
  out.yy.assign(count, {0.0, 0.0});
  const double step = tbl.delta / tbl.h;
  const std::size_t n = s.n();
  for (std::size_t j = 0; j < n; ++j) {
    const double theta = step * s.w[j];
    const std::complex<double> rot(std::cos(theta), std::sin(theta));
    const double yj = s.y[j];
    const double yyj = yj * yj;
    std::complex<double> p(1.0, 0.0);
    for (int l = 0; l < count; ++l) {
      if (l > 0 && l % kRenormEvery == 0) {
        p = std::polar(1.0, theta * static_cast<double>(l));
      }
      out.one[l] += p;
      out.y[l] += yj * p;
      out.yy[l] += yyj * p;
      p *= rot;
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int l = 0; l < count; ++l) {
    out.one[l] *= inv_n;
    out.y[l] *= inv_n;
    out.yy[l] *= inv_n;
  }
  return out;
}

std::vector<double> linear_sum_on_grid(const DeconvTable& tbl,
                                       std::span<const std::complex<double>> psi,
                                       std::span<const double> x_grid) {
  const int half = tbl.half_count() + 1;
  std::vector<std::complex<double>> coef(half);
  for (int k = 0; k < half; ++k) {
    coef[k] = tbl.grid.weights[k] * tbl.ratio[k] * psi[k];
  }
  std::vector<double> out(x_grid.size());
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    out[i] = kInvTwoPi * phased_pair_sum(coef, tbl.delta, x_grid[i] / tbl.h, {});
  }
  return out;
}

std::vector<double> squared_sum_on_grid(const DeconvTable& tbl,
                                        std::span<const std::complex<double>> psi,
                                        std::span<const double> x_grid) {
  const int count = static_cast<int>(tbl.sq_transform.size());
  std::vector<std::complex<double>> coef(count);
  for (int l = 0; l < count; ++l) coef[l] = tbl.sq_transform[l] * psi[l];
  std::vector<double> out(x_grid.size());
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    // sq_transform absorbs the quadrature weights; the l = 0 term must be
    // counted once, so take off the doubled half before pairing
    const double full = phased_pair_sum(coef, tbl.delta, x_grid[i] / tbl.h, {});
    out[i] = full - coef[0].real();
  }
  return out;
}

}  // namespace

DeconvTable build_table(const CharFnTable& cf_eps, const KernelSpec& spec,
                        double h, int n_nodes, double trunc_floor) {
  spec.validate();
  if (!(h > 0.0)) throw input_error("bandwidth must be positive");
  if (n_nodes < 64) throw input_error("need at least 64 quadrature nodes");
  if (n_nodes % 2 == 0) ++n_nodes;  // keep t = 0 on the lattice

  DeconvTable tbl;
  tbl.h = h;
  tbl.n_nodes = n_nodes;
  tbl.delta = 2.0 / static_cast<double>(n_nodes - 1);
  tbl.grid = FrequencyGrid::symmetric_half(1.0, n_nodes);
  tbl.cf_kind = cf_eps.kind;

  if (trunc_floor < 0.0) {
    tbl.trunc_floor = cf_eps.kind == CfKind::empirical
                          ? 1.0 / std::sqrt(static_cast<double>(cf_eps.eta.size()))
                          : 0.0;
  } else {
    tbl.trunc_floor = trunc_floor;
  }

  const int half = (n_nodes - 1) / 2;
  const auto phi_eps = cf_eps.eval_lattice(tbl.delta / h, half + 1);
  tbl.ratio.resize(half + 1);
  tbl.truncated_nodes = 0;
  for (int k = 0; k <= half; ++k) {
    std::complex<double> denom = phi_eps[k];
    if (tbl.trunc_floor > 0.0) {
      const std::complex<double> floored = apply_modulus_floor(denom, tbl.trunc_floor);
      if (floored != denom) {
        denom = floored;
        ++tbl.truncated_nodes;
      }
    }
    const double num = flat_top_cf(spec, tbl.grid.nodes[k]);
    const std::complex<double> r = num / denom;
    if (!std::isfinite(r.real()) || !std::isfinite(r.imag())) {
      throw numeric_error("non-finite deconvolution ratio (error CF too small?)");
    }
    tbl.ratio[k] = r;
  }

  // Self-convolution of the weighted full-lattice ratio. A[i] <-> k = i - K.
  std::vector<double> ar(2 * half + 1), ai(2 * half + 1);
  for (int i = 0; i <= 2 * half; ++i) {
    const int k = i - half;
    const int a = std::abs(k);
    const std::complex<double> r =
        k >= 0 ? tbl.ratio[a] : std::conj(tbl.ratio[a]);
    const double w = full_weight(tbl, a);
    ar[i] = w * r.real();
    ai[i] = w * r.imag();
  }
  tbl.sq_transform.resize(2 * half + 1);
  const double scale = kInvTwoPi * kInvTwoPi;
  for (int l = 0; l <= 2 * half; ++l) {
    double qr = 0.0, qi = 0.0;
    const int lo = l;  // i in [l, 2K] pairs with l + 2K - i in [l, 2K] reversed
    for (int i = lo; i <= 2 * half; ++i) {
      const int j = l + 2 * half - i;
      qr += ar[i] * ar[j] - ai[i] * ai[j];
      qi += ar[i] * ai[j] + ai[i] * ar[j];
    }
    tbl.sq_transform[l] = scale * std::complex<double>(qr, qi);
  }
  return tbl;
}

double kernel_at(const DeconvTable& tbl, double u) {
  const int half = tbl.half_count() + 1;
  return kInvTwoPi * phased_pair_sum({tbl.ratio.data(), static_cast<std::size_t>(half)},
                                     tbl.delta, u, tbl.grid.weights);
}

WeightedEcf weighted_ecf(const Sample& s, const DeconvTable& tbl) {
  s.validate_shape();
  const int half = tbl.half_count() + 1;
  const auto lattice = ecf_lattice(s, tbl, half);
  WeightedEcf out;
  out.grid = tbl.grid;
  out.psi_1.assign(lattice.one.begin(), lattice.one.end());
  out.psi_y.assign(lattice.y.begin(), lattice.y.end());
  return out;
}

KernelSums kernel_sums(const Sample& s, const DeconvTable& tbl,
                       std::span<const double> x_grid) {
  s.validate_shape();
  const int half = tbl.half_count() + 1;
  const auto lattice = ecf_lattice(s, tbl, half);
  KernelSums out;
  out.s0 = linear_sum_on_grid(tbl, lattice.one, x_grid);
  out.s1 = linear_sum_on_grid(tbl, lattice.y, x_grid);
  return out;
}

SquaredKernelSums squared_kernel_sums(const Sample& s, const DeconvTable& tbl,
                                      std::span<const double> x_grid) {
  s.validate_shape();
  const int count = static_cast<int>(tbl.sq_transform.size());
  const auto lattice = ecf_lattice(s, tbl, count);
  SquaredKernelSums out;
  out.one = squared_sum_on_grid(tbl, lattice.one, x_grid);
  out.y = squared_sum_on_grid(tbl, lattice.y, x_grid);
  out.yy = squared_sum_on_grid(tbl, lattice.yy, x_grid);
  return out;
}

AllKernelSums all_kernel_sums(const Sample& s, const DeconvTable& tbl,
                              std::span<const double> x_grid) {
  s.validate_shape();
  const int count = static_cast<int>(tbl.sq_transform.size());
  const auto lattice = ecf_lattice(s, tbl, count);
  const int half = tbl.half_count() + 1;
  AllKernelSums out;
  out.lin.s0 = linear_sum_on_grid(tbl, {lattice.one.data(), static_cast<std::size_t>(half)}, x_grid);
  out.lin.s1 = linear_sum_on_grid(tbl, {lattice.y.data(), static_cast<std::size_t>(half)}, x_grid);
  out.sq.one = squared_sum_on_grid(tbl, lattice.one, x_grid);
  out.sq.y = squared_sum_on_grid(tbl, lattice.y, x_grid);
  out.sq.yy = squared_sum_on_grid(tbl, lattice.yy, x_grid);
  return out;
}

std::vector<double> kernel_row(const DeconvTable& tbl, std::span<const double> w,
                               double x) {
  const std::size_t n = w.size();
  const int half = tbl.half_count();
  std::vector<double> acc(n, 0.0);
  std::vector<double> pr(n, 1.0), pi(n, 0.0), cr(n), ci(n), theta(n);
  for (std::size_t j = 0; j < n; ++j) {
    theta[j] = -tbl.delta * (x - w[j]) / tbl.h;
    cr[j] = std::cos(theta[j]);
    ci[j] = std::sin(theta[j]);
  }
  for (int k = 0; k <= half; ++k) {
    if (k > 0 && k % (2 * kRenormEvery) == 0) {
      for (std::size_t j = 0; j < n; ++j) {
        const double a = theta[j] * static_cast<double>(k);
        pr[j] = std::cos(a);
        pi[j] = std::sin(a);
      }
    }
    const double wrr = tbl.grid.weights[k] * tbl.ratio[k].real();
    const double wri = tbl.grid.weights[k] * tbl.ratio[k].imag();
    for (std::size_t j = 0; j < n; ++j) {
      acc[j] += wrr * pr[j] - wri * pi[j];
    }
    if (k < half) {
      for (std::size_t j = 0; j < n; ++j) {
        const double t = pr[j] * cr[j] - pi[j] * ci[j];
        pi[j] = pr[j] * ci[j] + pi[j] * cr[j];
        pr[j] = t;
      }
    }
  }
  for (std::size_t j = 0; j < n; ++j) acc[j] *= 2.0 * kInvTwoPi;
  return acc;
}

KernelMatrix kernel_matrix(const DeconvTable& tbl, std::span<const double> w,
                           std::span<const double> x_grid, int threads) {
  KernelMatrix km;
  km.rows = x_grid.size();
  km.cols = w.size();
  km.values.resize(km.rows * km.cols);
  parallel_for(km.rows, threads, [&](std::size_t i) {
    const auto row = kernel_row(tbl, w, x_grid[i]);
    std::copy(row.begin(), row.end(), km.values.begin() + i * km.cols);
  });
  return km;
}

double plancherel_residual(const DeconvTable& tbl) {
  const int half = tbl.half_count();
  double t_side = 0.0;
  for (int k = 0; k <= half; ++k) {
    t_side += tbl.grid.weights[k] * std::norm(tbl.ratio[k]);
  }
  t_side *= 2.0 * kInvTwoPi / tbl.h;

  // int_{-L}^{L} Khat^2 du = int_0^L [f(u) + f(-u)] du, composite Simpson per
  // chunk of 50 units, extended until the tail contribution is dead.
  const double du = 0.05;
  const int steps = 1000;  // per chunk; even
  auto g = [&](double u) {
    const double kp = kernel_at(tbl, u);
    const double km = kernel_at(tbl, -u);
    return kp * kp + km * km;
  };
  double total = 0.0;
  for (int c = 0; c < 40; ++c) {
    const double u0 = c * steps * du;
    double part = g(u0) + g(u0 + steps * du);
    for (int i = 1; i < steps; ++i) {
      part += (i % 2 == 1 ? 4.0 : 2.0) * g(u0 + i * du);
    }
    part *= du / 3.0;
    total += part;
    if (c >= 2 && std::fabs(part) < 1e-9 * std::fabs(total)) break;
  }
  const double u_side = total / tbl.h;
  return std::fabs(u_side - t_side) / t_side;
}

}  // namespace deconvband
