#pragma once

// Independent reference implementations used as test oracles. Everything in
// here deliberately avoids the library's frequency-lattice machinery: plain
// quadrature, direct x-space summation, long-double normal equations.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include "deconvband/charfn.hpp"
#include "deconvband/deconv.hpp"
#include "deconvband/sample.hpp"

namespace oracle {

// (1/2pi) integral over [-1,1] of e^{-itu} phi_K(t)/phi_eps(t/h) dt via a
// fine trapezoid rule, independent of DeconvTable.
inline double kernel_value(const deconvband::KernelSpec& spec,
                           const std::function<std::complex<double>(double)>& phi_eps,
                           double h, double u, int nodes = 200001) {
  const double step = 2.0 / static_cast<double>(nodes - 1);
  std::complex<double> acc(0.0, 0.0);
  for (int k = 0; k < nodes; ++k) {
    const double t = -1.0 + step * k;
    const double w = (k == 0 || k == nodes - 1) ? 0.5 : 1.0;
    const std::complex<double> ratio =
        deconvband::flat_top_cf(spec, t) / phi_eps(t / h);
    acc += w * ratio * std::polar(1.0, -t * u);
  }
  return (acc * step).real() / (2.0 * std::numbers::pi);
}

// Ordinary flat-top kernel K(u) = (1/pi) int_0^1 phi_K(t) cos(tu) dt by
// composite Simpson; used by the error-free (constant-one CF) reductions.
inline double flat_top_kernel(const deconvband::KernelSpec& spec, double u,
                              int steps = 20000) {
  double acc = deconvband::flat_top_cf(spec, 0.0) +
               deconvband::flat_top_cf(spec, 1.0) * std::cos(u);
  const double dt = 1.0 / static_cast<double>(steps);
  for (int i = 1; i < steps; ++i) {
    const double t = dt * i;
    acc += (i % 2 == 1 ? 4.0 : 2.0) * deconvband::flat_top_cf(spec, t) *
           std::cos(t * u);
  }
  return acc * dt / 3.0 / std::numbers::pi;
}

// Textbook kernel density estimate / Nadaraya-Watson with the plain
// flat-top kernel above.
inline double kde_ref(const deconvband::KernelSpec& spec,
                      std::span<const double> w, double h, double x) {
  double acc = 0.0;
  for (double wj : w) acc += flat_top_kernel(spec, (x - wj) / h);
  return acc / (static_cast<double>(w.size()) * h);
}

inline double nw_ref(const deconvband::KernelSpec& spec,
                     std::span<const double> y, std::span<const double> w,
                     double h, double x) {
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    const double k = flat_top_kernel(spec, (x - w[j]) / h);
    num += y[j] * k;
    den += k;
  }
  return num / den;
}

// Direct x-space sums built from per-pair kernel_at calls (the spec's
// direct-summation oracle for the frequency-domain aggregation).
struct DirectSums {
  double s0 = 0.0;
  double s1 = 0.0;
  double s2_one = 0.0;
  double s2_y = 0.0;
  double s2_yy = 0.0;
};

inline DirectSums direct_sums(const deconvband::Sample& s,
                              const deconvband::DeconvTable& tbl, double x) {
  DirectSums out;
  const double inv_n = 1.0 / static_cast<double>(s.n());
  for (std::size_t j = 0; j < s.n(); ++j) {
    const double k = deconvband::kernel_at(tbl, (x - s.w[j]) / tbl.h);
    out.s0 += k;
    out.s1 += s.y[j] * k;
    out.s2_one += k * k;
    out.s2_y += s.y[j] * k * k;
    out.s2_yy += s.y[j] * s.y[j] * k * k;
  }
  out.s0 *= inv_n;
  out.s1 *= inv_n;
  out.s2_one *= inv_n;
  out.s2_y *= inv_n;
  out.s2_yy *= inv_n;
  return out;
}

// Ordinary least squares by long-double normal equations (no EIV correction).
inline std::vector<double> ols_polyfit(std::span<const double> y,
                                       std::span<const double> x, int degree) {
  const int d = degree + 1;
  std::vector<long double> m(d * d, 0.0L), r(d, 0.0L);
  for (std::size_t j = 0; j < x.size(); ++j) {
    long double pow_i = 1.0L;
    std::vector<long double> powers(2 * degree + 1);
    for (int k = 0; k <= 2 * degree; ++k) {
      powers[k] = pow_i;
      pow_i *= x[j];
    }
    for (int p = 0; p < d; ++p) {
      for (int q = 0; q < d; ++q) m[p * d + q] += powers[p + q];
      r[p] += y[j] * powers[p];
    }
  }
  // Gaussian elimination with partial pivoting in long double
  for (int c = 0; c < d; ++c) {
    int piv = c;
    for (int rr = c + 1; rr < d; ++rr) {
      if (std::fabs(static_cast<double>(m[rr * d + c])) >
          std::fabs(static_cast<double>(m[piv * d + c])))
        piv = rr;
    }
    for (int k = 0; k < d; ++k) std::swap(m[c * d + k], m[piv * d + k]);
    std::swap(r[c], r[piv]);
    for (int rr = c + 1; rr < d; ++rr) {
      const long double f = m[rr * d + c] / m[c * d + c];
      for (int k = c; k < d; ++k) m[rr * d + k] -= f * m[c * d + k];
      r[rr] -= f * r[c];
    }
  }
  std::vector<double> beta(d);
  for (int rc = d - 1; rc >= 0; --rc) {
    long double acc = r[rc];
    for (int k = rc + 1; k < d; ++k) acc -= m[rc * d + k] * beta[k];
    beta[rc] = static_cast<double>(acc / m[rc * d + rc]);
  }
  return beta;
}

// |N(0,1)| quantile at 0.95, i.e. the 0.975 standard normal quantile.
inline constexpr double kAbsNormalQ95 = 1.9599639845400545;

}  // namespace oracle
