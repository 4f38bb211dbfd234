#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "deconvband/charfn.hpp"
#include "deconvband/sample.hpp"

namespace deconvband {

// Deconvolution kernel table on the uniform frequency lattice t_k = k*delta
// covering [-1, 1] (the support of the kernel transform). Only the
// non-negative half is stored; the ratio is Hermitian because every error CF
// here satisfies phi(-t) = conj(phi(t)), so values at -t_k are conjugates.
//
// ratio[k] = phi_K(t_k) / phi_eps~(t_k / h), with the modulus floor applied.
// sq_transform[l] is the discrete self-convolution of the weighted ratio:
// the exact frequency representation of the *squared* discrete kernel on the
// doubled lattice s_l = l*delta, l = 0..2K. Sums of c_j * Khat^2 evaluate
// against it without materializing per-observation kernel values.
struct DeconvTable {
  double h = 0.0;
  int n_nodes = 0;  // full lattice size on [-1, 1]; odd
  double delta = 0.0;
  FrequencyGrid grid;  // half grid on [0, 1], even_symmetric
  std::vector<std::complex<double>> ratio;         // size K + 1
  std::vector<std::complex<double>> sq_transform;  // size 2K + 1
  CfKind cf_kind = CfKind::constant_one;
  double trunc_floor = 0.0;
  int truncated_nodes = 0;  // over the stored half lattice

  int half_count() const { return static_cast<int>(ratio.size()) - 1; }
};

// trunc_floor < 0 selects the default policy: m^{-1/2} for empirical error
// CFs, no floor for analytic kinds. n_nodes is rounded up to odd.
DeconvTable build_table(const CharFnTable& cf_eps, const KernelSpec& spec,
                        double h, int n_nodes, double trunc_floor = -1.0);

// Khat_n(u) = (1/2pi) integral over [-1,1] of e^{-itu} ratio(t) dt,
// evaluated with the table's trapezoidal rule. Real by Hermitian pairing.
double kernel_at(const DeconvTable& tbl, double u);

// Weighted empirical CFs of the sample at the lattice frequencies t_k / h:
// psi_1 = (1/n) sum_j e^{i t_k W_j / h}, psi_y likewise weighted by Y_j.
struct WeightedEcf {
  FrequencyGrid grid;  // the table's half grid
  std::vector<std::complex<double>> psi_y;
  std::vector<std::complex<double>> psi_1;
};

WeightedEcf weighted_ecf(const Sample& s, const DeconvTable& tbl);

// S0(x) = (1/n) sum_j Khat((x-W_j)/h), S1(x) likewise weighted by Y_j,
// aggregated in the frequency domain.
struct KernelSums {
  std::vector<double> s0;
  std::vector<double> s1;
};

KernelSums kernel_sums(const Sample& s, const DeconvTable& tbl,
                       std::span<const double> x_grid);

// (1/n) sum_j c_j Khat^2((x-W_j)/h) for c = 1, Y, Y^2 via sq_transform.
// Identical (to rounding) to squaring per-observation kernel values.
struct SquaredKernelSums {
  std::vector<double> one;
  std::vector<double> y;
  std::vector<double> yy;
};

SquaredKernelSums squared_kernel_sums(const Sample& s, const DeconvTable& tbl,
                                      std::span<const double> x_grid);

struct AllKernelSums {
  KernelSums lin;
  SquaredKernelSums sq;
};

// Single pass over the sample for both aggregates.
AllKernelSums all_kernel_sums(const Sample& s, const DeconvTable& tbl,
                              std::span<const double> x_grid);

// Per-observation kernel values Khat((x_i - w_j)/h), the stream behind the
// bootstrap, the variance check and the zero-sum diagnostic.
struct KernelMatrix {
  std::size_t rows = 0;  // grid points
  std::size_t cols = 0;  // observations
  std::vector<double> values;  // row-major

  double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
  const double* row(std::size_t i) const { return values.data() + i * cols; }
};

KernelMatrix kernel_matrix(const DeconvTable& tbl, std::span<const double> w,
                           std::span<const double> x_grid, int threads = 1);

std::vector<double> kernel_row(const DeconvTable& tbl, std::span<const double> w,
                               double x);

// Relative mismatch between (1/h) int Khat^2(u) du (Simpson in u) and
// (1/(2 pi h)) int |ratio(t)|^2 dt (lattice rule in t). Guards the inversion.
double plancherel_residual(const DeconvTable& tbl);

}  // namespace deconvband
