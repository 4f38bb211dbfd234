#pragma once

#include <complex>
#include <span>
#include <vector>

namespace deconvband {

// Frequency grid with trapezoidal quadrature weights. Two layouts are used:
// a full grid symmetric about 0, or the non-negative half with
// even_symmetric set, standing for the mirror extension (values at -t are
// recovered by conjugation).
struct FrequencyGrid {
  std::vector<double> nodes;
  std::vector<double> weights;
  bool even_symmetric = false;

  static FrequencyGrid uniform(double lo, double hi, int n);
  // Non-negative half of a symmetric lattice on [-extent, extent] with
  // full_nodes points (rounded up to odd so t = 0 is a node).
  static FrequencyGrid symmetric_half(double extent, int full_nodes);

  void validate() const;
};

enum class CfKind { empirical, analytic_laplace, analytic_product, constant_one };

// Flat-top kernel parameters: Fourier transform is 1 on [-c, c], 0 outside
// (-1, 1), and a smooth bump in between.
struct KernelSpec {
  double b = 1.0;
  double c = 0.05;

  void validate() const;
};

double flat_top_cf(const KernelSpec& spec, double t);

// Characteristic function tabulated on a grid. The table also carries its
// generator (eta draws or the analytic scale), so values at frequencies off
// the grid are re-evaluated exactly rather than interpolated.
struct CharFnTable {
  FrequencyGrid grid;
  std::vector<std::complex<double>> values;
  CfKind kind = CfKind::constant_one;

  std::vector<double> eta;  // empirical generator
  double scale = 0.0;       // laplace scale / averaged-pair component scale

  std::size_t error_sample_size() const { return eta.size(); }

  // Exact (untruncated) evaluation at an arbitrary frequency.
  std::complex<double> eval(double t) const;
  // Exact evaluation on the lattice t = k*step, k = 0..count-1. For the
  // empirical kind this runs per-observation phasor recurrences instead of
  // count*m complex exponentials.
  std::vector<std::complex<double>> eval_lattice(double step, int count) const;
};

CharFnTable empirical_cf(std::span<const double> eta, FrequencyGrid grid);
CharFnTable laplace_cf(double scale, FrequencyGrid grid);
CharFnTable averaged_pair_cf(double component_scale, FrequencyGrid grid);
CharFnTable constant_one_cf(FrequencyGrid grid);
// Convenience overloads on a default half grid.
CharFnTable laplace_cf(double scale);
CharFnTable averaged_pair_cf(double component_scale);
CharFnTable constant_one_cf();

// Values with modulus below the floor are rescaled to modulus exactly floor,
// preserving phase (zeros become floor + 0i). modified, when non-null,
// receives the number of changed nodes. The generator is left untouched.
CharFnTable truncate_cf(const CharFnTable& cf, double floor_value,
                        int* modified = nullptr);

// Phase-preserving modulus floor for a single value.
std::complex<double> apply_modulus_floor(std::complex<double> z, double floor_value);

}  // namespace deconvband
