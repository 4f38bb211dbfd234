#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "deconvband/charfn.hpp"
#include "deconvband/deconv.hpp"
#include "deconvband/sample.hpp"

namespace deconvband {

// Polynomial regression under errors-in-variables: the moment system
// M g = r with M[p][q] = E[X^{p+q}] and r[p] = E[Y X^p], where latent-X
// moments come from the binomial deconvolution recursion
//   E[X^k] = E_n[W^k] - sum_{q<k} C(k,q) E[X^q] E_m[eps^{k-q}]
// (eta is mean-centered first) and E[Y X^k] analogously from E_n[Y W^k].
// The solve runs on standardized W for conditioning; reported tables and
// coefficients are in raw units.
struct PilotFit {
  std::vector<double> coef;         // raw-basis polynomial, degree = coef.size()-1
  std::vector<double> x_moments;    // corrected E[X^k], k = 0..2*degree
  std::vector<double> eps_moments;  // E_m[eta_c^r], r = 0..2*degree

  double eval(double x) const;
  int degree() const { return static_cast<int>(coef.size()) - 1; }
};

PilotFit pilot_eiv_polyfit(const Sample& s, int degree);

// sup_I Ahat^2(.; h) and sup_I shat^2(.; h)/n with the Ahat^2 subtraction,
// evaluated over x_grid with the pilot as the working regression function.
struct SelectorCriteria {
  double sup_a2 = 0.0;
  double sup_s2_over_n = 0.0;
};

SelectorCriteria selector_criteria(const Sample& s, const PilotFit& fit,
                                   const DeconvTable& tbl,
                                   std::span<const double> x_grid);

// Forward-pass monotonization: running max for the bias differences,
// running min for the variance differences.
std::pair<std::vector<double>, std::vector<double>> monotonize(
    std::span<const double> delta_a, std::span<const double> delta_s);

// First 0-based index into the (monotonized) difference sequences with
// cn * delta_a >= -delta_s; -1 when none crosses. Index i corresponds to the
// candidate j = i + 2 in 1-based grid numbering.
int select_index(std::span<const double> mono_a, std::span<const double> mono_s,
                 double cn);

struct BandwidthConfig {
  std::vector<double> grid;  // empty: geometric default from the data
  double cn_exponent = 0.3;  // c_n = (n/100)^exponent
  int pilot_degree = 3;
  std::vector<double> x_grid;  // evaluation interval I, required
  KernelSpec kernel;
  int n_nodes = 2049;
  double trunc_floor = -1.0;  // auto
  int threads = 1;
  int default_grid_size = 20;

  void validate() const;
};

// J-point geometric grid on [0.2 sd(W) (n/100)^{-1/2}, 1.5 sd(W)].
std::vector<double> default_bandwidth_grid(const Sample& s, int grid_size);

struct SelectionTrace {
  std::vector<double> h_grid;
  std::vector<double> sup_a2;
  std::vector<double> sup_s2_over_n;
  std::vector<double> delta_a2_raw;
  std::vector<double> delta_s2_raw;
  std::vector<double> delta_a2_mono;
  std::vector<double> delta_s2_mono;
  int selected_j = 0;  // 1-based index into h_grid
  double selected_h = 0.0;
  double cn = 0.0;
  double cn_exponent = 0.0;
  bool no_crossing = false;
  int pilot_degree = 0;
  std::vector<double> pilot_coef;
};

std::string trace_to_json(const SelectionTrace& trace);

struct SelectionResult {
  double h = 0.0;
  SelectionTrace trace;
};

SelectionResult select_bandwidth(const Sample& s, const BandwidthConfig& cfg);

}  // namespace deconvband
