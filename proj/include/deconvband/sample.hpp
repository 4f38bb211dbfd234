#pragma once

#include <cstddef>
#include <vector>

namespace deconvband {

// Observed data: responses y, contaminated predictors w (same units as the
// latent predictor), and an auxiliary sample eta from the measurement-error
// distribution. eta need not be independent of (y, w) and may have its own
// length m != n.
struct Sample {
  std::vector<double> y;
  std::vector<double> w;
  std::vector<double> eta;

  std::size_t n() const { return y.size(); }
  std::size_t m() const { return eta.size(); }

  // Shape/finiteness only; length-1 vectors are allowed for the pure
  // transforms below.
  void validate_shape() const;
  // Estimation entry points additionally require n >= 2 and m >= 2.
  void validate_for_estimation() const;
};

// Two noisy measurements of the same latent predictor per unit.
struct RepeatedMeasurements {
  std::vector<double> y;
  std::vector<double> w1;
  std::vector<double> w2;

  void validate() const;
};

// Half-sum / half-difference transform: w = (w1+w2)/2, eta = (w1-w2)/2.
Sample from_repeated(const RepeatedMeasurements& rm);

// Validation-data transform: eta_i = w_val_i - x_val_i, (y, w) pass through.
Sample from_validation(std::vector<double> y, std::vector<double> w,
                       const std::vector<double>& x_val,
                       const std::vector<double>& w_val);

struct CenteredSample {
  Sample sample;
  double mean_removed = 0.0;
};

// Replaces eta by eta - mean(eta) and reports the subtracted mean.
CenteredSample center_eta(const Sample& s);

}  // namespace deconvband
