#include "deconvband/sample.hpp"

#include <cmath>
#include <string>

#include "deconvband/errors.hpp"

namespace deconvband {

namespace {

void require_finite(const std::vector<double>& v, const char* name) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw input_error(std::string(name) + " contains a non-finite value");
    }
  }
}

}  // namespace

void Sample::validate_shape() const {
  if (y.size() != w.size()) {
    throw input_error("y and w must have equal length");
  }
  if (y.empty()) throw input_error("sample is empty");
  if (eta.empty()) throw input_error("eta is empty");
  require_finite(y, "y");
  require_finite(w, "w");
  require_finite(eta, "eta");
}

void Sample::validate_for_estimation() const {
  validate_shape();
  if (n() < 2) throw input_error("need at least 2 observations");
  if (m() < 2) throw input_error("need at least 2 error draws");
}

void RepeatedMeasurements::validate() const {
  if (y.size() != w1.size() || y.size() != w2.size()) {
    throw input_error("repeated measurements: y, w1, w2 must have equal length");
  }
  if (y.empty()) throw input_error("repeated measurements: empty input");
  require_finite(y, "y");
  require_finite(w1, "w1");
  require_finite(w2, "w2");
}

Sample from_repeated(const RepeatedMeasurements& rm) {
  rm.validate();
  const std::size_t n = rm.y.size();
  Sample s;
  s.y = rm.y;
  s.w.resize(n);
  s.eta.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    s.w[j] = (rm.w1[j] + rm.w2[j]) / 2.0;
    s.eta[j] = (rm.w1[j] - rm.w2[j]) / 2.0;
  }
  return s;
}

Sample from_validation(std::vector<double> y, std::vector<double> w,
                       const std::vector<double>& x_val,
                       const std::vector<double>& w_val) {
  if (y.size() != w.size()) {
    throw input_error("y and w must have equal length");
  }
  if (x_val.size() != w_val.size()) {
    throw input_error("validation columns must have equal length");
  }
  if (y.empty() || x_val.empty()) throw input_error("empty input");
  Sample s;
  s.y = std::move(y);
  s.w = std::move(w);
  s.eta.resize(x_val.size());
  for (std::size_t i = 0; i < x_val.size(); ++i) {
    s.eta[i] = w_val[i] - x_val[i];
  }
  s.validate_shape();
  return s;
}

CenteredSample center_eta(const Sample& s) {
  if (s.eta.empty()) throw input_error("eta is empty");
  double mean = 0.0;
  for (double e : s.eta) mean += e;
  mean /= static_cast<double>(s.eta.size());
  CenteredSample out;
  out.sample = s;
  out.mean_removed = mean;
  for (double& e : out.sample.eta) e -= mean;
  return out;
}

}  // namespace deconvband
