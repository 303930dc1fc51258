#pragma once

#include <vector>

namespace qml {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double residual = 0.0;  // rms in y
  int n_points = 0;
};

LinearFit fit_linear(const std::vector<double>& x, const std::vector<double>& y);

// Fit y ~ amplitude * exp(rate * x) on log(y); points with y <= floor are
// dropped first.
struct ExpFit {
  double amplitude = 0.0;
  double rate = 0.0;
  double r_squared = 0.0;
  double residual = 0.0;
  int n_points = 0;
};

ExpFit fit_exponential(const std::vector<double>& x,
                       const std::vector<double>& y, double floor = 1e-13);

// Principal branch of the Lambert W function for x >= 0.
double lambert_w(double x);

}  // namespace qml
