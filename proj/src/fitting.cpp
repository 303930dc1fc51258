#include "qml/fitting.hpp"

#include <cmath>

#include "qml/error.hpp"

namespace qml {

LinearFit fit_linear(const std::vector<double>& x,
                     const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw Error("fit-failure", "need at least two points");
  double n = double(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t k = 0; k < x.size(); ++k) {
    sx += x[k];
    sy += y[k];
    sxx += x[k] * x[k];
    sxy += x[k] * y[k];
  }
  double det = n * sxx - sx * sx;
  if (std::abs(det) < 1e-30) throw Error("fit-failure", "degenerate abscissae");
  LinearFit f;
  f.slope = (n * sxy - sx * sy) / det;
  f.intercept = (sy - f.slope * sx) / n;
  double ssr = 0, sst = 0, mean = sy / n;
  for (size_t k = 0; k < x.size(); ++k) {
    double r = y[k] - (f.intercept + f.slope * x[k]);
    ssr += r * r;
    sst += (y[k] - mean) * (y[k] - mean);
  }
  f.r_squared = sst > 0 ? 1.0 - ssr / sst : 1.0;
  f.residual = std::sqrt(ssr / n);
  f.n_points = static_cast<int>(x.size());
  return f;
}

ExpFit fit_exponential(const std::vector<double>& x,
                       const std::vector<double>& y, double floor) {
  std::vector<double> xs, ls;
  for (size_t k = 0; k < x.size(); ++k)
    if (y[k] > floor) {
      xs.push_back(x[k]);
      ls.push_back(std::log(y[k]));
    }
  LinearFit lin = fit_linear(xs, ls);
  ExpFit f;
  f.amplitude = std::exp(lin.intercept);
  f.rate = lin.slope;
  f.r_squared = lin.r_squared;
  f.residual = lin.residual;
  f.n_points = lin.n_points;
  return f;
}

double lambert_w(double x) {
  if (x < 0) throw Error("fit-failure", "lambert_w needs x >= 0");
  if (x == 0) return 0.0;
  double w = x < M_E ? x / M_E : std::log(x) - std::log(std::max(1.0, std::log(x)));
  for (int it = 0; it < 64; ++it) {
    double ew = std::exp(w);
    double f = w * ew - x;
    double step = f / (ew * (w + 1.0) - f * (w + 2.0) / (2.0 * w + 2.0));
    w -= step;
    if (std::abs(step) < 1e-14 * (1.0 + std::abs(w))) break;
  }
  return w;
}

}  // namespace qml
