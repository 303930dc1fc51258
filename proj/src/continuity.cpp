#include "qml/continuity.hpp"

#include <cmath>

namespace qml {

double relative_error(const DenseOperator& rho, const DenseOperator& sigma) {
  Spectrum sr = eigh(rho.mat);
  double lmin = sr.eigenvalues.minCoeff();
  if (lmin <= 1e-14)
    throw Error("not-positive-definite",
                "lambda_min = " + std::to_string(lmin));
  Vec inv_sqrt = sr.eigenvalues.cwiseSqrt().cwiseInverse();
  Mat r_mhalf =
      sr.eigenvectors * inv_sqrt.asDiagonal() * sr.eigenvectors.adjoint();
  Mat core = r_mhalf * (sigma.mat - rho.mat) * r_mhalf;
  core = ((core + core.adjoint()) / 2.0).eval();
  return eigh_values(core).cwiseAbs().maxCoeff();
}

double continuity_bound(double eps, double lambda_min) {
  if (eps < 0 || eps > 0.5) throw Error("out-of-regime", "eps must be in [0, 1/2]");
  if (lambda_min <= 0 || lambda_min > 1.0)
    throw Error("out-of-regime", "lambda_min must be in (0, 1]");
  double l = std::log(2.0 / lambda_min);
  return eps * ((4.0 * l / M_PI) * std::log(M_E * l / (2.0 * M_PI)) + 23.0);
}

double log_gap(const DenseOperator& rho, const DenseOperator& sigma) {
  DenseOperator lr = mat_fn(rho, MatFn::Log);
  DenseOperator ls = mat_fn(sigma, MatFn::Log);
  return op_norm(ls - lr);
}

RelErrReport continuity_report(const DenseOperator& rho,
                               const DenseOperator& sigma) {
  RelErrReport rep;
  rep.delta_rho_sigma = relative_error(rho, sigma);
  rep.delta_sigma_rho = relative_error(sigma, rho);
  rep.lambda_min_rho = eigh_values(rho.mat).minCoeff();
  rep.log_gap = log_gap(rho, sigma);
  double eps = std::max(rep.delta_rho_sigma, rep.delta_sigma_rho);
  rep.bound = eps <= 0.5 ? continuity_bound(eps, rep.lambda_min_rho)
                         : std::numeric_limits<double>::quiet_NaN();
  return rep;
}

DenseOperator log_derivative_oracle(const DenseOperator& rho,
                                    const DenseOperator& delta) {
  if (delta.herm_error() > 1e-10)
    throw Error("not-hermitian", "log_derivative_oracle");
  Spectrum sp = eigh(rho.mat);
  double lmin = sp.eigenvalues.minCoeff();
  if (lmin <= 1e-14)
    throw Error("not-positive-definite",
                "lambda_min = " + std::to_string(lmin));
  Mat d = sp.eigenvectors.adjoint() * delta.mat * sp.eigenvectors;
  long n = sp.eigenvalues.size();
  double scale = sp.eigenvalues.maxCoeff();
  for (long m = 0; m < n; ++m)
    for (long k = 0; k < n; ++k) {
      double a = sp.eigenvalues[m], b = sp.eigenvalues[k];
      double kern;
      if (std::abs(a - b) < 1e-10 * scale) {
        // series around the midpoint avoids catastrophic cancellation
        double mid = 0.5 * (a + b), half = 0.5 * (a - b);
        double q = half / mid;
        kern = (1.0 + q * q / 3.0 + q * q * q * q / 5.0) / mid;
      } else {
        kern = (std::log(a) - std::log(b)) / (a - b);
      }
      d(m, k) *= kern;
    }
  Mat out = sp.eigenvectors * d * sp.eigenvectors.adjoint();
  return {rho.sites, rho.dims, std::move(out)};
}

}  // namespace qml
