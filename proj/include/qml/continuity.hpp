#pragma once

#include "qml/spectral.hpp"

namespace qml {

struct RelErrReport {
  double delta_rho_sigma = 0.0;  // delta_R(rho, sigma)
  double delta_sigma_rho = 0.0;  // delta_R(sigma, rho)
  double lambda_min_rho = 0.0;
  double log_gap = 0.0;  // ||log sigma - log rho||
  double bound = 0.0;    // continuity bound evaluated at eps, lambda_min
};

// delta_R(rho, sigma) = sup_psi |<psi|rho - sigma|psi>| / <psi|rho|psi>,
// evaluated exactly as the largest-magnitude eigenvalue of
// rho^{-1/2} (sigma - rho) rho^{-1/2}.
double relative_error(const DenseOperator& rho, const DenseOperator& sigma);

// eps [ (4 log(2/lam)/pi) log(e log(2/lam)/(2 pi)) + 23 ], for eps <= 1/2.
double continuity_bound(double eps, double lambda_min);

// ||log sigma - log rho|| for positive definite inputs.
double log_gap(const DenseOperator& rho, const DenseOperator& sigma);

// Complete report for a PD pair (eps = max of the two relative errors).
RelErrReport continuity_report(const DenseOperator& rho,
                               const DenseOperator& sigma);

// Directional derivative of the operator logarithm:
// d/dx log(rho + x Delta) at x = 0, via the divided-difference kernel
// (log a - log b)/(a - b) in rho's eigenbasis.
DenseOperator log_derivative_oracle(const DenseOperator& rho,
                                    const DenseOperator& delta);

}  // namespace qml
