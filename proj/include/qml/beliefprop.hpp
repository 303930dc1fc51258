#pragma once

#include <optional>

#include "qml/spectral.hpp"

namespace qml {

// Quadrature controls for the filter-function time integrals.
struct QuadSpec {
  double abs_tol = 1e-10;
  int node_budget = 60000;
  double t_max = 0.0;  // 0 = choose from the analytic tail bound
};

enum class FilterKind { F, G };

struct FilterSpec {
  double beta;
  FilterKind kind;
  QuadSpec quad;
};

// f_beta(t) = (2/(beta pi)) log((e^{pi|t|/beta}+1)/(e^{pi|t|/beta}-1));
// g_beta(t) = -sign(t) e^{-2 pi |t|/beta} / (1 - e^{-2 pi |t|/beta}).
// g diverges at t = 0 ("singular-point").
double filter_eval(const FilterSpec& spec, double t);

// phi_{B,tau} = (beta/2) Int f_beta(t) B(A_tau, t) dt with A_tau = A + tau B.
// One eigendecomposition of A_tau; the time integral runs in its eigenbasis,
// split at t = beta/pi with a log substitution on the singular side.
DenseOperator bp_generator(const DenseOperator& a, const DenseOperator& b,
                           double tau, double beta, const QuadSpec& quad = {});

// Hastings form: beta B/2 + i Int g_beta(t) B(A_tau, t) dt, with the g
// integral always symmetrized over t > 0.
DenseOperator bp_generator_hastings(const DenseOperator& a,
                                    const DenseOperator& b, double tau,
                                    double beta, const QuadSpec& quad = {});

// Symmetrized g transform: (2/beta) Int g_beta(t) B(H, t) dt. Shared with the
// effective-Hamiltonian ODE.
Mat g_filter_transform(const Spectrum& h_eig, const Mat& b, double beta,
                       const QuadSpec& quad = {});

struct BpOperator {
  DenseOperator matrix;  // Phi
  DenseOperator a, b;    // the split it was built for
  double beta = 0.0;
  int n_tau_steps = 0;
  std::vector<DenseOperator> generator_trace;  // phi at tau midpoints
  double residual = 0.0;  // ||Phi e^{bA} Phi+ - e^{b(A+B)}|| / ||e^{b(A+B)}||
};

// Midpoint-rule ordered product over the tau grid (n_steps >= 16).
BpOperator bp_operator(const DenseOperator& a, const DenseOperator& b,
                       double beta, int n_steps, const QuadSpec& quad = {},
                       bool keep_trace = false);

struct BpTruncation {
  BpOperator truncated;   // Phi~^{(r)}
  Region support;         // (boundary L)[r]
  double generator_error; // max_tau ||phi - phi~||
  double state_error;     // ||e^{bH} - Phi~ e^{b(H_L+H_Lc)} Phi~+||_1 / Z
  double paper_bound;     // 13 phibar e^{2 beta ||dh_L|| - kappa_beta r}, soft
};

// Truncate the stored generators onto (boundary L)[r] with the normalized
// partial trace and rebuild the ordered product. lr_c/lr_v are fitted
// Lieb-Robinson constants used only inside the reported soft bound.
BpTruncation bp_truncate(const BpOperator& phi, const LocalHamiltonian& h,
                         const Region& l, int r, double lr_c, double lr_v);

struct BpLogError {
  double measured;   // ||log(Phi e^{bA} Phi+) - log(Phi~ e^{bA} Phi~+)||
  double predicted;  // 3 N (beta nu1 + 1) e^{beta nu2} delta
};

BpLogError bp_log_error(const DenseOperator& a, const DenseOperator& b,
                        const BpOperator& phi, const BpOperator& phi_trunc);

// kappa_beta = min(pi mu / (2 v beta), mu / 4).
double kappa_beta(double mu, double v, double beta);

// phibar_{beta,|dL|} from the truncated-BP error lemma; reporting only.
double phibar_bound(double beta, double gamma, double jtilde0, int boundary_size,
                    double mu, double lr_c, double lr_v, int spatial_dim);

// Jtilde_0 = Jbar0 gamma e^mu (2/mu)^D D! / (e^{mu/2} - 1).
double jtilde0(double jbar0, double gamma, double mu, int spatial_dim);

}  // namespace qml
