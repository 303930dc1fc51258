#pragma once

#include "qml/infomeasures.hpp"
#include "qml/spectral.hpp"

namespace qml {

struct ShotPlan {
  std::vector<Region> windows;
  long shots_per_basis = 0;  // per Pauli string
  unsigned long long seed = 0;
  bool exact = false;  // N -> infinity mode
};

// Per-window Pauli expectation estimates, indexed like PauliTable codes.
struct WindowEstimate {
  Region window;
  std::vector<double> expectation;  // <P> estimates, identity entry = 1
};

// Independent per-string sampling: each string's +-1 outcomes are drawn from
// its own shot budget; streams are keyed by (seed, window, string).
std::vector<WindowEstimate> sample_window_expectations(const DenseOperator& rho,
                                                       const ShotPlan& plan);

// rho~ = sum_P est_P P / D, projected to the PSD cone (eigenvalue clipping,
// then renormalization). Throws "degenerate-estimate" when nothing survives.
// A positive `floor` clips at that value instead of zero; the learning paths
// use a tiny floor so the operator logarithm stays finite at small N.
DenseOperator reconstruct_marginal(const WindowEstimate& est,
                                   double floor = 0.0);

struct LearnedLog {
  DenseOperator log_marginal;  // log(rho~)
  double error = 0.0;          // ||log rho~ - log rho_window||
  double lambda_min = 0.0;     // of the true window marginal
  double trace_dist = 0.0;     // ||rho~ - rho_window||_1
  double paper_bound = 0.0;    // 23 ||rho~ - rho|| / lambda_min^{3/2}
};

LearnedLog learn_entanglement_hamiltonian(const WindowEstimate& est,
                                          const DenseOperator& rho_window_true);

struct CouplingReport {
  Region support;
  double true_norm = 0.0;
  double est_norm = 0.0;
  double abs_err = 0.0;  // ||h_Z - h~_Z||
};

struct LearnReport {
  std::vector<CouplingReport> couplings;
  double max_err = 0.0;
  long shots = 0;
  int window_size = 0;
};

// Sliding-window learning on a 1D chain: reconstruct beta^{-1} log of each
// window marginal and read couplings off the central core; couplings too
// close to a traced-out window edge are excluded (chain ends are clean).
LearnReport learn_couplings_1d(const LocalHamiltonian& h_true, double beta,
                               const ShotPlan& plan,
                               double window_core_fraction);

}  // namespace qml
