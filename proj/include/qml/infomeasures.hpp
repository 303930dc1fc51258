#pragma once

#include "qml/spectral.hpp"

namespace qml {

struct Tripartition {
  Region a, b, c;

  // Throws unless A, B, C are pairwise disjoint (B may be empty).
  void validate() const;
  Region abc() const { return a.unite(b).unite(c); }
};

struct CmiRecord {
  Tripartition part;
  int dist = 0;           // d(A, C)
  double cmi = 0.0;       // nats
  double s_ab = 0.0, s_bc = 0.0, s_abc = 0.0, s_b = 0.0;
  double cross_check = 0.0;  // |entropy combination - (I(A:BC) - I(A:B))|
};

// von Neumann entropy in nats; eigenvalues below 1e-14 treated as zero.
double entropy(const DenseOperator& rho);

// tr[rho log rho - rho log sigma]; sigma must be positive definite.
double relative_entropy(const DenseOperator& rho, const DenseOperator& sigma);

double mutual_information(const DenseOperator& rho, const Region& a,
                          const Region& b);

CmiRecord cmi(const DenseOperator& rho, const Tripartition& part);

// H_rho(A:C|B) = -beta (H*_AB + H*_BC - H - H*_B) for an exhaustive
// tripartition of a Gibbs state, with beta H*_L = log rho_L and
// H*_{ABC} = H under the Z = 1 energy-origin shift.
// tr[rho_beta . result] equals the CMI.
DenseOperator cmi_hamiltonian(const DenseOperator& rho_beta, double beta,
                              const Tripartition& part);

struct SquashedBound {
  double half_cmi;       // (1/2) I(A:B|E), E the physical complement
  double sep_distance;   // 2 min(D_A, D_B) sqrt(2 I(A:B|E))
};
SquashedBound squashed_bound(const DenseOperator& rho_beta, const Region& a,
                             const Region& b);

// Wootters closed form; exactly two qubits.
double eof_two_qubit(const DenseOperator& rho_ab);
double concurrence_two_qubit(const DenseOperator& rho_ab);

enum class PetzVariant { Plain, Rotated };

struct PetzResult {
  DenseOperator state;    // candidate for rho_ABC, trace renormalized
  double trace_deviation;  // |tr - 1| before renormalization
};

// R_{B -> BC}(rho_AB) with R(X) = rho_BC^{1/2} rho_B^{-1/2} X rho_B^{-1/2}
// rho_BC^{1/2}; the rotated variant integrates the t-rotated family with the
// beta_0(t) = (pi/2)(cosh(pi t)+1)^{-1} weight on a tanh-sinh grid.
PetzResult petz_recover(const DenseOperator& rho, const Region& b,
                        const Region& c, PetzVariant variant = PetzVariant::Plain,
                        int t_nodes = 41);

}  // namespace qml
