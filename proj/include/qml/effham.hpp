#pragma once

#include "qml/beliefprop.hpp"
#include "qml/spectral.hpp"

namespace qml {

// State of the effective-Hamiltonian flow log(e^{tau V} e^{beta A} e^{tau V})
//   = U_tau (beta A + V_tau) U_tau^dagger,
//   dU/dtau = -i C_tau U,  dV_tau/dtau = 2 U^dagger V U,
//   C_tau = (2/beta) Int g_beta(t) V(G_tau / beta, t) dt,
// where G_tau = U (beta A + V_tau) U^dagger is the running logarithm. The
// evolution inside C runs under G_tau / beta (the operator standing where A
// stands in e^{beta A}); this is fixed by the single-step form
// log(e^{eps V} e^{beta A} e^{eps V}) = beta e^{-2i eps C} A e^{2i eps C}
// + 2 eps V + O(eps^2) and validated against the dense-log oracle.
struct EffLogState {
  DenseOperator u;      // unitary to 1e-9
  DenseOperator v_hat;  // Hermitian
  double tau = 0.0;
  std::vector<double> c_norm_history;  // per-step ||C_tau||, optional
};

struct ConnectedLogResult {
  EffLogState state;
  double reconstruction_error;  // vs the dense-log oracle at tau_max
  DenseOperator log_oracle;     // log(e^{tau V} e^{beta A} e^{tau V})
};

struct EntanglementHamiltonian {
  DenseOperator h_star;  // (1/beta) log rho_L, as an operator on L
  DenseOperator v_star;  // effective boundary interaction H*_L - H_L
};

// Throws "not-positive-definite" when the marginal is rank deficient.
EntanglementHamiltonian entanglement_hamiltonian(const DenseOperator& rho,
                                                 const LocalHamiltonian& h,
                                                 const Region& l, double beta);

// Explicit-midpoint integration with polar re-unitarization of U every 32
// steps. Throws "ode-diverged" when the endpoint misses `recon_tol`.
ConnectedLogResult connected_log_ode(
    const DenseOperator& a, const DenseOperator& v, double beta, double tau_max,
    int n_steps, const QuadSpec& quad = {}, bool keep_history = false,
    double recon_tol = std::numeric_limits<double>::infinity());

struct TruncatedLogResult {
  int radius;
  double u_error;    // ||U_tau - U_{tau, L[r]}||
  double log_error;  // ||log(...) - U_r (beta H0 + V_r) U_r^dagger||
};

// Rerun the flow with the subset Hamiltonian on center[r] and compare.
TruncatedLogResult truncated_connected_log(const LocalHamiltonian& h0,
                                           const DenseOperator& v,
                                           const Region& center, int r,
                                           double beta, double tau_max,
                                           int n_steps,
                                           const QuadSpec& quad = {});

// Partial-trace projection onto the maximally entangled state with an
// ancilla copy of L. Ancilla site ids are n_sites + index-in-L.
struct PtpOperators {
  Region l;
  Region ancilla;
  CVec p_state;         // |P_L> on L u L_a
  DenseOperator p;      // rank-1 projector, embedded on Lambda u L_a
  DenseOperator q;      // 1 - P
  double identity_error;  // || e^{-tau Q} - (P + e^{-tau} Q) || at tau = 1

  DenseOperator p_tau(double tau) const;  // P + e^{-tau} Q
};

PtpOperators ptp_build(const Lattice& lat, const Region& l);

struct PtpError {
  double raw;         // ||P_tau rho' P_tau - P rho' P||_1
  double raw_bound;   // 2 e^{-tau}
  double normalized;  // ||P_tau rho' P_tau / tr - rho_{L^c} x P||_1
  double normalized_bound;  // 4 D_L e^{-tau}
};

// rho is a state on Lambda; the ancilla is appended in its maximally mixed
// state so the lifted operator keeps unit trace (the bound's premise).
PtpError ptp_error(const PtpOperators& ptp, const DenseOperator& rho,
                   double tau);

struct LocalityProfile {
  Region center;
  std::vector<int> radii;
  std::vector<double> values;  // || O - tr~_{center[r]^c} O || per radius
  double fit_amplitude = 0.0;
  double fit_rate = 0.0;  // +inf flags an all-zero profile
  double fit_residual = 0.0;
};

LocalityProfile locality_profile(const DenseOperator& op, const Lattice& lat,
                                 const Region& center,
                                 const std::vector<int>& radii);

// Randomized cross-check: sup over 64 Haar single-site unitaries outside
// center[r] of ||[O, u_i]||.
std::vector<double> locality_profile_randomized(const DenseOperator& op,
                                                const Lattice& lat,
                                                const Region& center,
                                                const std::vector<int>& radii,
                                                int n_unitaries,
                                                unsigned long long seed);

struct ImagLocalityRow {
  int radius;
  double value;  // ||e^{-bH/2} (O(t) - tr~ O(t)) e^{bH/2}||
  double shape;  // min(1, e^{-mu r / 3 + v t}), amplitude-free reference
};

std::vector<ImagLocalityRow> imaginary_locality_profile(
    const LocalHamiltonian& h, const DenseOperator& o_x, const Region& x,
    double beta, double t, const std::vector<int>& radii, double lr_v);

}  // namespace qml
