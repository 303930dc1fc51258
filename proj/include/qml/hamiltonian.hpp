#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "qml/lattice.hpp"

namespace qml {

using Mat = Eigen::MatrixXcd;

// One interaction term h_Z: Hermitian block on an ordered support.
struct LocalTerm {
  Region support;
  Mat block;

  double norm() const;  // operator norm
};

struct DecayMeta {
  double Jbar0 = 0.0;  // per-site interaction strength bound
  double mu = 0.0;     // decay rate; +inf means strictly nearest-neighbor
  int k = 0;           // max support diameter (0 = on-site only)
};

// H = sum_Z h_Z with verified decay metadata.
class LocalHamiltonian {
 public:
  LocalHamiltonian(Lattice lattice, std::vector<LocalTerm> terms,
                   DecayMeta meta);

  const Lattice& lattice() const { return lattice_; }
  const std::vector<LocalTerm>& terms() const { return terms_; }
  const DecayMeta& meta() const { return meta_; }

  // max_i sum_{Z contains i} ||h_Z||
  double per_site_strength() const;

 private:
  Lattice lattice_;
  std::vector<LocalTerm> terms_;
  DecayMeta meta_;
};

// H = J sum ZZ + g sum X  (Gibbs weight is e^{+beta H}; negate couplings for
// the physical sign convention).
LocalHamiltonian build_tfim(const Lattice& lat, double J, double g);

// H = J sum (XX + YY + ZZ) + h sum Z, one block per bond.
LocalHamiltonian build_heisenberg(const Lattice& lat, double J, double h);

// Random two-site couplings with |h_{ii'}| <= Jbar0 e^{-mu d}, rescaled so the
// per-site budget holds. mu = +inf restricts to nearest-neighbor pairs.
LocalHamiltonian build_random_expdecay(const Lattice& lat, double Jbar0,
                                       double mu, unsigned long long seed);

// Caller-supplied terms checked against the declared decay; throws
// "decay-violation" if the budget or pair bound fails.
LocalHamiltonian build_custom(const Lattice& lat, std::vector<LocalTerm> terms,
                              DecayMeta declared);

// Terms with support inside L.
LocalHamiltonian subset_hamiltonian(const LocalHamiltonian& h, const Region& l);

// dh_L = H - H_L - H_{L^c}: exactly the terms straddling L and its complement.
LocalHamiltonian boundary_interaction(const LocalHamiltonian& h,
                                      const Region& l);

struct InteractionSum {
  double measured;  // sum of ||h_Z|| over terms meeting both X and Y
  double bound;     // |X| |Y| Jbar0 e^{-mu d(X,Y)}
};

InteractionSum interaction_sum(const LocalHamiltonian& h, const Region& x,
                               const Region& y);

}  // namespace qml
