#pragma once

#include <Eigen/Dense>
#include <complex>
#include <map>
#include <string>
#include <vector>

#include "qml/hamiltonian.hpp"
#include "qml/lattice.hpp"

namespace qml {

using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;

// Dense dimension cap. Default 2^12; configurable up to 2^16.
long dense_cap();
void set_dense_cap(long cap);

// Labeled complex matrix on the tensor product Hilbert space of `sites`
// (site-index-major ordering: lowest site id = leftmost factor).
struct DenseOperator {
  Region sites;
  std::vector<int> dims;  // one entry per site, same order as sites
  Mat mat;

  long dimension() const { return mat.rows(); }
  DenseOperator adjoint() const { return {sites, dims, mat.adjoint()}; }
  std::complex<double> trace() const { return mat.trace(); }
  // max-entry deviation from Hermiticity, relative to the largest entry
  double herm_error() const;

  DenseOperator operator+(const DenseOperator& o) const;
  DenseOperator operator-(const DenseOperator& o) const;
  DenseOperator operator*(const DenseOperator& o) const;
  DenseOperator operator*(std::complex<double> c) const;
};

DenseOperator identity_op(const Region& sites, const std::vector<int>& dims);

// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
// LAPACK backs dimensions >= 256 when available.
struct Spectrum {
  Vec eigenvalues;
  Mat eigenvectors;
};
Spectrum eigh(const Mat& m);
Vec eigh_values(const Mat& m);
Eigen::VectorXd singular_values(const Mat& m);

double op_norm(const Mat& m);
double op_norm(const DenseOperator& o);
double trace_norm(const Mat& m);
double trace_norm(const DenseOperator& o);

// term (x) identity on the rest of the lattice.
DenseOperator embed(const LocalTerm& term, const Lattice& lat);
// Re-embed an operator onto a superset of its sites.
DenseOperator embed_to(const DenseOperator& op, const Region& sites,
                       const std::vector<int>& dims);
DenseOperator to_dense(const LocalHamiltonian& h);
// Dense form on the tensor space of `region` alone; every term must be
// supported inside it.
DenseOperator to_dense_on(const LocalHamiltonian& h, const Region& region);

// rho_beta = e^{beta H}/Z (paper sign convention), computed with a spectral
// shift so large beta cannot overflow. Trace is exactly 1 after normalization.
DenseOperator gibbs_state(const LocalHamiltonian& h, double beta);
DenseOperator gibbs_state(const DenseOperator& hdense, double beta);

enum class MatFn { Exp, Log, Sqrt, InvSqrt, Power };
// Spectral application of fn; Log/Sqrt/InvSqrt require positive definite
// input (lambda_min > 1e-14) and throw "not-positive-definite" otherwise.
DenseOperator mat_fn(const DenseOperator& op, MatFn fn, double power = 0.0);

// O(H,t) = e^{iHt} O e^{-iHt}
DenseOperator time_evolve(const DenseOperator& op, const DenseOperator& h,
                          double t);

struct ImagConjugate {
  DenseOperator op;  // e^{-tau H} O e^{tau H}
  double norm;
};
ImagConjugate imaginary_conjugate(const DenseOperator& op,
                                  const DenseOperator& h, double tau);

// Trace out the sites in `traced`; trace-preserving; 1x1 scalar when
// everything is traced.
DenseOperator partial_trace(const DenseOperator& op, const Region& traced);
// Reduced state on `keep` (complement of keep is traced out).
DenseOperator reduce_to(const DenseOperator& op, const Region& keep);

// tr~_X(O) = tr_X(O)/tr_X(1), re-embedded on the original site list.
DenseOperator normalized_partial_trace(const DenseOperator& op,
                                       const Region& x);

// Pauli-string coefficients c_P = tr(P O)/D for qubit operators.
// Codes are base-4 over sites in ascending order (site order = digit order,
// first site most significant), digit 0=I 1=X 2=Y 3=Z.
struct PauliTable {
  Region sites;
  std::vector<std::complex<double>> coeff;  // length 4^n

  std::string label(long code) const;
  std::complex<double> operator[](long code) const { return coeff[code]; }
  std::map<std::string, std::complex<double>> to_map(double threshold) const;
};
PauliTable pauli_decompose(const DenseOperator& op);
DenseOperator pauli_reconstruct(const PauliTable& table,
                                const std::vector<int>& dims);

// Measured Lieb-Robinson data: max commutator norm over random unit-norm
// operator pairs, per time point, at fixed separation.
struct LrRow {
  double t;
  int dist;
  double value;
};
std::vector<LrRow> lieb_robinson_profile(const LocalHamiltonian& h,
                                         const Region& x, const Region& y,
                                         const std::vector<double>& t_grid,
                                         int n_samples,
                                         unsigned long long seed);

// Least-squares fit of C (e^{v|t|} - 1) e^{-mu d} on log data.
struct LrFit {
  double C, v, mu_hat;
  double residual;
};
LrFit fit_lieb_robinson(const std::vector<LrRow>& rows);

}  // namespace qml
