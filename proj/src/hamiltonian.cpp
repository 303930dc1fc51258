#include "qml/hamiltonian.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>
#include <unsupported/Eigen/KroneckerProduct>

namespace qml {

namespace {

const double kHermTol = 1e-12;

Mat pauli(char p) {
  Mat m(2, 2);
  switch (p) {
    case 'I': m << 1, 0, 0, 1; break;
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, std::complex<double>(0, -1), std::complex<double>(0, 1), 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default: throw Error("bad-pauli", std::string(1, p));
  }
  return m;
}

double pair_bound(const DecayMeta& m, int d) {
  if (std::isinf(m.mu)) return d <= 1 ? m.Jbar0 : 0.0;
  return m.Jbar0 * std::exp(-m.mu * d);
}

int support_diameter(const Lattice& lat, const Region& s) {
  int d = 0;
  for (int a : s)
    for (int b : s) d = std::max(d, lat.distance(a, b));
  return d;
}

}  // namespace

double LocalTerm::norm() const {
  Eigen::SelfAdjointEigenSolver<Mat> es(block, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

LocalHamiltonian::LocalHamiltonian(Lattice lattice, std::vector<LocalTerm> terms,
                                   DecayMeta meta)
    : lattice_(std::move(lattice)), terms_(std::move(terms)), meta_(meta) {
  long dim_check = 1;
  for (const auto& t : terms_) {
    if (t.support.empty()) throw Error("empty-region", "term support");
    dim_check = 1;
    for (int s : t.support) dim_check *= lattice_.local_dim(s);
    if (t.block.rows() != dim_check || t.block.cols() != dim_check)
      throw Error("bad-term", "block dimension does not match support");
    double h = (t.block - t.block.adjoint()).cwiseAbs().maxCoeff();
    if (h > kHermTol) throw Error("not-hermitian", "term block");
    if (t.support.sites().back() >= lattice_.n_sites())
      throw Error("bad-region", "term support outside lattice");
  }
  // Verify the declared decay: per-site budget and per-pair bound.
  if (per_site_strength() > meta_.Jbar0 * (1 + 1e-9))
    throw Error("decay-violation", "per-site strength exceeds Jbar0");
  int n = lattice_.n_sites();
  std::vector<std::vector<double>> pair_sum(n, std::vector<double>(n, 0.0));
  for (const auto& t : terms_) {
    double nm = t.norm();
    for (int a : t.support)
      for (int b : t.support)
        if (a < b) pair_sum[a][b] += nm;
  }
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      double bound = pair_bound(meta_, lattice_.distance(a, b));
      if (pair_sum[a][b] > bound * (1 + 1e-9) + 1e-15)
        throw Error("decay-violation", "pair coupling exceeds Jbar_d");
    }
  if (meta_.k > 0)
    for (const auto& t : terms_)
      if (support_diameter(lattice_, t.support) > meta_.k)
        throw Error("decay-violation", "support diameter exceeds declared k");
}

double LocalHamiltonian::per_site_strength() const {
  std::vector<double> acc(lattice_.n_sites(), 0.0);
  for (const auto& t : terms_) {
    double nm = t.norm();
    for (int s : t.support) acc[s] += nm;
  }
  double m = 0;
  for (double v : acc) m = std::max(m, v);
  return m;
}

LocalHamiltonian build_tfim(const Lattice& lat, double J, double g) {
  std::vector<LocalTerm> terms;
  Mat zz = Eigen::kroneckerProduct(pauli('Z'), pauli('Z')).eval();
  for (auto [a, b] : lat.edges())
    terms.push_back({Region{std::min(a, b), std::max(a, b)}, J * zz});
  for (int i = 0; i < lat.n_sites(); ++i)
    terms.push_back({Region{i}, g * pauli('X')});
  double mu = 1.0;
  double degree = lat.geometry() == GeometryTag::Grid2d ? 4.0 : 2.0;
  double jbar = std::max(degree * std::abs(J) + std::abs(g),
                         std::abs(J) * std::exp(mu));
  return LocalHamiltonian(lat, std::move(terms), {jbar, mu, 1});
}

LocalHamiltonian build_heisenberg(const Lattice& lat, double J, double h) {
  std::vector<LocalTerm> terms;
  Mat ex = Eigen::kroneckerProduct(pauli('X'), pauli('X')).eval() +
           Eigen::kroneckerProduct(pauli('Y'), pauli('Y')).eval() +
           Eigen::kroneckerProduct(pauli('Z'), pauli('Z')).eval();
  for (auto [a, b] : lat.edges())
    terms.push_back({Region{std::min(a, b), std::max(a, b)}, J * ex});
  for (int i = 0; i < lat.n_sites(); ++i)
    terms.push_back({Region{i}, h * pauli('Z')});
  double mu = 1.0;
  double degree = lat.geometry() == GeometryTag::Grid2d ? 4.0 : 2.0;
  double jbar = std::max(degree * 3.0 * std::abs(J) + std::abs(h),
                         3.0 * std::abs(J) * std::exp(mu));
  return LocalHamiltonian(lat, std::move(terms), {jbar, mu, 1});
}

LocalHamiltonian build_random_expdecay(const Lattice& lat, double Jbar0,
                                       double mu, unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  int n = lat.n_sites();
  struct Draw {
    int a, b;
    Mat block;
    double norm;
  };
  std::vector<Draw> draws;
  DecayMeta meta{Jbar0, mu, 0};
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      int d = lat.distance(a, b);
      double cap = pair_bound(meta, d);
      if (cap <= 0) continue;
      int da = lat.local_dim(a), db = lat.local_dim(b);
      Mat x(da * db, da * db);
      for (int i = 0; i < x.rows(); ++i)
        for (int j = 0; j < x.cols(); ++j)
          x(i, j) = std::complex<double>(gauss(rng), gauss(rng));
      Mat herm = (x + x.adjoint()) / 2;
      Eigen::SelfAdjointEigenSolver<Mat> es(herm, Eigen::EigenvaluesOnly);
      double nm = es.eigenvalues().cwiseAbs().maxCoeff();
      double target = uni(rng) * cap;
      Mat block = herm * (target / nm);
      draws.push_back({a, b, block, target});
    }
  // Rescale uniformly so the per-site budget holds.
  std::vector<double> acc(n, 0.0);
  for (const auto& d : draws) {
    acc[d.a] += d.norm;
    acc[d.b] += d.norm;
  }
  double worst = 0;
  for (double v : acc) worst = std::max(worst, v);
  double scale = worst > Jbar0 ? Jbar0 / worst : 1.0;
  std::vector<LocalTerm> terms;
  for (auto& d : draws)
    terms.push_back({Region{d.a, d.b}, (scale * d.block).eval()});
  meta.k = 0;
  for (const auto& t : terms)
    meta.k = std::max(meta.k, support_diameter(lat, t.support));
  return LocalHamiltonian(lat, std::move(terms), meta);
}

LocalHamiltonian build_custom(const Lattice& lat, std::vector<LocalTerm> terms,
                              DecayMeta declared) {
  return LocalHamiltonian(lat, std::move(terms), declared);
}

LocalHamiltonian subset_hamiltonian(const LocalHamiltonian& h, const Region& l) {
  if (l.empty()) throw Error("empty-region", "subset_hamiltonian");
  std::vector<LocalTerm> kept;
  for (const auto& t : h.terms())
    if (l.contains(t.support)) kept.push_back(t);
  return LocalHamiltonian(h.lattice(), std::move(kept), h.meta());
}

LocalHamiltonian boundary_interaction(const LocalHamiltonian& h,
                                      const Region& l) {
  if (l.empty()) throw Error("empty-region", "boundary_interaction");
  Region comp = h.lattice().complement(l);
  if (comp.empty()) throw Error("no-complement", "boundary_interaction");
  std::vector<LocalTerm> kept;
  for (const auto& t : h.terms()) {
    bool meets_l = !t.support.intersect(l).empty();
    bool meets_c = !t.support.intersect(comp).empty();
    if (meets_l && meets_c) kept.push_back(t);
  }
  return LocalHamiltonian(h.lattice(), std::move(kept), h.meta());
}

InteractionSum interaction_sum(const LocalHamiltonian& h, const Region& x,
                               const Region& y) {
  if (x.empty() || y.empty()) throw Error("empty-region", "interaction_sum");
  double measured = 0;
  for (const auto& t : h.terms())
    if (!t.support.intersect(x).empty() && !t.support.intersect(y).empty())
      measured += t.norm();
  int d = distance(h.lattice(), x, y);
  double bound = double(x.size()) * double(y.size()) * pair_bound(h.meta(), d);
  return {measured, bound};
}

}  // namespace qml
