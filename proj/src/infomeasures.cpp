#include "qml/infomeasures.hpp"

#include <cmath>

namespace qml {

namespace {

const double kEigFloor = 1e-14;

DenseOperator reduced(const DenseOperator& rho, const Region& keep) {
  return reduce_to(rho, keep);
}

}  // namespace

void Tripartition::validate() const {
  if (a.empty() || c.empty()) throw Error("empty-region", "tripartition");
  if (!a.intersect(b).empty() || !a.intersect(c).empty() ||
      !b.intersect(c).empty())
    throw Error("bad-region", "tripartition must be pairwise disjoint");
}

double entropy(const DenseOperator& rho) {
  if (std::abs(rho.trace().real() - 1.0) > 1e-8)
    throw Error("not-a-state", "trace != 1");
  Vec w = eigh_values(rho.mat);
  if (w.minCoeff() < -1e-8)
    throw Error("not-a-state",
                "negative eigenvalue " + std::to_string(w.minCoeff()));
  double s = 0;
  for (long i = 0; i < w.size(); ++i)
    if (w[i] > kEigFloor) s -= w[i] * std::log(w[i]);
  return s;
}

double relative_entropy(const DenseOperator& rho, const DenseOperator& sigma) {
  Spectrum sr = eigh(rho.mat);
  Spectrum ss = eigh(sigma.mat);
  if (ss.eigenvalues.minCoeff() <= kEigFloor)
    throw Error("infinite-relative-entropy", "sigma is rank deficient");
  double tr_rho_log_rho = 0;
  for (long i = 0; i < sr.eigenvalues.size(); ++i) {
    double p = sr.eigenvalues[i];
    if (p > kEigFloor) tr_rho_log_rho += p * std::log(p);
  }
  Vec logw = ss.eigenvalues.array().log();
  Mat log_sigma = ss.eigenvectors * logw.asDiagonal() * ss.eigenvectors.adjoint();
  double tr_rho_log_sigma = (rho.mat * log_sigma).trace().real();
  return tr_rho_log_rho - tr_rho_log_sigma;
}

double mutual_information(const DenseOperator& rho, const Region& a,
                          const Region& b) {
  if (a.empty() || b.empty()) throw Error("empty-region", "mutual_information");
  if (!a.intersect(b).empty())
    throw Error("bad-region", "mutual_information needs disjoint regions");
  double sa = entropy(reduced(rho, a));
  double sb = entropy(reduced(rho, b));
  double sab = entropy(reduced(rho, a.unite(b)));
  return sa + sb - sab;
}

CmiRecord cmi(const DenseOperator& rho, const Tripartition& part) {
  part.validate();
  if (!rho.sites.contains(part.abc()))
    throw Error("bad-region", "tripartition outside state support");
  CmiRecord rec;
  rec.part = part;
  rec.s_ab = entropy(reduced(rho, part.a.unite(part.b)));
  rec.s_bc = entropy(reduced(rho, part.b.unite(part.c)));
  rec.s_abc = entropy(reduced(rho, part.abc()));
  rec.s_b = part.b.empty() ? 0.0 : entropy(reduced(rho, part.b));
  rec.cmi = rec.s_ab + rec.s_bc - rec.s_abc - rec.s_b;
  // Cross-check through I(A:BC) - I(A:B).
  double sa = entropy(reduced(rho, part.a));
  double i_a_bc = part.b.unite(part.c).empty()
                      ? 0.0
                      : sa + rec.s_bc - rec.s_abc;
  double i_a_b = part.b.empty() ? 0.0 : sa + rec.s_b - rec.s_ab;
  rec.cross_check = std::abs(rec.cmi - (i_a_bc - i_a_b));
  return rec;
}

DenseOperator cmi_hamiltonian(const DenseOperator& rho_beta, double beta,
                              const Tripartition& part) {
  part.validate();
  if (beta < 0) throw Error("bad-beta", "cmi_hamiltonian");
  if (part.abc() != rho_beta.sites)
    throw Error("bad-region", "cmi_hamiltonian needs an exhaustive tripartition");
  auto log_marginal = [&](const Region& l) {
    DenseOperator r = reduced(rho_beta, l);
    DenseOperator lg = mat_fn(r, MatFn::Log);
    return embed_to(lg, rho_beta.sites, rho_beta.dims);
  };
  // beta H*_L = log rho_L; the Z = 1 shift makes log rho_beta play beta H.
  DenseOperator log_ab = log_marginal(part.a.unite(part.b));
  DenseOperator log_bc = log_marginal(part.b.unite(part.c));
  DenseOperator log_b = log_marginal(part.b);
  DenseOperator log_abc = mat_fn(rho_beta, MatFn::Log);
  Mat out = -(log_ab.mat + log_bc.mat - log_abc.mat - log_b.mat);
  return {rho_beta.sites, rho_beta.dims, std::move(out)};
}

SquashedBound squashed_bound(const DenseOperator& rho_beta, const Region& a,
                             const Region& b) {
  Region e = rho_beta.sites.subtract(a.unite(b));
  Tripartition part{a, e, b};  // I(A:B|E)
  CmiRecord rec = cmi(rho_beta, part);
  long da = 1, db = 1;
  for (int k = 0; k < rho_beta.sites.size(); ++k) {
    if (a.contains(rho_beta.sites[k])) da *= rho_beta.dims[k];
    if (b.contains(rho_beta.sites[k])) db *= rho_beta.dims[k];
  }
  double half = 0.5 * rec.cmi;
  double sep = 2.0 * double(std::min(da, db)) *
               std::sqrt(std::max(0.0, 2.0 * rec.cmi));
  return {half, sep};
}

double concurrence_two_qubit(const DenseOperator& rho_ab) {
  if (rho_ab.dimension() != 4 || rho_ab.dims != std::vector<int>{2, 2})
    throw Error("two-qubit-only", "concurrence");
  Mat sy(2, 2);
  sy << 0, std::complex<double>(0, -1), std::complex<double>(0, 1), 0;
  Mat yy = Mat::Zero(4, 4);
  for (int a1 = 0; a1 < 2; ++a1)
    for (int b1 = 0; b1 < 2; ++b1)
      for (int a2 = 0; a2 < 2; ++a2)
        for (int b2 = 0; b2 < 2; ++b2)
          yy(a1 * 2 + a2, b1 * 2 + b2) = sy(a1, b1) * sy(a2, b2);
  Mat rt = yy * rho_ab.mat.conjugate() * yy;
  Eigen::ComplexEigenSolver<Mat> ces(rho_ab.mat * rt, false);
  Eigen::VectorXd lam = ces.eigenvalues().cwiseAbs().cwiseSqrt();
  std::sort(lam.data(), lam.data() + lam.size(), std::greater<double>());
  return std::max(0.0, lam[0] - lam[1] - lam[2] - lam[3]);
}

double eof_two_qubit(const DenseOperator& rho_ab) {
  double c = concurrence_two_qubit(rho_ab);
  if (c <= 0) return 0.0;
  double x = (1.0 + std::sqrt(1.0 - c * c)) / 2.0;
  auto h = [](double p) {
    if (p <= 0 || p >= 1) return 0.0;
    return -p * std::log(p) - (1 - p) * std::log(1 - p);
  };
  return h(x);
}

PetzResult petz_recover(const DenseOperator& rho, const Region& b,
                        const Region& c, PetzVariant variant, int t_nodes) {
  if (b.empty() || c.empty()) throw Error("empty-region", "petz_recover");
  Region a = rho.sites.subtract(b.unite(c));
  DenseOperator rho_ab = reduced(rho, a.unite(b));
  DenseOperator rho_bc = reduced(rho, b.unite(c));
  DenseOperator rho_b = reduced(rho, b);

  Spectrum sb = eigh(rho_b.mat);
  if (sb.eigenvalues.minCoeff() <= kEigFloor)
    throw Error("not-positive-definite",
                "rho_B lambda_min = " + std::to_string(sb.eigenvalues.minCoeff()));
  Spectrum sbc = eigh(rho_bc.mat);

  Region abc = rho.sites;
  auto lift = [&](const DenseOperator& o) { return embed_to(o, abc, rho.dims); };
  DenseOperator x_full = lift(rho_ab);

  auto powered = [](const Spectrum& sp, std::complex<double> z) {
    CVec w(sp.eigenvalues.size());
    for (long i = 0; i < w.size(); ++i)
      w[i] = std::pow(std::complex<double>(std::max(sp.eigenvalues[i], 0.0)), z);
    return (sp.eigenvectors * w.asDiagonal() * sp.eigenvectors.adjoint()).eval();
  };

  Mat acc;
  if (variant == PetzVariant::Plain) {
    DenseOperator bc_h{rho_bc.sites, rho_bc.dims, powered(sbc, 0.5)};
    DenseOperator b_mh{rho_b.sites, rho_b.dims, powered(sb, -0.5)};
    Mat m = lift(bc_h).mat * lift(b_mh).mat;
    acc = m * x_full.mat * m.adjoint();
  } else {
    // Rotated family, averaged with beta_0(t) = (pi/2)(cosh(pi t)+1)^{-1}
    // on a tanh-sinh grid over t.
    acc = Mat::Zero(x_full.mat.rows(), x_full.mat.cols());
    double wsum = 0;
    int half = t_nodes / 2;
    double step = 6.0 / t_nodes;
    for (int k = -half; k <= half; ++k) {
      double u = k * step;
      double t = std::sinh(u);         // tanh-sinh style stretching
      double jac = std::cosh(u) * step;
      double w0 = (M_PI / 2.0) / (std::cosh(M_PI * t) + 1.0) * jac;
      std::complex<double> zp(0.5, 0.5 * t), zm(-0.5, -0.5 * t);
      DenseOperator bc_h{rho_bc.sites, rho_bc.dims, powered(sbc, zp)};
      DenseOperator b_mh{rho_b.sites, rho_b.dims, powered(sb, zm)};
      Mat m = lift(bc_h).mat * lift(b_mh).mat;
      acc += w0 * (m * x_full.mat * m.adjoint());
      wsum += w0;
    }
    acc /= wsum;
  }
  double tr = acc.trace().real();
  PetzResult res{{abc, rho.dims, acc / tr}, std::abs(tr - 1.0)};
  return res;
}

}  // namespace qml
