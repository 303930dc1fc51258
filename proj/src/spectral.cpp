#include "qml/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <atomic>
#include <cmath>
#include <random>

#ifdef QML_HAVE_LAPACKE
#ifndef lapack_complex_float
#define lapack_complex_float std::complex<float>
#endif
#ifndef lapack_complex_double
#define lapack_complex_double std::complex<double>
#endif
#include <lapacke.h>
#endif

namespace qml {

namespace {

std::atomic<long> g_dense_cap{1L << 12};

constexpr long kLapackThreshold = 256;

void check_same_space(const DenseOperator& a, const DenseOperator& b) {
  if (a.sites != b.sites || a.dims != b.dims)
    throw Error("space-mismatch", "operators live on different site lists");
}

long product(const std::vector<int>& dims) {
  long p = 1;
  for (int d : dims) p *= d;
  return p;
}

// Row strides of each site in the full tensor index (site-index-major).
std::vector<long> strides(const std::vector<int>& dims) {
  std::vector<long> s(dims.size());
  long acc = 1;
  for (int k = static_cast<int>(dims.size()) - 1; k >= 0; --k) {
    s[k] = acc;
    acc *= dims[k];
  }
  return s;
}

// All flat offsets generated by the sub-list `positions` of sites.
std::vector<long> sub_offsets(const std::vector<int>& dims,
                              const std::vector<long>& stride,
                              const std::vector<int>& positions) {
  long total = 1;
  for (int p : positions) total *= dims[p];
  std::vector<long> out(total, 0);
  long rep = 1;
  for (int k = static_cast<int>(positions.size()) - 1; k >= 0; --k) {
    int p = positions[k];
    long block = rep * dims[p];
    for (long i = 0; i < total; ++i) {
      long digit = (i / rep) % dims[p];
      out[i] += digit * stride[p];
    }
    rep = block;
  }
  return out;
}

}  // namespace

long dense_cap() { return g_dense_cap.load(); }

void set_dense_cap(long cap) {
  if (cap < 2 || cap > (1L << 16))
    throw Error("bad-cap", "dense cap must lie in [2, 2^16]");
  g_dense_cap.store(cap);
}

double DenseOperator::herm_error() const {
  double scale = std::max(1e-300, mat.cwiseAbs().maxCoeff());
  return (mat - mat.adjoint()).cwiseAbs().maxCoeff() / scale;
}

DenseOperator DenseOperator::operator+(const DenseOperator& o) const {
  check_same_space(*this, o);
  return {sites, dims, mat + o.mat};
}

DenseOperator DenseOperator::operator-(const DenseOperator& o) const {
  check_same_space(*this, o);
  return {sites, dims, mat - o.mat};
}

DenseOperator DenseOperator::operator*(const DenseOperator& o) const {
  check_same_space(*this, o);
  return {sites, dims, mat * o.mat};
}

DenseOperator DenseOperator::operator*(std::complex<double> c) const {
  return {sites, dims, mat * c};
}

DenseOperator identity_op(const Region& sites, const std::vector<int>& dims) {
  long d = product(dims);
  return {sites, dims, Mat::Identity(d, d)};
}

Spectrum eigh(const Mat& m) {
  long n = m.rows();
#ifdef QML_HAVE_LAPACKE
  if (n >= kLapackThreshold) {
    Mat a = m;
    Vec w(n);
    int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'L', n, a.data(), n,
                              w.data());
    if (info != 0) throw Error("eig-failure", "zheevd info != 0");
    return {w, a};
  }
#endif
  Eigen::SelfAdjointEigenSolver<Mat> es(m);
  if (es.info() != Eigen::Success) throw Error("eig-failure", "eigh failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

Vec eigh_values(const Mat& m) {
  long n = m.rows();
#ifdef QML_HAVE_LAPACKE
  if (n >= kLapackThreshold) {
    Mat a = m;
    Vec w(n);
    int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'N', 'L', n, a.data(), n,
                              w.data());
    if (info != 0) throw Error("eig-failure", "zheevd info != 0");
    return w;
  }
#endif
  Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error("eig-failure", "eigh failed");
  return es.eigenvalues();
}

Eigen::VectorXd singular_values(const Mat& m) {
#ifdef QML_HAVE_LAPACKE
  if (m.rows() >= 128 && m.rows() == m.cols()) {
    Mat a = m;
    long n = m.rows();
    Eigen::VectorXd s(n);
    Mat u(1, 1), vt(1, 1);
    int info = LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'N', n, n, a.data(), n,
                              s.data(), u.data(), 1, vt.data(), 1);
    if (info != 0) throw Error("svd-failure", "zgesdd info != 0");
    return s;
  }
#endif
  Eigen::BDCSVD<Mat> svd(m);
  return svd.singularValues();
}

double op_norm(const Mat& m) {
  if (m.rows() == 0) return 0.0;
  double scale = m.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() < 1e-12 * scale)
    return eigh_values(m).cwiseAbs().maxCoeff();
  return singular_values(m).maxCoeff();
}

double op_norm(const DenseOperator& o) { return op_norm(o.mat); }

double trace_norm(const Mat& m) {
  if (m.rows() == 0) return 0.0;
  return singular_values(m).sum();
}

double trace_norm(const DenseOperator& o) { return trace_norm(o.mat); }

DenseOperator embed_to(const DenseOperator& op, const Region& sites,
                       const std::vector<int>& dims) {
  if (!sites.contains(op.sites))
    throw Error("bad-region", "embed target must contain operator support");
  long dim = product(dims);
  if (dim > dense_cap()) throw Error("too-large", "embed exceeds dense cap");
  std::vector<int> pos_sup, pos_rest;
  for (int k = 0; k < sites.size(); ++k) {
    if (op.sites.contains(sites[k])) {
      if (dims[k] != op.dims[pos_sup.size()])
        throw Error("space-mismatch", "local dimension mismatch in embed");
      pos_sup.push_back(k);
    } else {
      pos_rest.push_back(k);
    }
  }
  auto st = strides(dims);
  auto off_sup = sub_offsets(dims, st, pos_sup);
  auto off_rest = sub_offsets(dims, st, pos_rest);
  Mat out = Mat::Zero(dim, dim);
  long ds = op.mat.rows();
  for (long a = 0; a < ds; ++a)
    for (long b = 0; b < ds; ++b) {
      std::complex<double> v = op.mat(a, b);
      if (v == 0.0) continue;
      for (long r : off_rest) out(off_sup[a] + r, off_sup[b] + r) = v;
    }
  return {sites, dims, std::move(out)};
}

DenseOperator embed(const LocalTerm& term, const Lattice& lat) {
  std::vector<int> sup_dims;
  for (int s : term.support) sup_dims.push_back(lat.local_dim(s));
  DenseOperator local{term.support, sup_dims, term.block};
  return embed_to(local, lat.all_sites(), lat.local_dims());
}

DenseOperator to_dense(const LocalHamiltonian& h) {
  const Lattice& lat = h.lattice();
  long dim = product(lat.local_dims());
  if (dim > dense_cap()) throw Error("too-large", "to_dense exceeds dense cap");
  DenseOperator acc{lat.all_sites(), lat.local_dims(), Mat::Zero(dim, dim)};
  for (const auto& t : h.terms()) acc.mat += embed(t, lat).mat;
  return acc;
}

DenseOperator to_dense_on(const LocalHamiltonian& h, const Region& region) {
  std::vector<int> dims;
  for (int s : region) dims.push_back(h.lattice().local_dim(s));
  long dim = product(dims);
  if (dim > dense_cap()) throw Error("too-large", "to_dense_on exceeds cap");
  DenseOperator acc{region, dims, Mat::Zero(dim, dim)};
  for (const auto& t : h.terms()) {
    if (!region.contains(t.support))
      throw Error("bad-region", "term support escapes the target region");
    std::vector<int> sup_dims;
    for (int s : t.support) sup_dims.push_back(h.lattice().local_dim(s));
    DenseOperator local{t.support, sup_dims, t.block};
    acc.mat += embed_to(local, region, dims).mat;
  }
  return acc;
}

DenseOperator gibbs_state(const DenseOperator& hdense, double beta) {
  if (beta < 0) throw Error("bad-beta", "beta must be nonnegative");
  Spectrum sp = eigh(hdense.mat);
  double shift = sp.eigenvalues.maxCoeff();
  Vec w = ((sp.eigenvalues.array() - shift) * beta).exp();
  double z = w.sum();
  Mat rho = sp.eigenvectors * (w / z).asDiagonal() * sp.eigenvectors.adjoint();
  rho = ((rho + rho.adjoint()) / 2.0).eval();
  if (!rho.allFinite()) throw Error("numeric-overflow", "gibbs_state");
  rho /= rho.trace().real();
  return {hdense.sites, hdense.dims, std::move(rho)};
}

DenseOperator gibbs_state(const LocalHamiltonian& h, double beta) {
  return gibbs_state(to_dense(h), beta);
}

DenseOperator mat_fn(const DenseOperator& op, MatFn fn, double power) {
  Spectrum sp = eigh(op.mat);
  double lmin = sp.eigenvalues.minCoeff();
  bool needs_pd =
      fn == MatFn::Log || fn == MatFn::Sqrt || fn == MatFn::InvSqrt;
  if (needs_pd && lmin <= 1e-14)
    throw Error("not-positive-definite",
                "lambda_min = " + std::to_string(lmin));
  Vec w(sp.eigenvalues.size());
  for (long i = 0; i < w.size(); ++i) {
    double x = sp.eigenvalues[i];
    switch (fn) {
      case MatFn::Exp: w[i] = std::exp(x); break;
      case MatFn::Log: w[i] = std::log(x); break;
      case MatFn::Sqrt: w[i] = std::sqrt(x); break;
      case MatFn::InvSqrt: w[i] = 1.0 / std::sqrt(x); break;
      case MatFn::Power: w[i] = std::pow(x, power); break;
    }
  }
  if (!w.allFinite()) throw Error("numeric-overflow", "mat_fn");
  Mat out = sp.eigenvectors * w.asDiagonal() * sp.eigenvectors.adjoint();
  return {op.sites, op.dims, std::move(out)};
}

DenseOperator time_evolve(const DenseOperator& op, const DenseOperator& h,
                          double t) {
  check_same_space(op, h);
  if (h.herm_error() > 1e-10) throw Error("not-hermitian", "time_evolve");
  Spectrum sp = eigh(h.mat);
  CVec phases(sp.eigenvalues.size());
  for (long i = 0; i < phases.size(); ++i)
    phases[i] = std::exp(std::complex<double>(0.0, sp.eigenvalues[i] * t));
  Mat in_basis = sp.eigenvectors.adjoint() * op.mat * sp.eigenvectors;
  in_basis = (phases.asDiagonal() * in_basis * phases.conjugate().asDiagonal()).eval();
  Mat out = sp.eigenvectors * in_basis * sp.eigenvectors.adjoint();
  return {op.sites, op.dims, std::move(out)};
}

ImagConjugate imaginary_conjugate(const DenseOperator& op,
                                  const DenseOperator& h, double tau) {
  check_same_space(op, h);
  if (h.herm_error() > 1e-10) throw Error("not-hermitian", "imaginary_conjugate");
  Spectrum sp = eigh(h.mat);
  // Work around the spectral shift: e^{-tau(H-s)} O e^{tau(H-s)} is shift-free.
  Vec w = sp.eigenvalues;
  double mid = 0.5 * (w.maxCoeff() + w.minCoeff());
  Vec em = (-(w.array() - mid) * tau).exp();
  Vec ep = ((w.array() - mid) * tau).exp();
  Mat in_basis = sp.eigenvectors.adjoint() * op.mat * sp.eigenvectors;
  in_basis = (em.asDiagonal() * in_basis * ep.asDiagonal()).eval();
  if (!in_basis.allFinite()) throw Error("numeric-overflow", "imaginary_conjugate");
  Mat out = sp.eigenvectors * in_basis * sp.eigenvectors.adjoint();
  DenseOperator res{op.sites, op.dims, std::move(out)};
  double nm = op_norm(res);
  return {std::move(res), nm};
}

DenseOperator partial_trace(const DenseOperator& op, const Region& traced) {
  if (!op.sites.contains(traced))
    throw Error("bad-region", "traced sites must lie in the operator support");
  Region keep = op.sites.subtract(traced);
  std::vector<int> keep_dims, pos_keep, pos_tr;
  for (int k = 0; k < op.sites.size(); ++k) {
    if (traced.contains(op.sites[k]))
      pos_tr.push_back(k);
    else {
      pos_keep.push_back(k);
      keep_dims.push_back(op.dims[k]);
    }
  }
  auto st = strides(op.dims);
  auto off_keep = sub_offsets(op.dims, st, pos_keep);
  auto off_tr = sub_offsets(op.dims, st, pos_tr);
  long dk = static_cast<long>(off_keep.size());
  Mat out = Mat::Zero(dk, dk);
  for (long a = 0; a < dk; ++a)
    for (long b = 0; b < dk; ++b) {
      std::complex<double> acc = 0;
      for (long t : off_tr) acc += op.mat(off_keep[a] + t, off_keep[b] + t);
      out(a, b) = acc;
    }
  return {keep, keep_dims, std::move(out)};
}

DenseOperator reduce_to(const DenseOperator& op, const Region& keep) {
  return partial_trace(op, op.sites.subtract(keep));
}

DenseOperator normalized_partial_trace(const DenseOperator& op,
                                       const Region& x) {
  if (x.empty()) return op;
  long dx = 1;
  for (int k = 0; k < op.sites.size(); ++k)
    if (x.contains(op.sites[k])) dx *= op.dims[k];
  DenseOperator reduced = partial_trace(op, x);
  reduced.mat /= double(dx);
  return embed_to(reduced, op.sites, op.dims);
}

namespace {

// Recursive Pauli transform: peel one qubit per level.
// buf holds 4^level blocks of size (D/2^level)^2 in code order.
void pauli_level(std::vector<Mat>& blocks) {
  std::vector<Mat> next;
  next.reserve(blocks.size() * 4);
  const std::complex<double> im(0, 1);
  for (const Mat& w : blocks) {
    long h = w.rows() / 2;
    Mat A = w.topLeftCorner(h, h), B = w.topRightCorner(h, h);
    Mat C = w.bottomLeftCorner(h, h), D = w.bottomRightCorner(h, h);
    next.push_back((A + D) / 2.0);        // I
    next.push_back((B + C) / 2.0);        // X
    next.push_back(im * (B - C) / 2.0);   // Y
    next.push_back((A - D) / 2.0);        // Z
  }
  blocks = std::move(next);
}

}  // namespace

PauliTable pauli_decompose(const DenseOperator& op) {
  for (int d : op.dims)
    if (d != 2) throw Error("qubit-only", "pauli_decompose");
  int n = op.sites.size();
  std::vector<Mat> blocks{op.mat};
  for (int level = 0; level < n; ++level) pauli_level(blocks);
  PauliTable table;
  table.sites = op.sites;
  table.coeff.resize(blocks.size());
  for (size_t c = 0; c < blocks.size(); ++c) table.coeff[c] = blocks[c](0, 0);
  return table;
}

std::string PauliTable::label(long code) const {
  static const char* letters = "IXYZ";
  int n = sites.size();
  std::string s(n, 'I');
  for (int k = n - 1; k >= 0; --k) {
    s[k] = letters[code % 4];
    code /= 4;
  }
  return s;
}

std::map<std::string, std::complex<double>> PauliTable::to_map(
    double threshold) const {
  std::map<std::string, std::complex<double>> out;
  for (long c = 0; c < static_cast<long>(coeff.size()); ++c)
    if (std::abs(coeff[c]) > threshold) out[label(c)] = coeff[c];
  return out;
}

DenseOperator pauli_reconstruct(const PauliTable& table,
                                const std::vector<int>& dims) {
  int n = table.sites.size();
  long dim = 1L << n;
  Mat out = Mat::Zero(dim, dim);
  const std::complex<double> im(0, 1);
  auto apply = [&](long code) {
    // build string matrix by kron of 2x2s
    Mat m = Mat::Ones(1, 1);
    long c = code;
    std::vector<int> digits(n);
    for (int k = n - 1; k >= 0; --k) {
      digits[k] = c % 4;
      c /= 4;
    }
    for (int k = 0; k < n; ++k) {
      Mat p(2, 2);
      switch (digits[k]) {
        case 0: p << 1, 0, 0, 1; break;
        case 1: p << 0, 1, 1, 0; break;
        case 2: p << 0, -im, im, 0; break;
        case 3: p << 1, 0, 0, -1; break;
      }
      // site-major: earlier sites are the outer (most significant) factor
      Mat grown(m.rows() * 2, m.cols() * 2);
      grown.setZero();
      for (long a = 0; a < m.rows(); ++a)
        for (long b = 0; b < m.cols(); ++b)
          if (m(a, b) != 0.0)
            grown.block(a * 2, b * 2, 2, 2) = m(a, b) * p;
      m = std::move(grown);
    }
    return m;
  };
  for (long c = 0; c < static_cast<long>(table.coeff.size()); ++c)
    if (table.coeff[c] != 0.0) out += table.coeff[c] * apply(c);
  return {table.sites, dims, std::move(out)};
}

std::vector<LrRow> lieb_robinson_profile(const LocalHamiltonian& h,
                                         const Region& x, const Region& y,
                                         const std::vector<double>& t_grid,
                                         int n_samples,
                                         unsigned long long seed) {
  if (!x.intersect(y).empty()) throw Error("bad-region", "X and Y must be disjoint");
  const Lattice& lat = h.lattice();
  DenseOperator hd = to_dense(h);
  Spectrum sp = eigh(hd.mat);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto random_unit = [&](const Region& sup) {
    long d = 1;
    for (int s : sup) d *= lat.local_dim(s);
    Mat m(d, d);
    for (long i = 0; i < d; ++i)
      for (long j = 0; j < d; ++j)
        m(i, j) = std::complex<double>(gauss(rng), gauss(rng));
    Mat herm = (m + m.adjoint()) / 2;
    std::vector<int> sd;
    for (int s : sup) sd.push_back(lat.local_dim(s));
    DenseOperator o{sup, sd, herm};
    DenseOperator full = embed_to(o, lat.all_sites(), lat.local_dims());
    full.mat /= op_norm(full);
    return full;
  };
  std::vector<std::pair<DenseOperator, DenseOperator>> pairs;
  for (int s = 0; s < n_samples; ++s)
    pairs.emplace_back(random_unit(x), random_unit(y));
  int d_xy = distance(lat, x, y);
  std::vector<LrRow> rows;
  for (double t : t_grid) {
    double best = 0;
    for (auto& [ox, oy] : pairs) {
      Mat oxt;
      if (t == 0.0) {
        oxt = ox.mat;  // disjoint supports commute exactly
      } else {
        CVec phases(sp.eigenvalues.size());
        for (long i = 0; i < phases.size(); ++i)
          phases[i] = std::exp(std::complex<double>(0.0, sp.eigenvalues[i] * t));
        Mat ob = sp.eigenvectors.adjoint() * ox.mat * sp.eigenvectors;
        ob = (phases.asDiagonal() * ob * phases.conjugate().asDiagonal()).eval();
        oxt = sp.eigenvectors * ob * sp.eigenvectors.adjoint();
      }
      best = std::max(best, op_norm(Mat(oxt * oy.mat - oy.mat * oxt)));
    }
    rows.push_back({t, d_xy, best});
  }
  return rows;
}

LrFit fit_lieb_robinson(const std::vector<LrRow>& rows) {
  // log v = log C + log(e^{v|t|}-1) - mu d: grid-search v, linear LSQ inside.
  std::vector<LrRow> pts;
  for (const auto& r : rows)
    if (r.value > 1e-13 && r.t != 0.0) pts.push_back(r);
  if (pts.size() < 3) throw Error("fit-failure", "not enough LR points");
  double best_sse = std::numeric_limits<double>::infinity();
  LrFit best{0, 0, 0, 0};
  for (double v = 0.1; v <= 12.0; v += 0.05) {
    // design: log val + mu*d - logC = log(e^{vt}-1); unknowns logC, mu
    double s11 = 0, s1d = 0, sdd = 0, s1y = 0, sdy = 0;
    for (const auto& p : pts) {
      double y = std::log(p.value) - std::log(std::expm1(v * std::abs(p.t)));
      s11 += 1;
      s1d += p.dist;
      sdd += double(p.dist) * p.dist;
      s1y += y;
      sdy += double(p.dist) * y;
    }
    double det = s11 * sdd - s1d * s1d;
    double logC, mu;
    if (std::abs(det) < 1e-12) {
      mu = 0.0;
      logC = s1y / s11;
    } else {
      logC = (sdd * s1y - s1d * sdy) / det;
      mu = -(s11 * sdy - s1d * s1y) / det;
    }
    double sse = 0;
    for (const auto& p : pts) {
      double pred = logC + std::log(std::expm1(v * std::abs(p.t))) - mu * p.dist;
      double r = std::log(p.value) - pred;
      sse += r * r;
    }
    if (sse < best_sse) {
      best_sse = sse;
      best = {std::exp(logC), v, mu, std::sqrt(sse / pts.size())};
    }
  }
  return best;
}

}  // namespace qml
