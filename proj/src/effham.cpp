#include "qml/effham.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <random>

namespace qml {

namespace {

Mat polar_unitary(const Mat& m) {
  Eigen::BDCSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

Mat c_generator(const Mat& g_full_log, const Mat& v, double beta,
                const QuadSpec& quad) {
  Mat a_like = g_full_log / beta;
  Spectrum sp = eigh(((a_like + a_like.adjoint()) / 2.0).eval());
  return g_filter_transform(sp, v, beta, quad);
}

Mat dense_log_of_sandwich(const Mat& a, const Mat& v, double beta, double tau) {
  // log(e^{tau V} e^{beta A} e^{tau V}) through shifted exponentials:
  // the shift moves the log by a known constant.
  Spectrum sa = eigh(((a + a.adjoint()) / 2.0).eval());
  double shift = sa.eigenvalues.maxCoeff();
  Vec ea = ((sa.eigenvalues.array() - shift) * beta).exp();
  Mat core = sa.eigenvectors * ea.asDiagonal() * sa.eigenvectors.adjoint();
  Spectrum sv = eigh(((v + v.adjoint()) / 2.0).eval());
  Vec ev = (sv.eigenvalues.array() * tau).exp();
  Mat evm = sv.eigenvectors * ev.asDiagonal() * sv.eigenvectors.adjoint();
  Mat sandwich = evm * core * evm;
  sandwich = ((sandwich + sandwich.adjoint()) / 2.0).eval();
  Spectrum ss = eigh(sandwich);
  if (ss.eigenvalues.minCoeff() <= 0)
    throw Error("not-positive-definite", "dense log oracle");
  Vec lw = ss.eigenvalues.array().log() + beta * shift;
  return ss.eigenvectors * lw.asDiagonal() * ss.eigenvectors.adjoint();
}

}  // namespace

EntanglementHamiltonian entanglement_hamiltonian(const DenseOperator& rho,
                                                 const LocalHamiltonian& h,
                                                 const Region& l, double beta) {
  if (beta <= 0) throw Error("bad-beta", "entanglement_hamiltonian");
  DenseOperator rho_l = reduce_to(rho, l);
  DenseOperator h_star = mat_fn(rho_l, MatFn::Log);
  h_star.mat /= beta;
  DenseOperator h_l = to_dense_on(subset_hamiltonian(h, l), l);
  return {h_star, h_star - h_l};
}

ConnectedLogResult connected_log_ode(const DenseOperator& a,
                                     const DenseOperator& v, double beta,
                                     double tau_max, int n_steps,
                                     const QuadSpec& quad, bool keep_history,
                                     double recon_tol) {
  if (a.sites != v.sites) throw Error("space-mismatch", "connected_log_ode");
  if (a.herm_error() > 1e-10 || v.herm_error() > 1e-10)
    throw Error("not-hermitian", "connected_log_ode");
  long dim = a.dimension();
  Mat u = Mat::Identity(dim, dim);
  Mat vh = Mat::Zero(dim, dim);
  double dt = tau_max / n_steps;
  const std::complex<double> im(0, 1);
  EffLogState st;
  for (int k = 0; k < n_steps; ++k) {
    Mat g = u * (beta * a.mat + vh) * u.adjoint();
    Mat c1 = c_generator(g, v.mat, beta, quad);
    if (keep_history) st.c_norm_history.push_back(op_norm(c1));
    Mat u_mid = u - im * (dt / 2.0) * (c1 * u);
    Mat vh_mid = vh + dt * (u.adjoint() * v.mat * u);
    Mat g_mid = u_mid * (beta * a.mat + vh_mid) * u_mid.adjoint();
    Mat c_mid = c_generator(g_mid, v.mat, beta, quad);
    u = (u - im * dt * (c_mid * u_mid)).eval();
    vh = (vh + dt * 2.0 * (u_mid.adjoint() * v.mat * u_mid)).eval();
    if ((k + 1) % 32 == 0) u = polar_unitary(u);
  }
  u = polar_unitary(u);
  st.u = DenseOperator{a.sites, a.dims, u};
  st.v_hat = DenseOperator{a.sites, a.dims, ((vh + vh.adjoint()) / 2.0).eval()};
  st.tau = tau_max;

  ConnectedLogResult out;
  Mat oracle = dense_log_of_sandwich(a.mat, v.mat, beta, tau_max);
  Mat rec = u * (beta * a.mat + st.v_hat.mat) * u.adjoint();
  out.reconstruction_error = op_norm(Mat(rec - oracle));
  out.log_oracle = DenseOperator{a.sites, a.dims, std::move(oracle)};
  out.state = std::move(st);
  if (out.reconstruction_error > recon_tol)
    throw Error("ode-diverged",
                "reconstruction error " + std::to_string(out.reconstruction_error));
  return out;
}

TruncatedLogResult truncated_connected_log(const LocalHamiltonian& h0,
                                           const DenseOperator& v,
                                           const Region& center, int r,
                                           double beta, double tau_max,
                                           int n_steps, const QuadSpec& quad) {
  const Lattice& lat = h0.lattice();
  Region ball = extend_region(lat, center, r);
  DenseOperator h_full = to_dense(h0);
  DenseOperator h_ball = to_dense(subset_hamiltonian(h0, ball));
  auto full = connected_log_ode(h_full, v, beta, tau_max, n_steps, quad);
  auto ball_run = connected_log_ode(h_ball, v, beta, tau_max, n_steps, quad);
  TruncatedLogResult res;
  res.radius = r;
  res.u_error = op_norm(full.state.u - ball_run.state.u);
  Mat approx = ball_run.state.u.mat *
               (beta * h_full.mat + ball_run.state.v_hat.mat) *
               ball_run.state.u.mat.adjoint();
  res.log_error = op_norm(Mat(full.log_oracle.mat - approx));
  return res;
}

DenseOperator PtpOperators::p_tau(double tau) const {
  return DenseOperator{p.sites, p.dims,
                       (p.mat + std::exp(-tau) * q.mat).eval()};
}

PtpOperators ptp_build(const Lattice& lat, const Region& l) {
  if (l.empty()) throw Error("empty-region", "ptp_build");
  int n = lat.n_sites();
  long dl = 1;
  std::vector<int> l_dims;
  for (int s : l) {
    l_dims.push_back(lat.local_dim(s));
    dl *= lat.local_dim(s);
  }
  long full_dim = 1;
  for (int s = 0; s < n; ++s) full_dim *= lat.local_dim(s);
  if (full_dim * dl > dense_cap())
    throw Error("too-large", "ptp doubled space exceeds dense cap");

  std::vector<int> anc_sites;
  for (int k = 0; k < l.size(); ++k) anc_sites.push_back(n + k);
  Region ancilla(anc_sites);

  // |P_L> on L u L_a (L block first in site-major order).
  CVec pvec = CVec::Zero(dl * dl);
  for (long j = 0; j < dl; ++j) pvec[j * dl + j] = 1.0 / std::sqrt(double(dl));

  Region la = l.unite(ancilla);
  std::vector<int> la_dims = l_dims;
  la_dims.insert(la_dims.end(), l_dims.begin(), l_dims.end());
  DenseOperator p_small{la, la_dims, pvec * pvec.adjoint()};

  Region all = lat.all_sites().unite(ancilla);
  std::vector<int> all_dims = lat.local_dims();
  all_dims.insert(all_dims.end(), l_dims.begin(), l_dims.end());
  DenseOperator p_full = embed_to(p_small, all, all_dims);
  DenseOperator q_full = identity_op(all, all_dims) - p_full;

  PtpOperators out;
  out.l = l;
  out.ancilla = ancilla;
  out.p_state = pvec;
  out.p = p_full;
  out.q = q_full;
  // Check the spectral identity e^{-tau Q} = P + e^{-tau} Q at tau = 1.
  DenseOperator expq = mat_fn(q_full * std::complex<double>(-1.0, 0.0),
                              MatFn::Exp);
  out.identity_error = op_norm(expq - out.p_tau(1.0));
  return out;
}

PtpError ptp_error(const PtpOperators& ptp, const DenseOperator& rho,
                   double tau) {
  long dl = 1;
  for (int k = 0; k < ptp.l.size(); ++k)
    dl *= rho.dims[std::distance(
        rho.sites.sites().begin(),
        std::find(rho.sites.sites().begin(), rho.sites.sites().end(),
                  ptp.l[k]))];
  // Lift with a maximally mixed ancilla so the result stays a state.
  DenseOperator lifted = embed_to(rho, ptp.p.sites, ptp.p.dims);
  lifted.mat /= double(dl);
  DenseOperator pt = ptp.p_tau(tau);
  Mat smoothed = pt.mat * lifted.mat * pt.mat;
  Mat sharp = ptp.p.mat * lifted.mat * ptp.p.mat;
  PtpError err;
  err.raw = trace_norm(Mat(smoothed - sharp));
  err.raw_bound = 2.0 * std::exp(-tau);
  // Normalized candidate vs rho_{L^c} (x) P_L.
  double tr = smoothed.trace().real();
  DenseOperator rho_lc = partial_trace(rho, ptp.l);
  DenseOperator target = embed_to(rho_lc, ptp.p.sites, ptp.p.dims) * ptp.p;
  err.normalized = trace_norm(Mat(smoothed / tr - target.mat));
  err.normalized_bound = 4.0 * double(dl) * std::exp(-tau);
  return err;
}

LocalityProfile locality_profile(const DenseOperator& op, const Lattice& lat,
                                 const Region& center,
                                 const std::vector<int>& radii) {
  LocalityProfile prof;
  prof.center = center;
  for (int r : radii) {
    Region ball = extend_region(lat, center, r);
    Region outside = lat.complement(ball).intersect(op.sites);
    double v = outside.empty()
                   ? 0.0
                   : op_norm(op - normalized_partial_trace(op, outside));
    prof.radii.push_back(r);
    prof.values.push_back(v);
  }
  // Exponential fit on the decaying tail (values above numerical zero).
  std::vector<double> xs, ys;
  for (size_t k = 0; k < prof.values.size(); ++k)
    if (prof.values[k] > 1e-13) {
      xs.push_back(prof.radii[k]);
      ys.push_back(std::log(prof.values[k]));
    }
  if (xs.size() < 2) {
    prof.fit_rate = std::numeric_limits<double>::infinity();
    return prof;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t k = 0; k < xs.size(); ++k) {
    sx += xs[k];
    sy += ys[k];
    sxx += xs[k] * xs[k];
    sxy += xs[k] * ys[k];
  }
  double npt = double(xs.size());
  double det = npt * sxx - sx * sx;
  double slope = (npt * sxy - sx * sy) / det;
  double icept = (sy - slope * sx) / npt;
  prof.fit_rate = -slope;
  prof.fit_amplitude = std::exp(icept);
  double sse = 0;
  for (size_t k = 0; k < xs.size(); ++k) {
    double rres = ys[k] - (icept + slope * xs[k]);
    sse += rres * rres;
  }
  prof.fit_residual = std::sqrt(sse / npt);
  return prof;
}

std::vector<double> locality_profile_randomized(const DenseOperator& op,
                                                const Lattice& lat,
                                                const Region& center,
                                                const std::vector<int>& radii,
                                                int n_unitaries,
                                                unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto haar = [&](int d) {
    Mat g(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        g(i, j) = std::complex<double>(gauss(rng), gauss(rng));
    Eigen::HouseholderQR<Mat> qr(g);
    Mat q = qr.householderQ();
    return q;
  };
  std::vector<double> out;
  for (int r : radii) {
    Region ball = extend_region(lat, center, r);
    Region outside = lat.complement(ball).intersect(op.sites);
    double best = 0;
    for (int s : outside) {
      for (int k = 0; k < n_unitaries; ++k) {
        Mat u = haar(lat.local_dim(s));
        std::vector<int> d1{lat.local_dim(s)};
        DenseOperator usite{Region{s}, d1, u};
        DenseOperator ufull = embed_to(usite, op.sites, op.dims);
        best = std::max(best,
                        op_norm(Mat(op.mat * ufull.mat - ufull.mat * op.mat)));
      }
    }
    out.push_back(best);
  }
  return out;
}

std::vector<ImagLocalityRow> imaginary_locality_profile(
    const LocalHamiltonian& h, const DenseOperator& o_x, const Region& x,
    double beta, double t, const std::vector<int>& radii, double lr_v) {
  const Lattice& lat = h.lattice();
  if (h.meta().k <= 0 && !std::isinf(h.meta().mu))
    throw Error("bad-model", "imaginary profile needs finite-range H");
  DenseOperator hd = to_dense(h);
  DenseOperator evolved = time_evolve(o_x, hd, t);
  Spectrum sp = eigh(hd.mat);
  double mid =
      0.5 * (sp.eigenvalues.maxCoeff() + sp.eigenvalues.minCoeff());
  Vec em = (-(sp.eigenvalues.array() - mid) * (beta / 2.0)).exp();
  Vec ep = ((sp.eigenvalues.array() - mid) * (beta / 2.0)).exp();
  Mat left = sp.eigenvectors * em.asDiagonal() * sp.eigenvectors.adjoint();
  Mat right = sp.eigenvectors * ep.asDiagonal() * sp.eigenvectors.adjoint();
  std::vector<ImagLocalityRow> rows;
  double mu = std::isinf(h.meta().mu) ? 1.0 : h.meta().mu;
  for (int r : radii) {
    Region ball = extend_region(lat, x, r);
    Region outside = lat.complement(ball);
    DenseOperator diff =
        outside.empty() ? DenseOperator{evolved.sites, evolved.dims,
                                        Mat::Zero(evolved.mat.rows(),
                                                  evolved.mat.cols())}
                        : evolved - normalized_partial_trace(evolved, outside);
    double v = op_norm(Mat(left * diff.mat * right));
    double shape = std::min(1.0, std::exp(-mu * r / 3.0 + lr_v * t));
    rows.push_back({r, v, shape});
  }
  return rows;
}

}  // namespace qml
