#include "qml/beliefprop.hpp"

#include <cmath>

namespace qml {

namespace {

double f_filter(double t, double beta) {
  double x = M_PI * std::abs(t) / beta;
  return (2.0 / (beta * M_PI)) * std::log1p(2.0 / std::expm1(x));
}

// g~(t) = 1/(e^{2 pi t / beta} - 1) for t > 0 (so g_beta(t) = -g~(t) there).
double g_tilde(double t, double beta) {
  return 1.0 / std::expm1(2.0 * M_PI * t / beta);
}

using RMat = Eigen::MatrixXd;

struct PanelRule {
  std::array<double, 16> x, w;  // 16-point Gauss-Legendre on [-1, 1]
  PanelRule() {
    static const double xs[8] = {0.0950125098376374, 0.2816035507792589,
                                 0.4580167776572274, 0.6178762444026438,
                                 0.7554044083550030, 0.8656312023878318,
                                 0.9445750230732326, 0.9894009349916499};
    static const double ws[8] = {0.1894506104550685, 0.1826034150449236,
                                 0.1691565193950025, 0.1495959888165767,
                                 0.1246289712555339, 0.0951585116824928,
                                 0.0622535239386479, 0.0271524594117541};
    for (int i = 0; i < 8; ++i) {
      x[i] = -xs[i];
      x[15 - i] = xs[i];
      w[i] = ws[i];
      w[15 - i] = ws[i];
    }
  }
};
const PanelRule kRule;

// Accumulate Int filter(t) trig(om t) dt (entrywise over om) with fixed panels.
// trig: cos for the f kernel, sin for the g kernel.
struct FreqIntegrator {
  const RMat& om;
  bool use_cos;
  double beta;
  RMat acc;
  long nodes_used = 0;

  FreqIntegrator(const RMat& om_, bool use_cos_, double beta_)
      : om(om_), use_cos(use_cos_), beta(beta_) {
    acc = RMat::Zero(om.rows(), om.cols());
  }

  void add_node(double t, double weight, double filter_value) {
    double c = weight * filter_value;
    if (use_cos)
      acc.array() += c * (om.array() * t).cos();
    else
      acc.array() += c * (om.array() * t).sin();
    ++nodes_used;
  }
};

// One refinement pass: integrate with `panels_left` log-substituted panels on
// (t_cut, t_split] and `panels_right` plain panels on [t_split, t_max].
RMat integrate_once(const RMat& om, bool use_cos, double beta, double t_cut,
                    double t_split, double t_max, int panels_left,
                    int panels_right, bool f_kernel, long* nodes) {
  FreqIntegrator fi(om, use_cos, beta);
  double u0 = std::log(t_cut), u1 = std::log(t_split);
  for (int p = 0; p < panels_left; ++p) {
    double a = u0 + (u1 - u0) * p / panels_left;
    double b = u0 + (u1 - u0) * (p + 1) / panels_left;
    for (int k = 0; k < 16; ++k) {
      double u = 0.5 * (b - a) * kRule.x[k] + 0.5 * (a + b);
      double t = std::exp(u);
      double w = 0.5 * (b - a) * kRule.w[k] * t;  // jacobian dt = t du
      double f = f_kernel ? f_filter(t, beta) : g_tilde(t, beta);
      fi.add_node(t, w, f);
    }
  }
  for (int p = 0; p < panels_right; ++p) {
    double a = t_split + (t_max - t_split) * p / panels_right;
    double b = t_split + (t_max - t_split) * (p + 1) / panels_right;
    for (int k = 0; k < 16; ++k) {
      double t = 0.5 * (b - a) * kRule.x[k] + 0.5 * (a + b);
      double w = 0.5 * (b - a) * kRule.w[k];
      double f = f_kernel ? f_filter(t, beta) : g_tilde(t, beta);
      fi.add_node(t, w, f);
    }
  }
  if (nodes) *nodes += fi.nodes_used;
  return fi.acc;
}

// Panel-doubling refinement to abs_tol, bounded by the node budget.
RMat integrate_refined(const RMat& om, bool use_cos, double beta, double t_cut,
                       double t_split, double t_max, bool f_kernel,
                       const QuadSpec& quad) {
  double ommax = std::max(1.0, om.cwiseAbs().maxCoeff());
  int base_right = std::max<int>(
      4, static_cast<int>(std::ceil((t_max - t_split) * (1.0 + ommax) / 4.0)));
  int base_left = std::max<int>(
      6, static_cast<int>(std::ceil(std::log(t_split / t_cut))));
  long nodes = 0;
  RMat prev = integrate_once(om, use_cos, beta, t_cut, t_split, t_max,
                             base_left, base_right, f_kernel, &nodes);
  for (int iter = 0; iter < 6; ++iter) {
    base_left *= 2;
    base_right *= 2;
    if (nodes + 16L * (base_left + base_right) > quad.node_budget)
      throw Error("quadrature-failure",
                  "node budget exhausted; last error estimate unavailable");
    RMat next = integrate_once(om, use_cos, beta, t_cut, t_split, t_max,
                               base_left, base_right, f_kernel, &nodes);
    double diff = (next - prev).cwiseAbs().maxCoeff();
    if (diff <= quad.abs_tol) return next;
    prev = std::move(next);
  }
  throw Error("quadrature-failure", "refinement did not converge");
}

double f_t_max(double beta, double abs_tol) {
  return (beta / M_PI) * std::log(4.0 / abs_tol);
}

double g_t_max(double beta, double abs_tol) {
  return (beta / (2.0 * M_PI)) * std::log(4.0 / abs_tol) + beta;
}

Mat exp_shifted(const Spectrum& sp, double beta, double shift) {
  Vec w = ((sp.eigenvalues.array() - shift) * beta).exp();
  return sp.eigenvectors * w.asDiagonal() * sp.eigenvectors.adjoint();
}

}  // namespace

double filter_eval(const FilterSpec& spec, double t) {
  if (spec.kind == FilterKind::F) return f_filter(t, spec.beta);
  if (t == 0.0) throw Error("singular-point", "g filter at t = 0");
  return -(t > 0 ? 1.0 : -1.0) * g_tilde(std::abs(t), spec.beta);
}

DenseOperator bp_generator(const DenseOperator& a, const DenseOperator& b,
                           double tau, double beta, const QuadSpec& quad) {
  if (a.sites != b.sites) throw Error("space-mismatch", "bp_generator");
  if (tau < 0.0 || tau > 1.0) throw Error("bad-tau", "tau must lie in [0,1]");
  Mat at = a.mat + tau * b.mat;
  Spectrum sp = eigh(((at + at.adjoint()) / 2.0).eval());
  Mat bt = sp.eigenvectors.adjoint() * b.mat * sp.eigenvectors;
  long n = sp.eigenvalues.size();
  RMat om(n, n);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j) om(i, j) = sp.eigenvalues[i] - sp.eigenvalues[j];
  // phi = (beta/2) Int_0^inf f(t) [B(t) + B(-t)] dt
  //     -> entrywise (beta/2) * 2 Int f(t) cos(om t) dt.
  double t_split = beta / M_PI;
  double t_max = quad.t_max > 0 ? quad.t_max : f_t_max(beta, quad.abs_tol);
  double t_cut = 1e-14 * beta;
  RMat kernel = integrate_refined(om, true, beta, t_cut, t_split, t_max, true,
                                  quad);
  // (0, t_cut] contributes ~ 2 t f(t), below tol by the choice of t_cut.
  Mat phi = (beta / 2.0) * 2.0 *
            kernel.array().cast<std::complex<double>>().matrix().cwiseProduct(bt);
  phi = ((phi + phi.adjoint()) / 2.0).eval();
  Mat out = sp.eigenvectors * phi * sp.eigenvectors.adjoint();
  return {a.sites, a.dims, std::move(out)};
}

Mat g_filter_transform(const Spectrum& h_eig, const Mat& b, double beta,
                       const QuadSpec& quad) {
  Mat bt = h_eig.eigenvectors.adjoint() * b * h_eig.eigenvectors;
  long n = h_eig.eigenvalues.size();
  RMat om(n, n);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j)
      om(i, j) = h_eig.eigenvalues[i] - h_eig.eigenvalues[j];
  // Int g(t) B(t) dt = Int_0^inf g~(t) [B(-t) - B(t)] dt, entrywise
  // -2i S(om) B~ with S(om) = Int_0^inf g~(t) sin(om t) dt. Result Hermitian.
  double t_split = beta / M_PI;
  double t_max = quad.t_max > 0 ? quad.t_max : g_t_max(beta, quad.abs_tol);
  double t_cut = 1e-6 * beta;
  RMat kernel = integrate_refined(om, false, beta, t_cut, t_split, t_max, false,
                                  quad);
  // analytic patch for [0, t_cut]: g~(t) sin(om t) ~ beta om/(2 pi) - om t / 2
  kernel.array() += (beta / (2.0 * M_PI)) * om.array() * t_cut -
                    0.25 * om.array() * t_cut * t_cut;
  Mat core = (2.0 / beta) * std::complex<double>(0, -2) *
             kernel.array().cast<std::complex<double>>().matrix().cwiseProduct(bt);
  core = ((core + core.adjoint()) / 2.0).eval();
  return h_eig.eigenvectors * core * h_eig.eigenvectors.adjoint();
}

DenseOperator bp_generator_hastings(const DenseOperator& a,
                                    const DenseOperator& b, double tau,
                                    double beta, const QuadSpec& quad) {
  if (a.sites != b.sites) throw Error("space-mismatch", "bp_generator_hastings");
  Mat at = a.mat + tau * b.mat;
  Spectrum sp = eigh(((at + at.adjoint()) / 2.0).eval());
  Mat bt = sp.eigenvectors.adjoint() * b.mat * sp.eigenvectors;
  long n = sp.eigenvalues.size();
  RMat om(n, n);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j) om(i, j) = sp.eigenvalues[i] - sp.eigenvalues[j];
  double t_split = beta / M_PI;
  double t_max = quad.t_max > 0 ? quad.t_max : g_t_max(beta, quad.abs_tol);
  double t_cut = 1e-6 * beta;
  RMat kernel = integrate_refined(om, false, beta, t_cut, t_split, t_max, false,
                                  quad);
  kernel.array() += (beta / (2.0 * M_PI)) * om.array() * t_cut -
                    0.25 * om.array() * t_cut * t_cut;
  // i Int g(t) B(t) dt is entrywise 2 S(om) B~: anti-Hermitian, do not
  // symmetrize. The full Hastings generator gains the Hermitian beta B/2.
  Mat core =
      2.0 * kernel.array().cast<std::complex<double>>().matrix().cwiseProduct(bt);
  Mat phi = (beta / 2.0) * b.mat +
            sp.eigenvectors * core * sp.eigenvectors.adjoint();
  return {a.sites, a.dims, std::move(phi)};
}

BpOperator bp_operator(const DenseOperator& a, const DenseOperator& b,
                       double beta, int n_steps, const QuadSpec& quad,
                       bool keep_trace) {
  if (n_steps < 16) throw Error("bad-steps", "bp_operator needs n_steps >= 16");
  long dim = a.dimension();
  BpOperator out;
  out.a = a;
  out.b = b;
  out.beta = beta;
  out.n_tau_steps = n_steps;
  Mat phi_prod = Mat::Identity(dim, dim);
  double dt = 1.0 / n_steps;
  for (int k = 0; k < n_steps; ++k) {
    double tau = (k + 0.5) * dt;
    DenseOperator gen = bp_generator(a, b, tau, beta, quad);
    if (keep_trace) out.generator_trace.push_back(gen);
    Spectrum sp = eigh(gen.mat);
    Vec e = (sp.eigenvalues.array() * dt).exp();
    phi_prod = (sp.eigenvectors * e.asDiagonal() * sp.eigenvectors.adjoint() *
                phi_prod)
                   .eval();
  }
  out.matrix = DenseOperator{a.sites, a.dims, phi_prod};
  // Residual against the exact identity, overflow-shifted.
  Mat apb = ((a.mat + b.mat + (a.mat + b.mat).adjoint()) / 2.0).eval();
  Spectrum sab = eigh(apb);
  double shift = sab.eigenvalues.maxCoeff();
  Mat target = exp_shifted(sab, beta, shift);
  Spectrum sa = eigh(((a.mat + a.mat.adjoint()) / 2.0).eval());
  Mat got = phi_prod * exp_shifted(sa, beta, shift) * phi_prod.adjoint();
  out.residual = op_norm(Mat(got - target)) / op_norm(target);
  return out;
}

BpTruncation bp_truncate(const BpOperator& phi, const LocalHamiltonian& h,
                         const Region& l, int r, double lr_c, double lr_v) {
  if (phi.generator_trace.empty())
    throw Error("trace-not-retained", "bp_truncate needs generator_trace");
  const Lattice& lat = h.lattice();
  Region support = extend_region(lat, boundary(lat, l), r);
  Region outside = lat.complement(support);
  BpTruncation res;
  res.support = support;
  long dim = phi.matrix.dimension();
  Mat prod = Mat::Identity(dim, dim);
  double dt = 1.0 / phi.n_tau_steps;
  double gen_err = 0;
  for (const auto& gen : phi.generator_trace) {
    DenseOperator trunc =
        outside.empty() ? gen : normalized_partial_trace(gen, outside);
    gen_err = std::max(gen_err, op_norm(gen - trunc));
    Spectrum sp = eigh(trunc.mat);
    Vec e = (sp.eigenvalues.array() * dt).exp();
    prod = (sp.eigenvectors * e.asDiagonal() * sp.eigenvectors.adjoint() * prod)
               .eval();
  }
  res.generator_error = gen_err;
  res.truncated = phi;
  res.truncated.generator_trace.clear();
  res.truncated.matrix = DenseOperator{phi.matrix.sites, phi.matrix.dims, prod};

  // State error ||e^{bH} - Phi~ e^{b(H_L + H_Lc)} Phi~+||_1 / Z_beta.
  Mat hfull = (phi.a.mat + phi.b.mat).eval();
  Spectrum sh = eigh(((hfull + hfull.adjoint()) / 2.0).eval());
  double shift = sh.eigenvalues.maxCoeff();
  Mat target = exp_shifted(sh, phi.beta, shift);
  Spectrum sa = eigh(((phi.a.mat + phi.a.mat.adjoint()) / 2.0).eval());
  Mat got = prod * exp_shifted(sa, phi.beta, shift) * prod.adjoint();
  double z = target.trace().real();
  res.state_error = trace_norm(Mat(got - target)) / z;

  // Soft reported bound from the truncated-BP lemma.
  double gamma = measured_gamma(lat);
  double mu = h.meta().mu;
  int d = lat.spatial_dim();
  double jt = jtilde0(h.meta().Jbar0, gamma, mu, d);
  int bsize = boundary(lat, l).size();
  double phibar =
      phibar_bound(phi.beta, gamma, jt, bsize, mu, lr_c, lr_v, d);
  double dh_norm = op_norm(phi.b);
  double kb = kappa_beta(mu, lr_v, phi.beta);
  res.paper_bound =
      13.0 * phibar * std::exp(2.0 * phi.beta * dh_norm - kb * r);
  return res;
}

BpLogError bp_log_error(const DenseOperator& a, const DenseOperator& b,
                        const BpOperator& phi, const BpOperator& phi_trunc) {
  Spectrum sa = eigh(((a.mat + a.mat.adjoint()) / 2.0).eval());
  double shift = sa.eigenvalues.maxCoeff();
  Mat ea = exp_shifted(sa, phi.beta, shift);
  auto log_of = [&](const Mat& p) {
    Mat m = p * ea * p.adjoint();
    m = ((m + m.adjoint()) / 2.0).eval();
    Spectrum sp = eigh(m);
    if (sp.eigenvalues.minCoeff() <= 0)
      throw Error("not-positive-definite", "bp_log_error");
    Vec w = sp.eigenvalues.array().log();
    return Mat(sp.eigenvectors * w.asDiagonal() * sp.eigenvectors.adjoint());
  };
  BpLogError out;
  out.measured = op_norm(Mat(log_of(phi.matrix.mat) -
                             log_of(phi_trunc.matrix.mat)));
  double na = op_norm(a), nb = op_norm(b);
  double beta = phi.beta;
  double nn = std::max(4.0 * M_PI, beta * na + beta * nb);
  double nu1 = 4.0 * nb * std::log(nn);
  double nu2 = nb * (14.0 * std::log(nn) + 1.0);
  // delta from ||phi - phi~|| <= delta ||B|| / 2, using the measured max.
  double delta = 0.0;
  if (!phi.generator_trace.empty() && !phi_trunc.generator_trace.empty()) {
    for (size_t k = 0; k < phi.generator_trace.size(); ++k)
      delta = std::max(delta, op_norm(phi.generator_trace[k] -
                                      phi_trunc.generator_trace[k]));
  }
  delta = nb > 0 ? 2.0 * delta / nb : 0.0;
  out.predicted = 3.0 * nn * (beta * nu1 + 1.0) * std::exp(beta * nu2) * delta;
  return out;
}

double kappa_beta(double mu, double v, double beta) {
  return std::min(M_PI * mu / (2.0 * v * beta), mu / 4.0);
}

double jtilde0(double jbar0, double gamma, double mu, int spatial_dim) {
  double dfact = spatial_dim == 1 ? 1.0 : 2.0;
  return jbar0 * gamma * std::exp(mu) * std::pow(2.0 / mu, spatial_dim) *
         dfact / (std::exp(mu / 2.0) - 1.0);
}

double phibar_bound(double beta, double gamma, double jt, int boundary_size,
                    double mu, double lr_c, double lr_v, int spatial_dim) {
  double kb = kappa_beta(mu, lr_v, beta);
  double dterm = std::pow(4.0 * spatial_dim / (M_E * mu), spatial_dim);
  double bracket = 1.0 +
                   (2.0 * beta * gamma * lr_c * lr_v * boundary_size / 7.0) *
                       dterm +
                   (8.0 / (M_PI * M_PI)) * std::log(M_E + M_E / kb) *
                       std::exp(kb) / std::expm1(kb);
  return 4.0 * beta * gamma * jt * boundary_size * std::exp(mu / 2.0) * bracket;
}

}  // namespace qml
