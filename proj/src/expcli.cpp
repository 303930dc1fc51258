#include "qml/expcli.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <unsupported/Eigen/KroneckerProduct>

#include "qml/beliefprop.hpp"
#include "qml/continuity.hpp"
#include "qml/effham.hpp"
#include "qml/fitting.hpp"
#include "qml/infomeasures.hpp"
#include "qml/learning.hpp"
#include "qml/serialize.hpp"
#include "qml/spectral.hpp"

namespace qml {

namespace {

// ---------------------------------------------------------------- schema --

struct Key {
  const char* name;
  const char* type;  // "int","num","str","bool","arr","obj"
  bool required;
};

bool type_ok(const Json& v, const std::string& t) {
  if (t == "int") return v.is_number_integer();
  if (t == "num") return v.is_number();
  if (t == "str") return v.is_string();
  if (t == "bool") return v.is_boolean();
  if (t == "arr") return v.is_array();
  if (t == "obj") return v.is_object();
  return false;
}

void check_keys(const Json& j, const std::vector<Key>& keys,
                const std::string& where) {
  if (!j.is_object()) throw Error("config-error", where + " must be an object");
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (const auto& key : keys)
      if (k == key.name) {
        known = true;
        if (!type_ok(v, key.type))
          throw Error("config-error",
                      where + "." + k + " has wrong type (want " + key.type + ")");
      }
    if (!known) throw Error("config-error", where + "." + k + " is not a known key");
  }
  for (const auto& key : keys)
    if (key.required && !j.contains(key.name))
      throw Error("config-error", where + "." + key.name + " is required");
}

const std::vector<Key> kLatticeKeys = {
    {"type", "str", true},   {"n", "int", false},        {"rows", "int", false},
    {"cols", "int", false},  {"periodic", "bool", false}, {"local_dim", "int", false}};

const std::vector<Key> kModelKeys = {
    {"model", "str", true}, {"J", "num", false},     {"g", "num", false},
    {"h", "num", false},    {"Jbar0", "num", false}, {"mu", "num", false},
    {"seed", "int", false}, {"terms", "arr", false}, {"k", "int", false}};

std::map<std::string, std::vector<Key>> command_schema() {
  std::vector<Key> common = {{"experiment", "str", false},
                             {"lattice", "obj", true},
                             {"model", "obj", true},
                             {"seed", "int", false},
                             {"out", "str", false}};
  std::map<std::string, std::vector<Key>> s;
  auto with = [&](std::initializer_list<Key> extra) {
    std::vector<Key> v = common;
    v.insert(v.end(), extra);
    return v;
  };
  s["cmi-scan"] = with({{"betas", "arr", true},
                        {"r_values", "arr", true},
                        {"mode", "str", false},
                        {"window_size", "int", false},
                        {"noise_floor", "num", false}});
  s["bp-verify"] = {{"experiment", "str", false}, {"seed", "int", false},
                    {"out", "str", false},        {"n_qubits", "int", false},
                    {"n_pairs", "int", true},     {"beta_max", "num", true},
                    {"n_steps", "int", true},     {"quad_tol", "num", true},
                    {"n_double", "int", false}};
  s["bp-truncate"] = with({{"beta", "num", true},
                           {"subset", "arr", true},
                           {"radii", "arr", true},
                           {"n_steps", "int", true},
                           {"quad_tol", "num", true}});
  s["efflog-verify"] = {{"experiment", "str", false}, {"seed", "int", false},
                        {"out", "str", false},        {"beta", "num", true},
                        {"tau_max", "num", true},     {"n_steps", "int", true},
                        {"quad_tol", "num", true},    {"eps_grid", "arr", false}};
  s["enthal-locality"] = with({{"beta", "num", true},
                               {"subset", "arr", true},
                               {"radii", "arr", true}});
  s["ptp-verify"] = with({{"subset", "arr", true},
                          {"n_states", "int", true},
                          {"tau_grid", "arr", true}});
  s["continuity-verify"] = {{"experiment", "str", false},
                            {"seed", "int", false},
                            {"out", "str", false},
                            {"dim", "int", true},
                            {"n_pairs", "int", true},
                            {"perturbation", "num", false},
                            {"fd_step", "num", false}};
  s["recovery-scan"] = with({{"beta", "num", true},
                             {"b_sizes", "arr", true},
                             {"variant", "str", false}});
  s["eof-scan"] = with({{"beta", "num", true},
                        {"anchor", "int", true},
                        {"distances", "arr", true}});
  s["mi-localize"] = with({{"beta", "num", true},
                           {"window_sizes", "arr", true}});
  s["learn-1d"] = with({{"beta", "num", true},
                        {"window", "int", true},
                        {"core_fraction", "num", true},
                        {"exact", "bool", false},
                        {"shots", "arr", false}});
  s["appendix-demo"] = {{"experiment", "str", false},
                        {"seed", "int", false},
                        {"out", "str", false},
                        {"epsilon", "num", true},
                        {"v0_grid", "arr", true}};
  return s;
}

std::vector<double> num_array(const Json& j, const std::string& where) {
  if (!j.is_array()) throw Error("config-error", where + " must be an array");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw Error("config-error", where + " must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

std::vector<int> int_array(const Json& j, const std::string& where) {
  if (!j.is_array()) throw Error("config-error", where + " must be an array");
  std::vector<int> out;
  for (const auto& v : j) {
    if (!v.is_number_integer())
      throw Error("config-error", where + " must hold integers");
    out.push_back(v.get<int>());
  }
  return out;
}

// ------------------------------------------------------------ experiments --

Region contiguous(int lo, int hi) {  // [lo, hi)
  std::vector<int> v;
  for (int s = lo; s < hi; ++s) v.push_back(s);
  return Region(std::move(v));
}

ExperimentRecord run_cmi_scan(const Json& cfg) {
  ExperimentRecord rec;
  Lattice lat = lattice_from_config(cfg.at("lattice"));
  LocalHamiltonian h = model_from_config(lat, cfg.at("model"));
  auto betas = num_array(cfg.at("betas"), "betas");
  auto r_values = int_array(cfg.at("r_values"), "r_values");
  std::string mode = cfg.value("mode", "anchored");
  double floor = cfg.value("noise_floor", 1e-12);
  int n = lat.n_sites();
  Table t;
  t.columns = {"R", "size_a", "size_b", "size_c", "beta",
               "cmi", "s_ab", "s_bc", "s_abc", "s_b"};
  DenseOperator hd = to_dense(h);
  Spectrum sp = eigh(hd.mat);
  rec.fitted["per_beta"] = Json::array();
  for (double beta : betas) {
    Vec w = ((sp.eigenvalues.array() - sp.eigenvalues.maxCoeff()) * beta).exp();
    w /= w.sum();
    Mat rho = sp.eigenvectors * w.asDiagonal() * sp.eigenvectors.adjoint();
    DenseOperator state{lat.all_sites(), lat.local_dims(), std::move(rho)};
    std::vector<double> xs, ys;
    for (int r : r_values) {
      Tripartition part;
      if (mode == "anchored") {
        int nb = r - 1;
        if (nb < 0 || nb > n - 2)
          throw Error("config-error", "r out of range for anchored mode");
        int na = (n - nb + 1) / 2;
        int nc = n - nb - na;
        part = {contiguous(0, na), contiguous(na, na + nb),
                contiguous(na + nb, n)};
      } else if (mode == "windows") {
        int ws = cfg.value("window_size", 2);
        if (ws + r - 1 + ws > n)
          throw Error("config-error", "window schedule exceeds the chain");
        part = {contiguous(0, ws), contiguous(ws, ws + r - 1),
                contiguous(ws + r - 1, ws + r - 1 + ws)};
      } else {
        throw Error("config-error", "mode must be anchored or windows");
      }
      CmiRecord c = cmi(state, part);
      int dist = distance(lat, part.a, part.c);
      t.rows.push_back({double(dist), double(part.a.size()),
                        double(part.b.size()), double(part.c.size()), beta,
                        c.cmi, c.s_ab, c.s_bc, c.s_abc, c.s_b});
      if (c.cmi > floor) {
        xs.push_back(dist);
        ys.push_back(std::log(c.cmi));
      }
    }
    Json fit;
    fit["beta"] = beta;
    if (xs.size() < 4) {
      fit["refused"] = true;
      fit["reason"] = "fewer than 4 points above the noise floor";
    } else {
      LinearFit lf = fit_linear(xs, ys);
      fit["slope"] = lf.slope;
      fit["rate"] = -lf.slope;
      fit["intercept"] = lf.intercept;
      fit["r_squared"] = lf.r_squared;
      fit["residual"] = lf.residual;
      fit["n_points"] = lf.n_points;
    }
    rec.fitted["per_beta"].push_back(fit);
  }
  rec.tables["cmi"] = std::move(t);
  return rec;
}

ExperimentRecord run_bp_verify(const Json& cfg) {
  ExperimentRecord rec;
  int nq = cfg.value("n_qubits", 3);
  int n_pairs = cfg.at("n_pairs").get<int>();
  double beta_max = cfg.at("beta_max").get<double>();
  int n_steps = cfg.at("n_steps").get<int>();
  double tol = cfg.at("quad_tol").get<double>();
  int n_double = cfg.value("n_double", 5);
  unsigned long long seed = cfg.value("seed", 1);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  long dim = 1L << nq;
  Region sites = contiguous(0, nq);
  std::vector<int> dims(nq, 2);
  auto random_herm = [&](double norm_cap) {
    Mat m(dim, dim);
    for (long i = 0; i < dim; ++i)
      for (long j = 0; j < dim; ++j)
        m(i, j) = std::complex<double>(gauss(rng), gauss(rng));
    Mat h = ((m + m.adjoint()) / 2.0).eval();
    if (norm_cap > 0) h *= norm_cap / op_norm(h);
    return DenseOperator{sites, dims, h};
  };
  Table t;
  t.columns = {"trial", "beta", "residual", "residual_2x", "phi_norm",
               "phi_norm_bound"};
  QuadSpec quad{tol, 60000, 0.0};
  double worst = 0, worst_ratio = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n_pairs; ++k) {
    DenseOperator a = random_herm(0);
    DenseOperator b = random_herm(1.0);
    double beta = 0.2 + (beta_max - 0.2) * (k % 17) / 16.0;
    BpOperator phi = bp_operator(a, b, beta, n_steps, quad);
    double res2 = std::numeric_limits<double>::quiet_NaN();
    if (k < n_double) {
      BpOperator phi2 = bp_operator(a, b, beta, 2 * n_steps, quad);
      res2 = phi2.residual;
      worst_ratio = std::min(worst_ratio, phi.residual / phi2.residual);
    }
    double bound = std::exp(beta * op_norm(b) / 2.0) * (1.0 + 10.0 * tol);
    t.rows.push_back({double(k), beta, phi.residual, res2,
                      op_norm(phi.matrix), bound});
    worst = std::max(worst, phi.residual);
  }
  rec.fitted["worst_residual"] = worst;
  rec.fitted["min_halving_gain"] = worst_ratio;
  rec.tables["bp"] = std::move(t);
  return rec;
}

ExperimentRecord run_bp_truncate(const Json& cfg) {
  ExperimentRecord rec;
  Lattice lat = lattice_from_config(cfg.at("lattice"));
  LocalHamiltonian h = model_from_config(lat, cfg.at("model"));
  double beta = cfg.at("beta").get<double>();
  Region l(int_array(cfg.at("subset"), "subset"));
  auto radii = int_array(cfg.at("radii"), "radii");
  int n_steps = cfg.at("n_steps").get<int>();
  double tol = cfg.at("quad_tol").get<double>();
  QuadSpec quad{tol, 120000, 0.0};

  DenseOperator a = to_dense(subset_hamiltonian(h, l)) +
                    to_dense(subset_hamiltonian(h, lat.complement(l)));
  DenseOperator b = to_dense(boundary_interaction(h, l));
  BpOperator phi = bp_operator(a, b, beta, n_steps, quad, true);

  // Fitted LR constants feed only the reported soft bound.
  std::vector<LrRow> lr_rows;
  Region x0{lat.n_sites() / 2};
  std::vector<double> ts{0.2, 0.4, 0.6, 0.8};
  for (int d = 1; d <= std::min(3, lat.n_sites() / 2 - 1); ++d) {
    Region y{lat.n_sites() / 2 + d};
    auto rows = lieb_robinson_profile(h, x0, y, ts, 4, 7);
    lr_rows.insert(lr_rows.end(), rows.begin(), rows.end());
  }
  LrFit lr = fit_lieb_robinson(lr_rows);

  Table t;
  t.columns = {"beta", "n_steps", "quad_tol", "residual",
               "r",    "gen_error", "state_error"};
  rec.fitted["per_radius"] = Json::array();
  std::vector<double> xs, ys;
  for (int r : radii) {
    BpTruncation tr = bp_truncate(phi, h, l, r, lr.C, lr.v);
    t.rows.push_back({beta, double(n_steps), tol, phi.residual, double(r),
                      tr.generator_error, tr.state_error});
    Json row;
    row["r"] = r;
    row["generator_error"] = tr.generator_error;
    row["state_error"] = tr.state_error;
    row["paper_bound_soft"] = tr.paper_bound;
    rec.fitted["per_radius"].push_back(row);
    if (tr.generator_error > 1e-13) {
      xs.push_back(r);
      ys.push_back(tr.generator_error);
    }
  }
  if (xs.size() >= 2) {
    ExpFit f = fit_exponential(xs, ys);
    rec.fitted["generator_decay_rate"] = -f.rate;
    rec.fitted["generator_decay_r2"] = f.r_squared;
  }
  rec.fitted["lr_fit"] = {{"C", lr.C}, {"v", lr.v}, {"mu_hat", lr.mu_hat}};
  rec.tables["bp_truncate"] = std::move(t);
  return rec;
}

ExperimentRecord run_efflog_verify(const Json& cfg) {
  ExperimentRecord rec;
  double beta = cfg.at("beta").get<double>();
  double tau_max = cfg.at("tau_max").get<double>();
  int n_steps = cfg.at("n_steps").get<int>();
  double tol = cfg.at("quad_tol").get<double>();
  unsigned long long seed = cfg.value("seed", 1);
  QuadSpec quad{tol, 60000, 0.0};
  Table t;
  t.columns = {"fixture", "beta", "tau_max", "n_steps", "recon_error"};
  // Fixture 0: single qubit A = sz, V = 0.3 sx.
  Region s1{0};
  std::vector<int> d1{2};
  Mat sz(2, 2), sx(2, 2);
  sz << 1, 0, 0, -1;
  sx << 0, 1, 1, 0;
  DenseOperator a1{s1, d1, sz}, v1{s1, d1, 0.3 * sx};
  for (int mult : {1, 2}) {
    auto res = connected_log_ode(a1, v1, beta, tau_max, n_steps * mult, quad);
    t.rows.push_back({0.0, beta, tau_max, double(n_steps * mult),
                      res.reconstruction_error});
  }
  // Fixture 1: random 2-qubit pair.
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Region s2 = contiguous(0, 2);
  std::vector<int> d2{2, 2};
  auto rnd = [&](double cap) {
    Mat m(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        m(i, j) = std::complex<double>(gauss(rng), gauss(rng));
    Mat h = ((m + m.adjoint()) / 2.0).eval();
    if (cap > 0) h *= cap / op_norm(h);
    return h;
  };
  DenseOperator a2{s2, d2, rnd(0)}, v2{s2, d2, rnd(0.5)};
  for (int mult : {1, 2}) {
    auto res = connected_log_ode(a2, v2, beta, tau_max, n_steps * mult, quad);
    t.rows.push_back({1.0, beta, tau_max, double(n_steps * mult),
                      res.reconstruction_error});
  }
  rec.tables["efflog"] = std::move(t);
  // Lemma-18 single-step slope: deviation should shrink like eps^2.
  auto eps_grid = cfg.contains("eps_grid")
                      ? num_array(cfg.at("eps_grid"), "eps_grid")
                      : std::vector<double>{1e-2, 3e-3, 1e-3, 3e-4, 1e-4};
  Table t18;
  t18.columns = {"eps", "deviation", "deviation_over_eps2"};
  Spectrum sa = eigh(a2.mat);
  Mat cgen = g_filter_transform(sa, v2.mat, beta, quad) / 2.0;
  std::vector<double> lx, ly;
  for (double eps : eps_grid) {
    Mat lhs;
    {
      Spectrum sv = eigh(v2.mat);
      Vec ev = (sv.eigenvalues.array() * eps).exp();
      Mat evm = sv.eigenvectors * ev.asDiagonal() * sv.eigenvectors.adjoint();
      Vec ea = (sa.eigenvalues.array() * beta).exp();
      Mat eam = sa.eigenvectors * ea.asDiagonal() * sa.eigenvectors.adjoint();
      Mat sand = evm * eam * evm;
      sand = ((sand + sand.adjoint()) / 2.0).eval();
      Spectrum ss = eigh(sand);
      Vec lw = ss.eigenvalues.array().log();
      lhs = ss.eigenvectors * lw.asDiagonal() * ss.eigenvectors.adjoint();
    }
    const std::complex<double> im(0, 1);
    Mat rot;
    {
      Spectrum sc = eigh(cgen);
      CVec ph(sc.eigenvalues.size());
      for (long i = 0; i < ph.size(); ++i)
        ph[i] = std::exp(-2.0 * im * eps * sc.eigenvalues[i]);
      rot = sc.eigenvectors * ph.asDiagonal() * sc.eigenvectors.adjoint();
    }
    Mat rhs = beta * rot * a2.mat * rot.adjoint() + 2.0 * eps * v2.mat;
    double dev = op_norm(Mat(lhs - rhs));
    t18.rows.push_back({eps, dev, dev / (eps * eps)});
    lx.push_back(std::log(eps));
    ly.push_back(std::log(std::max(dev, 1e-300)));
  }
  LinearFit slope = fit_linear(lx, ly);
  rec.fitted["lemma18_order"] = slope.slope;
  rec.tables["lemma18"] = std::move(t18);
  return rec;
}

ExperimentRecord run_enthal_locality(const Json& cfg) {
  ExperimentRecord rec;
  Lattice lat = lattice_from_config(cfg.at("lattice"));
  LocalHamiltonian h = model_from_config(lat, cfg.at("model"));
  double beta = cfg.at("beta").get<double>();
  Region l(int_array(cfg.at("subset"), "subset"));
  auto radii = int_array(cfg.at("radii"), "radii");
  DenseOperator rho = gibbs_state(h, beta);
  DenseOperator vstar = entanglement_hamiltonian(rho, h, l, beta).v_star;
  Region center = boundary(lat, l);
  LocalityProfile prof = locality_profile(vstar, lat, center, radii);
  Table t;
  t.columns = {"r", "value"};
  for (size_t k = 0; k < prof.values.size(); ++k)
    t.rows.push_back({double(prof.radii[k]), prof.values[k]});
  rec.fitted["fit"] = {{"amplitude", prof.fit_amplitude},
                       {"rate", prof.fit_rate},
                       {"residual", prof.fit_residual}};
  rec.tables["profile"] = std::move(t);
  return rec;
}

ExperimentRecord run_ptp_verify(const Json& cfg) {
  ExperimentRecord rec;
  Lattice lat = lattice_from_config(cfg.at("lattice"));
  Region l(int_array(cfg.at("subset"), "subset"));
  int n_states = cfg.at("n_states").get<int>();
  auto taus = num_array(cfg.at("tau_grid"), "tau_grid");
  unsigned long long seed = cfg.value("seed", 1);
  PtpOperators ptp = ptp_build(lat, l);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  long dim = 1;
  for (int d : lat.local_dims()) dim *= d;
  Table t;
  t.columns = {"state", "tau", "raw", "raw_bound", "normalized",
               "normalized_bound"};
  double worst_raw = 0, worst_norm = 0;
  for (int s = 0; s < n_states; ++s) {
    Mat g(dim, dim);
    for (long i = 0; i < dim; ++i)
      for (long j = 0; j < dim; ++j)
        g(i, j) = std::complex<double>(gauss(rng), gauss(rng));
    Mat rho = g * g.adjoint();
    rho /= rho.trace().real();
    DenseOperator state{lat.all_sites(), lat.local_dims(), std::move(rho)};
    for (double tau : taus) {
      PtpError e = ptp_error(ptp, state, tau);
      t.rows.push_back({double(s), tau, e.raw, e.raw_bound, e.normalized,
                        e.normalized_bound});
      worst_raw = std::max(worst_raw, e.raw / e.raw_bound);
      worst_norm = std::max(worst_norm, e.normalized / e.normalized_bound);
    }
  }
  rec.fitted["identity_error"] = ptp.identity_error;
  rec.fitted["worst_raw_ratio"] = worst_raw;
  rec.fitted["worst_normalized_ratio"] = worst_norm;
  rec.tables["ptp"] = std::move(t);
  return rec;
}

ExperimentRecord run_continuity_verify(const Json& cfg) {
  ExperimentRecord rec;
  int dim = cfg.at("dim").get<int>();
  int n_pairs = cfg.at("n_pairs").get<int>();
  double pert = cfg.value("perturbation", 0.05);
  double fd = cfg.value("fd_step", 1e-5);
  unsigned long long seed = cfg.value("seed", 1);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Region sites{0};
  std::vector<int> dims{dim};
  auto random_state = [&]() {
    Mat g(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j)
        g(i, j) = std::complex<double>(gauss(rng), gauss(rng));
    Mat rho = g * g.adjoint() + 1e-3 * Mat::Identity(dim, dim);
    rho /= rho.trace().real();
    return DenseOperator{sites, dims, rho};
  };
  Table t;
  t.columns = {"pair", "eps", "lambda_min", "log_gap", "bound", "delta_rs",
               "delta_sr"};
  int violations = 0, dual_violations = 0, accepted = 0;
  int attempts = 0;
  while (accepted < n_pairs && attempts < 50 * n_pairs) {
    ++attempts;
    DenseOperator rho = random_state();
    Mat e(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j)
        e(i, j) = std::complex<double>(gauss(rng), gauss(rng));
    Mat herm = pert * ((e + e.adjoint()) / 2.0);
    DenseOperator half = mat_fn(rho, MatFn::Sqrt);
    Mat smat = half.mat * (Mat::Identity(dim, dim) + herm) * half.mat;
    smat = ((smat + smat.adjoint()) / 2.0).eval();
    double tr = smat.trace().real();
    if (tr <= 0) continue;
    DenseOperator sigma{sites, dims, smat / tr};
    if (eigh_values(sigma.mat).minCoeff() <= 1e-12) continue;
    RelErrReport rep = continuity_report(rho, sigma);
    double eps = std::max(rep.delta_rho_sigma, rep.delta_sigma_rho);
    if (eps > 0.5) continue;  // rejection sampling into the theorem's regime
    ++accepted;
    if (rep.log_gap > rep.bound + 1e-12) ++violations;
    if (rep.delta_rho_sigma <= 0.5 &&
        rep.delta_sigma_rho > 2.0 * rep.delta_rho_sigma + 1e-12)
      ++dual_violations;
    t.rows.push_back({double(accepted), eps, rep.lambda_min_rho, rep.log_gap,
                      rep.bound, rep.delta_rho_sigma, rep.delta_sigma_rho});
  }
  // Log-derivative oracle vs central finite differences.
  double worst_fd = 0;
  for (int k = 0; k < 10; ++k) {
    DenseOperator rho = random_state();
    Mat e(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j)
        e(i, j) = std::complex<double>(gauss(rng), gauss(rng));
    DenseOperator delta{sites, dims, ((e + e.adjoint()) / 2.0).eval()};
    DenseOperator oracle = log_derivative_oracle(rho, delta);
    DenseOperator plus{sites, dims, rho.mat + fd * delta.mat};
    DenseOperator minus{sites, dims, rho.mat - fd * delta.mat};
    Mat fd_est =
        (mat_fn(plus, MatFn::Log).mat - mat_fn(minus, MatFn::Log).mat) /
        (2.0 * fd);
    worst_fd = std::max(worst_fd, op_norm(Mat(oracle.mat - fd_est)));
  }
  rec.fitted["pairs_accepted"] = accepted;
  rec.fitted["violations"] = violations;
  rec.fitted["dual_violations"] = dual_violations;
  rec.fitted["log_derivative_fd_gap"] = worst_fd;
  rec.tables["continuity"] = std::move(t);
  return rec;
}

ExperimentRecord run_recovery_scan(const Json& cfg) {
  ExperimentRecord rec;
  Lattice lat = lattice_from_config(cfg.at("lattice"));
  LocalHamiltonian h = model_from_config(lat, cfg.at("model"));
  double beta = cfg.at("beta").get<double>();
  auto b_sizes = int_array(cfg.at("b_sizes"), "b_sizes");
  std::string variant = cfg.value("variant", "plain");
  PetzVariant pv =
      variant == "rotated" ? PetzVariant::Rotated : PetzVariant::Plain;
  int n = lat.n_sites();
  DenseOperator rho = gibbs_state(h, beta);
  Table t;
  t.columns = {"b_size", "cmi", "petz_error", "fr_bound_soft"};
  for (int nb : b_sizes) {
    if (nb < 1 || nb > n - 2) throw Error("config-error", "bad b_size");
    int na = (n - nb + 1) / 2;
    Tripartition part{contiguous(0, na), contiguous(na, na + nb),
                      contiguous(na + nb, n)};
    CmiRecord c = cmi(rho, part);
    PetzResult pr = petz_recover(rho, part.b, part.c, pv);
    double err = trace_norm(pr.state - rho);
    t.rows.push_back({double(nb), c.cmi, err,
                      std::sqrt(std::log(2.0) * std::max(0.0, c.cmi))});
  }
  rec.tables["recovery"] = std::move(t);
  return rec;
}

ExperimentRecord run_eof_scan(const Json& cfg) {
  ExperimentRecord rec;
  Lattice lat = lattice_from_config(cfg.at("lattice"));
  LocalHamiltonian h = model_from_config(lat, cfg.at("model"));
  double beta = cfg.at("beta").get<double>();
  int anchor = cfg.at("anchor").get<int>();
  auto dists = int_array(cfg.at("distances"), "distances");
  DenseOperator rho = gibbs_state(h, beta);
  Table t;
  t.columns = {"d", "site_i", "site_j", "concurrence", "eof", "squashed_bound"};
  for (int d : dists) {
    int j = anchor + d;
    if (j >= lat.n_sites()) throw Error("config-error", "distance exceeds chain");
    DenseOperator r2 = reduce_to(rho, Region{anchor, j});
    double c = concurrence_two_qubit(r2);
    double e = eof_two_qubit(r2);
    SquashedBound sq = squashed_bound(rho, Region{anchor}, Region{j});
    t.rows.push_back({double(d), double(anchor), double(j), c, e, sq.half_cmi});
  }
  rec.tables["eof"] = std::move(t);
  return rec;
}

ExperimentRecord run_mi_localize(const Json& cfg) {
  ExperimentRecord rec;
  Lattice lat = lattice_from_config(cfg.at("lattice"));
  LocalHamiltonian h = model_from_config(lat, cfg.at("model"));
  double beta = cfg.at("beta").get<double>();
  auto windows = int_array(cfg.at("window_sizes"), "window_sizes");
  int n = lat.n_sites();
  DenseOperator rho = gibbs_state(h, beta);
  int half = n / 2;
  Region a = contiguous(0, half), b = contiguous(half, n);
  double mi_full = mutual_information(rho, a, b);
  Table t;
  t.columns = {"r", "mi_full", "mi_window", "gap"};
  for (int r : windows) {
    if (r < 1 || half - r < 0 || half + r > n)
      throw Error("config-error", "bad window size");
    Region a2 = contiguous(half - r, half), b2 = contiguous(half, half + r);
    double mi_w = mutual_information(rho, a2, b2);
    t.rows.push_back({double(r), mi_full, mi_w, mi_full - mi_w});
  }
  rec.tables["mi"] = std::move(t);
  return rec;
}

ExperimentRecord run_learn_1d(const Json& cfg) {
  ExperimentRecord rec;
  Lattice lat = lattice_from_config(cfg.at("lattice"));
  LocalHamiltonian h = model_from_config(lat, cfg.at("model"));
  double beta = cfg.at("beta").get<double>();
  int window = cfg.at("window").get<int>();
  double core = cfg.at("core_fraction").get<double>();
  unsigned long long seed = cfg.value("seed", 1);
  int n = lat.n_sites();
  ShotPlan plan;
  for (int s = 0; s + window <= n; ++s)
    plan.windows.push_back(contiguous(s, s + window));
  plan.seed = seed;
  plan.exact = cfg.value("exact", true);
  Table sweep;
  sweep.columns = {"shots", "max_err"};
  Json reports = Json::array();
  auto report_json = [&](const LearnReport& r) {
    Json j;
    j["window"] = r.window_size;
    j["shots"] = r.shots;
    j["max_err"] = r.max_err;
    j["per_coupling"] = Json::array();
    for (const auto& c : r.couplings)
      j["per_coupling"].push_back({{"sites", c.support.sites()},
                                   {"true", c.true_norm},
                                   {"est", c.est_norm},
                                   {"abs_err", c.abs_err}});
    return j;
  };
  if (plan.exact) {
    LearnReport r = learn_couplings_1d(h, beta, plan, core);
    reports.push_back(report_json(r));
    sweep.rows.push_back({-1.0, r.max_err});
  }
  if (cfg.contains("shots")) {
    plan.exact = false;
    for (double ns : num_array(cfg.at("shots"), "shots")) {
      plan.shots_per_basis = static_cast<long>(ns);
      LearnReport r = learn_couplings_1d(h, beta, plan, core);
      reports.push_back(report_json(r));
      sweep.rows.push_back({ns, r.max_err});
    }
    std::vector<double> lx, ly;
    for (const auto& row : sweep.rows)
      if (row[0] > 0 && row[1] > 0) {
        lx.push_back(std::log(row[0]));
        ly.push_back(std::log(row[1]));
      }
    if (lx.size() >= 3) {
      LinearFit lf = fit_linear(lx, ly);
      rec.fitted["shot_slope"] = lf.slope;
      rec.fitted["shot_slope_r2"] = lf.r_squared;
    }
  }
  rec.fitted["reports"] = reports;
  rec.tables["sweep"] = std::move(sweep);
  return rec;
}

ExperimentRecord run_appendix_demo(const Json& cfg) {
  ExperimentRecord rec;
  double eps = cfg.at("epsilon").get<double>();
  auto v0s = num_array(cfg.at("v0_grid"), "v0_grid");
  Region sites{0, 1};
  std::vector<int> dims{2, 2};
  Mat sz(2, 2), sx(2, 2);
  sz << 1, 0, 0, -1;
  sx << 0, 1, 1, 0;
  Mat z1 = Eigen::kroneckerProduct(sz, Mat::Identity(2, 2)).eval();
  Mat xx = Eigen::kroneckerProduct(sx, sx).eval();
  Table t;
  t.columns = {"v0", "coeff_xx", "prediction"};
  std::vector<double> xs, ys;
  for (double v0 : v0s) {
    Mat h0 = -2.0 * v0 * z1 + 4.0 * v0 * eps * xx;
    Mat v = v0 * z1;
    DenseOperator a{sites, dims, h0}, vo{sites, dims, v};
    // H_eff = log(e^V e^{H0} e^V) (beta = 1 throughout the demo)
    Spectrum sv = eigh(v);
    Vec ev = sv.eigenvalues.array().exp();
    Mat evm = sv.eigenvectors * ev.asDiagonal() * sv.eigenvectors.adjoint();
    Spectrum sh = eigh(h0);
    Vec eh = sh.eigenvalues.array().exp();
    Mat ehm = sh.eigenvectors * eh.asDiagonal() * sh.eigenvectors.adjoint();
    Mat sand = evm * ehm * evm;
    sand = ((sand + sand.adjoint()) / 2.0).eval();
    DenseOperator heff = mat_fn(DenseOperator{sites, dims, sand}, MatFn::Log);
    PauliTable table = pauli_decompose(heff);
    double coeff = table.coeff[1 * 4 + 1].real();  // XX string
    double pred = eps * std::exp(2.0 * v0);
    t.rows.push_back({v0, coeff, pred});
    xs.push_back(v0);
    ys.push_back(std::abs(coeff));
  }
  ExpFit fit = fit_exponential(xs, ys);
  rec.fitted["exponent"] = fit.rate;
  rec.fitted["exponent_r2"] = fit.r_squared;
  rec.tables["enhancement"] = std::move(t);
  return rec;
}

}  // namespace

Json validate_config(const std::string& cmd, const Json& config) {
  auto schema = command_schema();
  auto it = schema.find(cmd);
  if (it == schema.end()) throw Error("config-error", "unknown experiment " + cmd);
  check_keys(config, it->second, cmd);
  if (config.contains("lattice"))
    check_keys(config.at("lattice"), kLatticeKeys, cmd + ".lattice");
  if (config.contains("model"))
    check_keys(config.at("model"), kModelKeys, cmd + ".model");
  Json echo = config;
  echo["experiment"] = cmd;
  return echo;
}

Lattice lattice_from_config(const Json& j) {
  std::string type = j.at("type").get<std::string>();
  int local_dim = j.value("local_dim", 2);
  if (type == "chain")
    return Lattice::chain(j.at("n").get<int>(), j.value("periodic", false),
                          local_dim);
  if (type == "grid")
    return Lattice::grid2d(j.at("rows").get<int>(), j.at("cols").get<int>(),
                           local_dim);
  throw Error("config-error", "lattice.type must be chain or grid");
}

LocalHamiltonian model_from_config(const Lattice& lat, const Json& j) {
  std::string m = j.at("model").get<std::string>();
  if (m == "tfim") return build_tfim(lat, j.value("J", 1.0), j.value("g", 1.0));
  if (m == "heisenberg")
    return build_heisenberg(lat, j.value("J", 1.0), j.value("h", 0.0));
  if (m == "random_expdecay")
    return build_random_expdecay(lat, j.value("Jbar0", 1.0), j.value("mu", 1.0),
                                 j.value("seed", 1));
  if (m == "custom") {
    if (!j.contains("terms")) throw Error("config-error", "custom model needs terms");
    DecayMeta meta{j.value("Jbar0", 1.0), j.value("mu", 1.0), j.value("k", 0)};
    return build_custom(lat, terms_from_json(j.at("terms")), meta);
  }
  throw Error("config-error", "unknown model " + m);
}

ExperimentRecord run(const std::string& cmd, const Json& config) {
  Json cfg = validate_config(cmd, config);
  auto start = std::chrono::steady_clock::now();
  ExperimentRecord rec;
  if (cmd == "cmi-scan") rec = run_cmi_scan(cfg);
  else if (cmd == "bp-verify") rec = run_bp_verify(cfg);
  else if (cmd == "bp-truncate") rec = run_bp_truncate(cfg);
  else if (cmd == "efflog-verify") rec = run_efflog_verify(cfg);
  else if (cmd == "enthal-locality") rec = run_enthal_locality(cfg);
  else if (cmd == "ptp-verify") rec = run_ptp_verify(cfg);
  else if (cmd == "continuity-verify") rec = run_continuity_verify(cfg);
  else if (cmd == "recovery-scan") rec = run_recovery_scan(cfg);
  else if (cmd == "eof-scan") rec = run_eof_scan(cfg);
  else if (cmd == "mi-localize") rec = run_mi_localize(cfg);
  else if (cmd == "learn-1d") rec = run_learn_1d(cfg);
  else if (cmd == "appendix-demo") rec = run_appendix_demo(cfg);
  else throw Error("config-error", "unknown experiment " + cmd);
  rec.experiment = cmd;
  rec.config = cfg;
  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return rec;
}

unsigned long long config_hash(const Json& config) {
  // FNV-1a over the canonical (key-sorted) dump.
  std::string s = config.dump();
  unsigned long long h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void emit(const ExperimentRecord& record, const std::filesystem::path& outdir) {
  std::filesystem::create_directories(outdir);
  for (const auto& [name, table] : record.tables) {
    std::ofstream f(outdir / (name + ".csv"));
    if (!f) throw Error("io-error", "cannot open CSV for writing");
    for (size_t c = 0; c < table.columns.size(); ++c)
      f << (c ? "," : "") << table.columns[c];
    f << "\n";
    f.precision(17);
    for (const auto& row : table.rows) {
      for (size_t c = 0; c < row.size(); ++c) f << (c ? "," : "") << row[c];
      f << "\n";
    }
  }
  Json manifest;
  manifest["experiment"] = record.experiment;
  manifest["tool_version"] = kToolVersion;
  manifest["config"] = record.config;
  manifest["config_hash"] = config_hash(record.config);
  manifest["fitted"] = record.fitted;
  manifest["wall_seconds"] = record.wall_seconds;
  std::ofstream mf(outdir / "manifest.json");
  if (!mf) throw Error("io-error", "cannot open manifest for writing");
  mf << manifest.dump(2) << "\n";
}

std::vector<std::string> experiment_names() {
  std::vector<std::string> out;
  for (const auto& [k, v] : command_schema()) out.push_back(k);
  return out;
}

}  // namespace qml
