#include "qml/learning.hpp"

#include <cmath>
#include <map>
#include <random>

namespace qml {

namespace {

unsigned long long splitmix64(unsigned long long x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

unsigned long long stream_key(unsigned long long seed, size_t window,
                              long code) {
  unsigned long long h = splitmix64(seed);
  h = splitmix64(h ^ (0x100000001b3ULL * (window + 1)));
  h = splitmix64(h ^ static_cast<unsigned long long>(code));
  return h;
}

}  // namespace

std::vector<WindowEstimate> sample_window_expectations(const DenseOperator& rho,
                                                       const ShotPlan& plan) {
  for (int d : rho.dims)
    if (d != 2) throw Error("qubit-only", "sample_window_expectations");
  std::vector<WindowEstimate> out;
  for (size_t wi = 0; wi < plan.windows.size(); ++wi) {
    const Region& w = plan.windows[wi];
    DenseOperator marg = reduce_to(rho, w);
    PauliTable table = pauli_decompose(marg);
    long dl = marg.dimension();
    WindowEstimate est;
    est.window = w;
    est.expectation.resize(table.coeff.size());
    est.expectation[0] = 1.0;
    for (long code = 1; code < static_cast<long>(table.coeff.size()); ++code) {
      double truth = std::clamp(table.coeff[code].real() * double(dl), -1.0, 1.0);
      if (plan.exact) {
        est.expectation[code] = truth;
        continue;
      }
      if (plan.shots_per_basis < 1)
        throw Error("bad-plan", "shots_per_basis must be >= 1");
      double p = 0.5 * (1.0 + truth);
      std::mt19937_64 rng(stream_key(plan.seed, wi, code));
      std::binomial_distribution<long> bin(plan.shots_per_basis, p);
      long k = bin(rng);
      est.expectation[code] =
          2.0 * double(k) / double(plan.shots_per_basis) - 1.0;
    }
    out.push_back(std::move(est));
  }
  return out;
}

DenseOperator reconstruct_marginal(const WindowEstimate& est, double floor) {
  int n = est.window.size();
  long dl = 1L << n;
  if (static_cast<long>(est.expectation.size()) != dl * dl)
    throw Error("bad-plan", "incomplete Pauli basis");
  PauliTable table;
  table.sites = est.window;
  table.coeff.resize(est.expectation.size());
  for (size_t c = 0; c < est.expectation.size(); ++c)
    table.coeff[c] = est.expectation[c] / double(dl);
  std::vector<int> dims(n, 2);
  DenseOperator raw = pauli_reconstruct(table, dims);
  Spectrum sp = eigh(raw.mat);
  Vec clipped = sp.eigenvalues.cwiseMax(0.0);
  if (clipped.sum() <= 0)
    throw Error("degenerate-estimate", "all eigenvalues clipped");
  clipped = clipped.cwiseMax(floor);
  clipped /= clipped.sum();
  Mat out = sp.eigenvectors * clipped.asDiagonal() * sp.eigenvectors.adjoint();
  return {est.window, dims, std::move(out)};
}

LearnedLog learn_entanglement_hamiltonian(const WindowEstimate& est,
                                          const DenseOperator& rho_true) {
  DenseOperator recon = reconstruct_marginal(est, 1e-10);
  LearnedLog out;
  out.log_marginal = mat_fn(recon, MatFn::Log);
  DenseOperator log_true = mat_fn(rho_true, MatFn::Log);
  out.error = op_norm(out.log_marginal - log_true);
  out.lambda_min = eigh_values(rho_true.mat).minCoeff();
  out.trace_dist = trace_norm(recon - rho_true);
  out.paper_bound =
      23.0 * op_norm(recon - rho_true) / std::pow(out.lambda_min, 1.5);
  return out;
}

LearnReport learn_couplings_1d(const LocalHamiltonian& h_true, double beta,
                               const ShotPlan& plan,
                               double window_core_fraction) {
  const Lattice& lat = h_true.lattice();
  if (lat.geometry() != GeometryTag::ChainOpen)
    throw Error("bad-model", "learn_couplings_1d needs an open chain");
  int n = lat.n_sites();
  int range = std::max(1, h_true.meta().k);
  if (plan.windows.empty()) throw Error("bad-plan", "no windows");
  int rw = plan.windows.front().size();
  for (const auto& w : plan.windows)
    if (w.size() != rw) throw Error("bad-plan", "windows must share a length");
  int core = std::max(1, static_cast<int>(std::lround(window_core_fraction * rw)));
  int margin = (rw - core) / 2;
  if (rw < core + 2 * range)
    throw Error("window-too-small", "window cannot shield the declared range");

  DenseOperator rho = gibbs_state(h_true, beta);
  auto estimates = sample_window_expectations(rho, plan);

  // Group true couplings by support.
  std::map<std::vector<int>, Mat> truth;
  for (const auto& t : h_true.terms()) {
    auto key = t.support.sites();
    auto it = truth.find(key);
    if (it == truth.end())
      truth.emplace(key, t.block);
    else
      it->second += t.block;
  }

  // For every coupling, pick the window with the largest clean margin.
  struct Pick {
    int window = -1;
    int margin = -1;
  };
  std::map<std::vector<int>, Pick> picks;
  for (const auto& [support, block] : truth) {
    for (size_t wi = 0; wi < plan.windows.size(); ++wi) {
      const Region& w = plan.windows[wi];
      Region sup(support);
      if (!w.contains(sup)) continue;
      int lo = w.sites().front(), hi = w.sites().back();
      bool lo_clean = lo == 0, hi_clean = hi == n - 1;
      int m = std::numeric_limits<int>::max();
      for (int s : sup.sites()) {
        int dl = lo_clean ? std::numeric_limits<int>::max() : s - lo;
        int dh = hi_clean ? std::numeric_limits<int>::max() : hi - s;
        m = std::min(m, std::min(dl, dh));
      }
      auto& p = picks[support];
      if (m > p.margin) p = {static_cast<int>(wi), m};
    }
  }

  // Decompose each window's reconstructed entanglement Hamiltonian once.
  std::vector<PauliTable> window_logs(plan.windows.size());
  std::vector<bool> have(plan.windows.size(), false);

  LearnReport rep;
  rep.window_size = rw;
  rep.shots = plan.exact ? -1 : plan.shots_per_basis;
  for (const auto& [support, block] : truth) {
    auto it = picks.find(support);
    if (it == picks.end() || it->second.margin < margin) continue;  // contaminated
    int wi = it->second.window;
    if (!have[wi]) {
      // Floor at the shot-noise resolution limit so the logarithm stays
      // finite; exact-marginal runs keep a strictly positive spectrum anyway.
      long dw = 1L << plan.windows[wi].size();
      double floor =
          plan.exact ? 0.0
                     : 1.0 / (double(dw) *
                              std::sqrt(double(plan.shots_per_basis)));
      DenseOperator recon = reconstruct_marginal(estimates[wi], floor);
      DenseOperator lg = mat_fn(recon, MatFn::Log);
      lg.mat /= beta;
      window_logs[wi] = pauli_decompose(lg);
      have[wi] = true;
    }
    const Region& w = plan.windows[wi];
    const PauliTable& table = window_logs[wi];
    // h~_Z: sum of Pauli strings supported on exactly this support.
    int nw = w.size();
    std::vector<int> pos;
    for (int s : support)
      pos.push_back(static_cast<int>(
          std::lower_bound(w.sites().begin(), w.sites().end(), s) -
          w.sites().begin()));
    PauliTable sector;
    sector.sites = Region(support);
    long dsec = 1;
    for (size_t q = 0; q < support.size(); ++q) dsec *= 4;
    sector.coeff.assign(dsec, 0.0);
    for (long code = 0; code < static_cast<long>(table.coeff.size()); ++code) {
      // support of the string = positions with non-identity digits
      long c = code;
      std::vector<int> digits(nw);
      for (int k = nw - 1; k >= 0; --k) {
        digits[k] = c % 4;
        c /= 4;
      }
      std::vector<int> sup_pos;
      for (int k = 0; k < nw; ++k)
        if (digits[k] != 0) sup_pos.push_back(k);
      if (sup_pos != pos) continue;
      long sec_code = 0;
      for (int p : pos) sec_code = sec_code * 4 + digits[p];
      sector.coeff[sec_code] = table.coeff[code];
    }
    std::vector<int> dims(support.size(), 2);
    DenseOperator est_block = pauli_reconstruct(sector, dims);
    CouplingReport cr;
    cr.support = Region(support);
    cr.true_norm = op_norm(block);
    cr.est_norm = op_norm(est_block.mat);
    cr.abs_err = op_norm(Mat(est_block.mat - block));
    rep.couplings.push_back(cr);
    rep.max_err = std::max(rep.max_err, cr.abs_err);
  }
  return rep;
}

}  // namespace qml
