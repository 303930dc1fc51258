#include <doctest.h>

#include <random>
#include <unsupported/Eigen/KroneckerProduct>

#include "qml/fitting.hpp"
#include "qml/learning.hpp"

using namespace qml;

namespace {

Region contiguous(int lo, int hi) {
  std::vector<int> v;
  for (int s = lo; s < hi; ++s) v.push_back(s);
  return Region(std::move(v));
}

Mat pauli(char p) {
  Mat m(2, 2);
  switch (p) {
    case 'X': m << 0, 1, 1, 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default: m.setIdentity();
  }
  return m;
}

ShotPlan sliding_plan(int n, int window, unsigned long long seed, bool exact,
                      long shots = 0) {
  ShotPlan plan;
  for (int s = 0; s + window <= n; ++s)
    plan.windows.push_back(contiguous(s, s + window));
  plan.seed = seed;
  plan.exact = exact;
  plan.shots_per_basis = shots;
  return plan;
}

}  // namespace

TEST_CASE("sampling model") {
  Lattice lat = Lattice::chain(1);
  SUBCASE("exact mode returns the true expectations") {
    DenseOperator rho{Region{0}, {2},
                      (0.25 * Mat::Identity(2, 2) + 0.25 * pauli('Z')).eval()};
    rho.mat /= rho.mat.trace().real();
    ShotPlan plan;
    plan.windows = {Region{0}};
    plan.exact = true;
    auto est = sample_window_expectations(rho, plan);
    PauliTable t = pauli_decompose(rho);
    for (long c = 1; c < 4; ++c)
      CHECK(est[0].expectation[c] ==
            doctest::Approx(t.coeff[c].real() * 2.0).epsilon(1e-12));
  }
  SUBCASE("zero-variance observable is exact at any shot count") {
    CVec psi(2);
    psi << 1, 0;
    DenseOperator rho{Region{0}, {2}, (psi * psi.adjoint()).eval()};
    ShotPlan plan;
    plan.windows = {Region{0}};
    plan.exact = false;
    plan.shots_per_basis = 5;
    plan.seed = 7;
    auto est = sample_window_expectations(rho, plan);
    CHECK(est[0].expectation[3] == 1.0);  // <Z> on |0><0|
  }
  SUBCASE("estimator spread matches sqrt((1 - <P>^2)/N) within 20%") {
    Mat rho_m = 0.5 * Mat::Identity(2, 2) + 0.3 * pauli('X');
    DenseOperator rho{Region{0}, {2}, rho_m};
    long n_shots = 400;
    double truth = 0.6;
    std::vector<double> means;
    for (unsigned long long seed = 0; seed < 100; ++seed) {
      ShotPlan plan;
      plan.windows = {Region{0}};
      plan.exact = false;
      plan.shots_per_basis = n_shots;
      plan.seed = seed;
      means.push_back(sample_window_expectations(rho, plan)[0].expectation[1]);
    }
    double mean = 0, var = 0;
    for (double m : means) mean += m;
    mean /= means.size();
    for (double m : means) var += (m - mean) * (m - mean);
    var /= (means.size() - 1);
    double expect_std = std::sqrt((1 - truth * truth) / n_shots);
    CHECK(std::abs(std::sqrt(var) / expect_std - 1.0) < 0.2);
    CHECK(std::abs(mean - truth) < 3.0 * expect_std / std::sqrt(100.0));
  }
}

TEST_CASE("marginal reconstruction") {
  Lattice lat = Lattice::chain(6);
  auto h = build_tfim(lat, 1.0, 1.0);
  DenseOperator rho = gibbs_state(h, 1.0);
  Region w = contiguous(1, 3);
  SUBCASE("exact inputs reproduce the marginal") {
    ShotPlan plan;
    plan.windows = {w};
    plan.exact = true;
    auto est = sample_window_expectations(rho, plan);
    DenseOperator recon = reconstruct_marginal(est[0]);
    DenseOperator truth = reduce_to(rho, w);
    CHECK(trace_norm(recon - truth) < 1e-12);
  }
  SUBCASE("error shrinks like 1/sqrt(N)") {
    std::vector<double> lx, ly;
    DenseOperator truth = reduce_to(rho, w);
    for (long n_shots : {1000L, 10000L, 100000L, 1000000L, 10000000L}) {
      double acc = 0;
      int reps = 3;
      for (int rep = 0; rep < reps; ++rep) {
        ShotPlan plan;
        plan.windows = {w};
        plan.exact = false;
        plan.shots_per_basis = n_shots;
        plan.seed = 100 + rep;
        auto est = sample_window_expectations(rho, plan);
        acc += trace_norm(reconstruct_marginal(est[0]) - truth);
      }
      lx.push_back(std::log(double(n_shots)));
      ly.push_back(std::log(acc / reps));
    }
    LinearFit fit = fit_linear(lx, ly);
    CHECK(std::abs(fit.slope + 0.5) < 0.1);
  }
  SUBCASE("clipping at most doubles the distance to the truth") {
    DenseOperator truth = reduce_to(rho, w);
    for (unsigned long long seed = 0; seed < 20; ++seed) {
      ShotPlan plan;
      plan.windows = {w};
      plan.exact = false;
      plan.shots_per_basis = 500;
      plan.seed = seed;
      auto est = sample_window_expectations(rho, plan);
      // raw (unclipped) reconstruction
      PauliTable t;
      t.sites = w;
      t.coeff.resize(est[0].expectation.size());
      for (size_t c = 0; c < t.coeff.size(); ++c)
        t.coeff[c] = est[0].expectation[c] / 4.0;
      DenseOperator raw = pauli_reconstruct(t, {2, 2});
      double pre = trace_norm(raw - truth);
      double post = trace_norm(reconstruct_marginal(est[0]) - truth);
      CHECK(post <= 2.0 * pre + 1e-12);
    }
  }
}

TEST_CASE("entanglement-hamiltonian learning on a window") {
  Lattice lat = Lattice::chain(6);
  auto h = build_tfim(lat, 1.0, 1.0);
  DenseOperator rho = gibbs_state(h, 1.0);
  Region w = contiguous(2, 4);
  DenseOperator truth = reduce_to(rho, w);
  SUBCASE("exact inputs give a near-zero log error") {
    ShotPlan plan;
    plan.windows = {w};
    plan.exact = true;
    auto est = sample_window_expectations(rho, plan);
    LearnedLog out = learn_entanglement_hamiltonian(est[0], truth);
    CHECK(out.error < 1e-9);
  }
  SUBCASE("shot-noise run stays below 0.05 and below the paper bound") {
    ShotPlan plan;
    plan.windows = {w};
    plan.exact = false;
    plan.shots_per_basis = 1000000;
    plan.seed = 12;
    auto est = sample_window_expectations(rho, plan);
    LearnedLog out = learn_entanglement_hamiltonian(est[0], truth);
    CHECK(out.error < 0.05);
    // 23 eps / lambda_min^{3/2} with eps the operator-norm distance
    CHECK(out.error <= out.paper_bound);
  }
}

TEST_CASE("1d coupling learning") {
  SUBCASE("commuting chain with exact marginals is near-exact") {
    Lattice lat = Lattice::chain(8);
    Mat zz = Eigen::kroneckerProduct(pauli('Z'), pauli('Z')).eval();
    std::vector<LocalTerm> terms;
    for (int i = 0; i + 1 < 8; ++i)
      terms.push_back({Region{i, i + 1}, (0.8 * zz).eval()});
    auto h = build_custom(lat, terms, {0.8 * std::exp(1.0), 1.0, 1});
    LearnReport rep =
        learn_couplings_1d(h, 1.0, sliding_plan(8, 4, 1, true), 0.5);
    CHECK(!rep.couplings.empty());
    CHECK(rep.max_err < 1e-8);
  }
  SUBCASE("TFIM n=10 window 6 core 2 recovers every coupling to 1e-3") {
    Lattice lat = Lattice::chain(10);
    auto h = build_tfim(lat, 1.0, 1.0);
    LearnReport rep =
        learn_couplings_1d(h, 1.0, sliding_plan(10, 6, 1, true), 1.0 / 3.0);
    CHECK(rep.couplings.size() == 19);  // 10 fields + 9 bonds
    CHECK(rep.max_err < 1e-3);
  }
  SUBCASE("same seed reproduces the report bit for bit") {
    Lattice lat = Lattice::chain(8);
    auto h = build_tfim(lat, 1.0, 1.0);
    auto plan = sliding_plan(8, 4, 77, false, 2000);
    LearnReport r1 = learn_couplings_1d(h, 1.0, plan, 0.5);
    LearnReport r2 = learn_couplings_1d(h, 1.0, plan, 0.5);
    REQUIRE(r1.couplings.size() == r2.couplings.size());
    for (size_t k = 0; k < r1.couplings.size(); ++k) {
      CHECK(r1.couplings[k].abs_err == r2.couplings[k].abs_err);
      CHECK(r1.couplings[k].est_norm == r2.couplings[k].est_norm);
    }
  }
  SUBCASE("window too small for the declared range is rejected") {
    Lattice lat = Lattice::chain(8);
    auto h = build_tfim(lat, 1.0, 1.0);
    CHECK_THROWS_WITH_AS(
        learn_couplings_1d(h, 1.0, sliding_plan(8, 2, 1, true), 0.5),
        doctest::Contains("window-too-small"), Error);
    // core spanning the whole window leaves no shielding either
    CHECK_THROWS_WITH_AS(
        learn_couplings_1d(h, 1.0, sliding_plan(8, 3, 1, true), 1.0),
        doctest::Contains("window-too-small"), Error);
  }
  SUBCASE("median coupling error improves with the window size") {
    Lattice lat = Lattice::chain(9);
    auto h = build_tfim(lat, 1.0, 1.0);
    auto median_err = [&](int window, double frac) {
      LearnReport rep =
          learn_couplings_1d(h, 1.0, sliding_plan(9, window, 1, true), frac);
      std::vector<double> errs;
      for (const auto& c : rep.couplings) errs.push_back(c.abs_err);
      std::sort(errs.begin(), errs.end());
      return errs[errs.size() / 2];
    };
    double w4 = median_err(4, 0.5);
    double w6 = median_err(6, 1.0 / 3.0);
    CHECK(w6 <= w4 * (1 + 1e-9));
  }
}
