#include <doctest.h>

#include <random>

#include "qml/hamiltonian.hpp"
#include "qml/spectral.hpp"

using namespace qml;

TEST_CASE("tfim term count") {
  Lattice chain = Lattice::chain(4);
  LocalHamiltonian h = build_tfim(chain, 1.0, 1.0);
  int zz = 0, x = 0;
  for (const auto& t : h.terms())
    (t.support.size() == 2 ? zz : x)++;
  CHECK(zz == 3);
  CHECK(x == 4);
}

TEST_CASE("random_expdecay with mu = inf is nearest-neighbor") {
  Lattice chain = Lattice::chain(6);
  auto h = build_random_expdecay(chain, 2.0,
                                 std::numeric_limits<double>::infinity(), 42);
  CHECK(!h.terms().empty());
  for (const auto& t : h.terms()) {
    REQUIRE(t.support.size() == 2);
    CHECK(chain.distance(t.support[0], t.support[1]) == 1);
  }
}

TEST_CASE("custom term exceeding the per-site budget is a decay violation") {
  Lattice chain = Lattice::chain(3);
  Mat big = 10.0 * Mat::Identity(2, 2);
  std::vector<LocalTerm> terms{{Region{0}, big}};
  CHECK_THROWS_WITH_AS(build_custom(chain, terms, {1.0, 1.0, 1}),
                       doctest::Contains("decay-violation"), Error);
}

TEST_CASE("subset hamiltonian") {
  Lattice chain = Lattice::chain(4);
  LocalHamiltonian h = build_tfim(chain, 1.0, 1.0);
  CHECK(subset_hamiltonian(h, chain.all_sites()).terms().size() ==
        h.terms().size());
  auto sub = subset_hamiltonian(h, Region({0, 1}));
  int zz = 0, x = 0;
  for (const auto& t : sub.terms()) (t.support.size() == 2 ? zz : x)++;
  CHECK(zz == 1);
  CHECK(x == 2);
  auto single = subset_hamiltonian(h, Region{2});
  for (const auto& t : single.terms()) CHECK(t.support.size() == 1);
  CHECK(single.terms().size() == 1);
}

TEST_CASE("boundary interaction of a TFIM block") {
  Lattice chain = Lattice::chain(6);
  LocalHamiltonian h = build_tfim(chain, 1.0, 1.0);
  auto dh = boundary_interaction(h, Region({0, 1, 2}));
  REQUIRE(dh.terms().size() == 1);
  CHECK(dh.terms()[0].support == Region({2, 3}));
}

TEST_CASE("H = H_L + H_Lc + dh_L, term-by-term and dense") {
  Lattice chain = Lattice::chain(6);
  LocalHamiltonian h = build_tfim(chain, 0.7, 1.3);
  Region l({0, 1, 2});
  auto hl = subset_hamiltonian(h, l);
  auto hc = subset_hamiltonian(h, chain.complement(l));
  auto dh = boundary_interaction(h, l);
  CHECK(hl.terms().size() + hc.terms().size() + dh.terms().size() ==
        h.terms().size());
  Mat dense = to_dense(h).mat;
  Mat sum = to_dense(hl).mat + to_dense(hc).mat + to_dense(dh).mat;
  CHECK(op_norm(Mat(dense - sum)) < 1e-12 * op_norm(dense));
}

TEST_CASE("range-2 custom terms straddle a mid-chain cut twice") {
  Lattice chain = Lattice::chain(6);
  Mat zz(4, 4);
  zz.setZero();
  zz.diagonal() << 0.05, -0.05, -0.05, 0.05;
  std::vector<LocalTerm> terms;
  for (int i = 0; i + 2 < 6; ++i)
    terms.push_back({Region{i, i + 2}, zz});
  auto h = build_custom(chain, terms, {1.0, 0.5, 2});
  // L = {0,1,2}: straddling supports are {1,3} and {2,4}
  auto dh = boundary_interaction(h, Region({0, 1, 2}));
  CHECK(dh.terms().size() == 2);
}

TEST_CASE("interaction sums") {
  Lattice chain = Lattice::chain(7);
  LocalHamiltonian h = build_tfim(chain, 1.0, 1.0);
  SUBCASE("disjoint nearest-neighbor regions at distance >= 2") {
    auto s = interaction_sum(h, Region({0, 1}), Region({4, 5}));
    CHECK(s.measured == 0.0);
  }
  SUBCASE("X = Y = Lambda gives the total interaction norm") {
    auto s = interaction_sum(h, chain.all_sites(), chain.all_sites());
    double total = 0;
    for (const auto& t : h.terms()) total += t.norm();
    CHECK(s.measured == doctest::Approx(total).epsilon(1e-12));
  }
}

TEST_CASE("lemma-1 style bound holds on random exp-decay instances") {
  std::mt19937 rng(2024);
  int checked = 0;
  for (int inst = 0; inst < 10; ++inst) {
    Lattice chain = Lattice::chain(7);
    auto h = build_random_expdecay(chain, 1.5, 0.8, 100 + inst);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<int> xs, ys;
      for (int s = 0; s < 7; ++s) {
        if (rng() % 2) xs.push_back(s);
        if (rng() % 2) ys.push_back(s);
      }
      if (xs.empty() || ys.empty()) continue;
      auto s = interaction_sum(h, Region(xs), Region(ys));
      CHECK(s.measured <= s.bound * (1 + 1e-9) + 1e-12);
      ++checked;
    }
  }
  CHECK(checked >= 150);
}

TEST_CASE("declared decay metadata is verified at construction") {
  Lattice chain = Lattice::chain(6);
  auto h = build_random_expdecay(chain, 1.2, 0.6, 9);
  CHECK(h.per_site_strength() <= 1.2 * (1 + 1e-9));
  for (const auto& t : h.terms()) {
    if (t.support.size() < 2) continue;
    int d = chain.distance(t.support[0], t.support[1]);
    CHECK(t.norm() <= 1.2 * std::exp(-0.6 * d) * (1 + 1e-9));
  }
}

TEST_CASE("hermiticity of term blocks is enforced") {
  Lattice chain = Lattice::chain(2);
  Mat bad(2, 2);
  bad << 0,  1, 0, 0;
  std::vector<LocalTerm> terms{{Region{0}, bad}};
  CHECK_THROWS_WITH_AS(build_custom(chain, terms, {5.0, 1.0, 1}),
                       doctest::Contains("not-hermitian"), Error);
}
