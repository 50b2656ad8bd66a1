#include <doctest.h>

#include <random>

#include "core/fejer.hpp"
#include "testutil.hpp"

using namespace qspcat;
using namespace qspcat::testing;

namespace {

const Config kCfg;

PolyVector half_one_plus_z() {
  return PolyVector::scalar_univariate((Vec(2) << 0.5, 0.5).finished());
}

double completion_defect(const PolyVector& p, const PolyVector& q) {
  PolyVector state = direct_sum(p, q);
  const int deg = std::max(state.degree(0), 1);
  const auto rep = sup_norm_check(state, 4 * deg + 1, 1.0, 1e300, false);
  return std::max(std::abs(rep.max_norm - 1.0), std::abs(rep.min_norm - 1.0));
}

}  // namespace

TEST_CASE("gap_polynomial coefficients") {
  PolyVector half_z = PolyVector::scalar_univariate((Vec(2) << 0.0, 0.5).finished());
  GapPolynomial g = gap_polynomial(half_z, kCfg);
  CHECK(std::abs(g.coeff(0) - Complex(0.75)) < 1e-15);
  CHECK(std::abs(g.coeff(1)) < 1e-15);
  CHECK(std::abs(g.coeff(-1)) < 1e-15);

  GapPolynomial g2 = gap_polynomial(half_one_plus_z(), kCfg);
  CHECK(std::abs(g2.coeff(0) - Complex(0.5)) < 1e-15);
  CHECK(std::abs(g2.coeff(1) - Complex(-0.25)) < 1e-15);
  CHECK(std::abs(g2.coeff(-1) - Complex(-0.25)) < 1e-15);

  for (int n : {1, 3, 6}) {
    PolyVector zn = PolyVector::monomial(1, 1, {n}, Vec::Ones(1));
    GapPolynomial gz = gap_polynomial(zn, kCfg);
    CHECK(gz.c.cwiseAbs().maxCoeff() < 1e-15);
  }

  PolyVector too_big = PolyVector::scalar_univariate((Vec(2) << 0.0, 2.0).finished());
  CHECK_THROWS_AS(gap_polynomial(too_big, kCfg), NumericError);
}

TEST_CASE("complete_outer: constant complement") {
  PolyVector half_z = PolyVector::scalar_univariate((Vec(2) << 0.0, 0.5).finished());
  PolyVector q = complete_outer(half_z, kCfg);
  CHECK(q.degree(0) == 0);
  CHECK(std::abs(q.coeff({0})[0] - Complex(std::sqrt(3.0) / 2.0)) < 1e-12);
}

TEST_CASE("complete_outer: boundary double root splits evenly") {
  PolyVector q = complete_outer(half_one_plus_z(), kCfg);
  // Q = (1 - z)/2 with the lowest coefficient real positive.
  CHECK(q.degree(0) == 1);
  CHECK(std::abs(q.coeff({0})[0] - Complex(0.5)) < 1e-7);
  CHECK(std::abs(q.coeff({1})[0] - Complex(-0.5)) < 1e-7);
  CHECK(completion_defect(half_one_plus_z(), q) < 1e-9);
}

TEST_CASE("complete_outer: unimodular P yields the zero complement") {
  PolyVector one = PolyVector::monomial(1, 1, {0}, Vec::Ones(1));
  CHECK(complete_outer(one, kCfg).is_zero());
  PolyVector z5 = PolyVector::monomial(1, 1, {5}, Vec::Ones(1));
  CHECK(complete_outer(z5, kCfg).is_zero());
}

TEST_CASE("complete_outer: outer roots and normalization on random inputs") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const int deg = 1 + static_cast<int>(rng() % 12);
    PolyVector p = random_scaled_p(deg, 0.95, rng);
    PolyVector q = complete_outer(p, kCfg);
    CHECK(q.degree(0) <= deg);
    CHECK(completion_defect(p, q) < 1e-9);
    // Outer: no roots strictly inside the open unit disk.
    const Vec qc = q.univariate_coeffs();
    if (qc.size() > 1)
      for (const Complex& r : polynomial_roots(qc))
        CHECK(std::abs(r) > 1.0 - 1e-7);
    // Phase convention: lowest nonzero coefficient real positive.
    for (Eigen::Index i = 0; i < qc.size(); ++i) {
      if (std::abs(qc[i]) > 1e-12) {
        CHECK(qc[i].real() > 0.0);
        CHECK(std::abs(qc[i].imag()) < 1e-10 * qc[i].real());
        break;
      }
    }
  }
}

TEST_CASE("root inventory: reciprocal pairing and multiplicity budget") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    const int deg = 2 + static_cast<int>(rng() % 8);
    PolyVector p = random_scaled_p(deg, 0.9, rng);
    GapPolynomial g = gap_polynomial(p, kCfg);
    RootInventory inv = root_inventory(g, kCfg);
    CHECK(static_cast<int>(inv.roots.size()) ==
          2 * g.n - inv.origin_multiplicity);
    for (std::size_t i = 0; i < inv.roots.size(); ++i) {
      if (inv.boundary[i] || std::abs(inv.roots[i]) < 1e-9) continue;
      REQUIRE(inv.partner[i] >= 0);
      const Complex want = 1.0 / std::conj(inv.roots[i]);
      const double rel =
          std::abs(inv.roots[inv.partner[i]] - want) / std::max(1.0, std::abs(want));
      CHECK(rel < 1e-6);
    }
  }
}

TEST_CASE("blaschke_flip: root moves, modulus preserved, involution") {
  // Q with a single root at 2.
  PolyVector q = PolyVector::scalar_univariate((Vec(2) << -2.0, 1.0).finished());
  PolyVector flipped = blaschke_flip(q, Complex(2.0, 0.0), kCfg);
  const auto roots = polynomial_roots(flipped.univariate_coeffs());
  REQUIRE(roots.size() == 1);
  CHECK(std::abs(roots[0] - Complex(0.5)) < 1e-12);

  PolyVector back = blaschke_flip(flipped, Complex(0.5, 0.0), kCfg);
  CHECK((back.univariate_coeffs() - q.univariate_coeffs()).norm() < 1e-12);

  // |Q'| = |Q| on a 64-point grid for a random completion.
  std::mt19937_64 rng(13);
  PolyVector p = random_scaled_p(5, 0.9, rng);
  PolyVector q5 = complete_outer(p, kCfg);
  const auto q5_roots = polynomial_roots(q5.univariate_coeffs());
  REQUIRE(!q5_roots.empty());
  PolyVector q5f = blaschke_flip(q5, q5_roots.front(), kCfg);
  for (double theta : torus_angles(64)) {
    const auto z = torus_point(theta);
    CHECK(std::abs(q5f.evaluate(z).norm() - q5.evaluate(z).norm()) < 1e-10);
  }

  CHECK_THROWS_AS(blaschke_flip(q, Complex(3.0, 0.0), kCfg), NumericError);
  PolyVector circle_root =
      PolyVector::scalar_univariate((Vec(2) << -1.0, 1.0).finished());
  CHECK_THROWS_AS(blaschke_flip(circle_root, Complex(1.0, 0.0), kCfg), NumericError);
}

TEST_CASE("enumerate_completions: counts") {
  // Only root on the circle: a single completion.
  CHECK(enumerate_completions(half_one_plus_z(), 100, kCfg).size() == 1);

  PolyVector half_z = PolyVector::scalar_univariate((Vec(2) << 0.0, 0.5).finished());
  CHECK(enumerate_completions(half_z, 100, kCfg).size() == 1);

  // Degree-2 with two distinct off-circle roots: 4 completions.
  std::mt19937_64 rng(41);
  PolyVector p2 = random_scaled_p(2, 0.9, rng);
  const auto all = enumerate_completions(p2, 100, kCfg);
  CHECK(all.size() == 4);
  for (const auto& q : all) CHECK(completion_defect(p2, q) < 1e-9);

  CHECK(enumerate_completions(p2, 3, kCfg).size() == 3);
}

TEST_CASE("flip-all-roots and conjugate-reverse reproduces |Q|") {
  std::mt19937_64 rng(59);
  PolyVector p = random_scaled_p(4, 0.9, rng);
  PolyVector q = complete_outer(p, kCfg);
  PolyVector cur = q;
  for (const Complex& r : polynomial_roots(q.univariate_coeffs()))
    if (std::abs(std::abs(r) - 1.0) > 1e-7) cur = blaschke_flip(cur, r, kCfg);
  // Conjugate-reverse of the fully flipped polynomial.
  Vec c = cur.univariate_coeffs();
  Vec rev(c.size());
  for (Eigen::Index i = 0; i < c.size(); ++i) rev[i] = std::conj(c[c.size() - 1 - i]);
  PolyVector reversed = PolyVector::scalar_univariate(rev);
  for (double theta : torus_angles(4 * 4 + 1)) {
    const auto z = torus_point(theta);
    CHECK(std::abs(reversed.evaluate(z).norm() - q.evaluate(z).norm()) < 1e-9);
  }
}

TEST_CASE("complete_to_state extends partial vectors") {
  std::mt19937_64 rng(3);
  PolyVector p = random_scaled_p(6, 0.8, rng);
  PolyVector state = complete_to_state(p, kCfg);
  CHECK(state.ambient_dim() == 2);
  CHECK(sup_norm_check(state, 4 * 6 + 1, 1.0, 1e-9, true).pass);
  // Already normalized input comes back untouched.
  PolyVector z2 = PolyVector::monomial(1, 1, {2}, Vec::Ones(1));
  CHECK(complete_to_state(z2, kCfg).ambient_dim() == 1);
}
