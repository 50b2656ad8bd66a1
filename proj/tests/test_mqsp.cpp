#include <doctest.h>

#include <random>

#include "core/mqsp.hpp"
#include "testutil.hpp"

using namespace qspcat;
using namespace qspcat::testing;

namespace {

const Config kCfg;

PolyVector z1z2() { return PolyVector::monomial(2, 1, {1, 1}, Vec::Ones(1)); }

// Hand-built sequential solution: apply z_1 first, then z_2.
BlockCatalystMatrices sequential_blocks() {
  BlockCatalystMatrices x;
  x.num_vars = 2;
  x.window = {2, 2};
  x.x_index_order = window_indices({2, 2});
  x.residual_index_order = window_indices({3, 3});
  x.blocks.assign(2, Mat::Zero(4, 4));
  // Lexicographic order: (0,0) (0,1) (1,0) (1,1).
  x.blocks[0](0, 0) = 1.0;  // Pi_1 v^(0) = 1 at (0,0)
  x.blocks[1](2, 2) = 1.0;  // Pi_2 v^(1) = z_1 at (1,0)
  x.partial = false;
  x.residual = residual_gram(x, z1z2());
  return x;
}

// Equal mixture over the m! orderings of z_1..z_m for tau = z_1...z_m.
BlockCatalystMatrices permutation_mixture(int m) {
  BlockCatalystMatrices x;
  x.num_vars = m;
  x.window.assign(m, m);
  x.x_index_order = window_indices(x.window);
  std::vector<int> ext(m, m + 1);
  x.residual_index_order = window_indices(ext);
  const int n = static_cast<int>(x.x_index_order.size());
  x.blocks.assign(m, Mat::Zero(n, n));
  auto position = [&](const MultiIndex& k) {
    int pos = 0;
    for (int j = 0; j < m; ++j) pos = pos * m + k[j];
    return pos;
  };
  std::vector<int> perm(m);
  for (int j = 0; j < m; ++j) perm[j] = j;
  int count = 0;
  do {
    ++count;
    MultiIndex k(m, 0);
    for (int step = 0; step < m; ++step) {
      // State z_{perm_0}...z_{perm_{step-1}} sits in slot perm_step.
      x.blocks[perm[step]](position(k), position(k)) += 1.0;
      k[perm[step]] += 1;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  for (auto& b : x.blocks) b /= static_cast<double>(count);
  x.partial = false;
  PolyVector tau = PolyVector::monomial(m, 1, MultiIndex(m, 1), Vec::Ones(1));
  x.residual = residual_gram(x, tau);
  return x;
}

}  // namespace

TEST_CASE("residual_gram: sequential and trivial solutions") {
  BlockCatalystMatrices x = sequential_blocks();
  CHECK(x.residual.cwiseAbs().maxCoeff() < 1e-14);

  // X = 0 with a constant target: the residual is G_0 - G_0 = 0.
  BlockCatalystMatrices zero;
  zero.num_vars = 2;
  zero.window = {1, 1};
  zero.x_index_order = window_indices({1, 1});
  zero.residual_index_order = window_indices({2, 2});
  zero.blocks.assign(2, Mat::Zero(1, 1));
  PolyVector constant = PolyVector::monomial(2, 1, {0, 0}, Vec::Ones(1));
  CHECK(residual_gram(zero, constant).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("permutation mixture is feasible for m = 2 and m = 3") {
  for (int m : {2, 3}) {
    BlockCatalystMatrices x = permutation_mixture(m);
    CHECK(x.residual.cwiseAbs().maxCoeff() < 1e-9);
    for (const auto& b : x.blocks) CHECK(min_eigenvalue(b) > -1e-12);
  }
}

TEST_CASE("solve_feasibility: z1 z2 with window (2,2)") {
  MqspInstance inst{z1z2(), {2, 2}, false};
  SolveReport rep;
  BlockCatalystMatrices x = solve_feasibility(inst, kCfg, &rep);
  CHECK(rep.converged);
  CHECK(rep.iterations <= 5000);
  CHECK(x.residual.cwiseAbs().maxCoeff() <= 1e-7);
  for (const auto& b : x.blocks) CHECK(min_eigenvalue(b) >= -1e-8);
  // Catalyst support obeys the total-degree hyperrectangle.
  CHECK(support_check(x, {2, 2}, kCfg).pass);
}

TEST_CASE("solve_feasibility: univariate target embedded in two variables") {
  PolyVector z1 = PolyVector::monomial(2, 1, {1, 0}, Vec::Ones(1));
  MqspInstance inst{z1, {2, 2}, false};
  SolveReport rep;
  BlockCatalystMatrices x = solve_feasibility(inst, kCfg, &rep);
  CHECK(rep.converged);
  CHECK(x.residual.cwiseAbs().maxCoeff() <= 1e-7);
  // The second variable never appears: its block carries no mass.
  CHECK(x.blocks[1].cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("solve_feasibility rejects windows below the degree") {
  PolyVector tau = PolyVector::monomial(2, 1, {2, 1}, Vec::Ones(1));
  MqspInstance inst{tau, {1, 2}, false};
  CHECK_THROWS_AS(solve_feasibility(inst, kCfg, nullptr), NumericError);
}

TEST_CASE("rank_heuristic reaches the sequential rank-2 point for z1 z2") {
  MqspInstance inst{z1z2(), {2, 2}, false};
  BlockCatalystMatrices start = permutation_mixture(2);
  start.window = {2, 2};
  // Embed the m=2 mixture (window m=2 already matches).
  std::vector<int> history;
  SolveReport rep;
  BlockCatalystMatrices out = rank_heuristic(inst, start, kCfg, &rep, &history);
  const auto ranks = block_ranks(out, kCfg);
  CHECK(ranks[0] + ranks[1] == 2);
  CHECK(out.residual.cwiseAbs().maxCoeff() < 1e-7);
  for (std::size_t i = 1; i < history.size(); ++i) CHECK(history[i] <= history[i - 1]);
}

TEST_CASE("rank_heuristic leaves an already-minimal point unchanged") {
  MqspInstance inst{z1z2(), {2, 2}, false};
  BlockCatalystMatrices start = sequential_blocks();
  std::vector<int> history;
  BlockCatalystMatrices out = rank_heuristic(inst, start, kCfg, nullptr, &history);
  const auto ranks = block_ranks(out, kCfg);
  CHECK(ranks[0] + ranks[1] == 2);
}

TEST_CASE("subcatalysts: sequential factorization by hand") {
  BlockCatalystMatrices x = sequential_blocks();
  SubCatalysts subs = subcatalysts_from_blocks(x, kCfg);
  REQUIRE(subs.combined.size() >= 2);
  // v^(0) lives in the Pi_1 block, constant 1.
  CHECK(subs.block_dims[0][0] == 1);
  CHECK(subs.block_dims[0][1] == 0);
  CHECK(std::abs(subs.per_block[0][0].coeff({0, 0})[0] - Complex(1.0)) < 1e-12);
  // v^(1) lives in the Pi_2 block and equals z_1.
  CHECK(subs.block_dims[1][0] == 0);
  CHECK(subs.block_dims[1][1] == 1);
  CHECK(std::abs(subs.per_block[1][1].coeff({1, 0})[0] - Complex(1.0)) < 1e-12);
}

TEST_CASE("subcatalysts: permutation mixture has two-dimensional stages") {
  BlockCatalystMatrices x = permutation_mixture(2);
  SubCatalysts subs = subcatalysts_from_blocks(x, kCfg);
  CHECK(subs.combined[0].ambient_dim() == 2);
  CHECK(subs.combined[1].ambient_dim() == 2);
  // Gram of the reconstruction reproduces each block.
  for (int j = 0; j < 2; ++j) {
    Mat recon = Mat::Zero(4, 4);
    for (int k = 0; k < 2; ++k) {
      const PolyVector& part = subs.per_block[k][j];
      if (subs.block_dims[k][j] == 0) continue;
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
          recon(a, b) += part.coeff(x.x_index_order[a]).dot(part.coeff(x.x_index_order[b]));
    }
    CHECK((recon - x.blocks[j]).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("subcatalysts: univariate embedding reduces to the scalar grading") {
  PolyVector tau = PolyVector::monomial(1, 1, {3}, Vec::Ones(1));
  MqspInstance inst{tau, {3}, false};
  BlockCatalystMatrices x = solve_feasibility(inst, kCfg, nullptr);
  SubCatalysts subs = subcatalysts_from_blocks(x, kCfg);
  REQUIRE(subs.combined.size() == 3);
  for (int k = 0; k < 3; ++k) {
    CHECK(subs.combined[k].ambient_dim() == 1);
    CHECK(std::abs(subs.combined[k].coeff({k})[0] - Complex(1.0)) < 1e-6);
  }
}

TEST_CASE("synthesize_mqsp: sequential catalyst gives layers [z1],[z2]") {
  BlockCatalystMatrices x = sequential_blocks();
  SubCatalysts subs = subcatalysts_from_blocks(x, kCfg);
  Protocol p = synthesize_mqsp(z1z2(), subs, kCfg);
  CHECK(p.length() == 2);
  CHECK(p.dim == 1);
  REQUIRE(p.layers.size() == 2);
  CHECK(p.layers[0].symbols == std::vector<int>{1});
  CHECK(p.layers[1].symbols == std::vector<int>{2});
  CHECK(verify_protocol(p, z1z2()) < 1e-10);
}

TEST_CASE("synthesize_mqsp: permutation mixture reproduces the cyclic protocol") {
  for (int m : {2, 3}) {
    PolyVector tau = PolyVector::monomial(m, 1, MultiIndex(m, 1), Vec::Ones(1));
    BlockCatalystMatrices x = permutation_mixture(m);
    SubCatalysts subs = subcatalysts_from_blocks(x, kCfg);
    Protocol p = synthesize_mqsp(tau, subs, kCfg);
    CHECK(p.length() == m);
    CHECK(verify_protocol(p, tau) < 1e-8);
  }
}

TEST_CASE("support_check flags shifted supports") {
  BlockCatalystMatrices x = sequential_blocks();
  CHECK(support_check(x, {2, 2}, kCfg).pass);
  // Shift the Pi_2 mass to index (1,1): leaves the degree-<=1 stage structure.
  x.blocks[1].setZero();
  x.blocks[1](3, 3) = 1.0;
  const auto rep = support_check(x, {1, 1}, kCfg);
  CHECK_FALSE(rep.pass);
  REQUIRE(rep.violations.size() == 1);
  CHECK(rep.violations[0] == MultiIndex{1, 1});

  PolyVector z3 = PolyVector::monomial(1, 1, {3}, Vec::Ones(1));
  MqspInstance inst{z3, {3}, false};
  BlockCatalystMatrices u = solve_feasibility(inst, kCfg, nullptr);
  CHECK(support_check(u, {3}, kCfg).pass);
}

TEST_CASE("convexity: midpoints of feasible points stay feasible") {
  BlockCatalystMatrices a = sequential_blocks();
  BlockCatalystMatrices b = permutation_mixture(2);
  BlockCatalystMatrices mid = a;
  for (int j = 0; j < 2; ++j) mid.blocks[j] = 0.5 * (a.blocks[j] + b.blocks[j]);
  mid.residual = residual_gram(mid, z1z2());
  CHECK(mid.residual.cwiseAbs().maxCoeff() < 1e-12);
  for (const auto& blk : mid.blocks) CHECK(min_eigenvalue(blk) > -1e-12);
}

TEST_CASE("partial mode: bare P completed through the residual") {
  // P = (z1 + z2)/2 admits complements; window (2,2).
  PolyVector p(2, 1);
  p.set_coeff({1, 0}, Vec::Constant(1, 0.5));
  p.set_coeff({0, 1}, Vec::Constant(1, 0.5));
  MqspInstance inst{p, {2, 2}, true};
  SolveReport rep;
  BlockCatalystMatrices x = solve_feasibility(inst, kCfg, &rep);
  CHECK(rep.converged);
  CHECK(min_eigenvalue(x.residual) > -1e-8);
  PolyVector completed = complete_from_residual(p, x, kCfg);
  CHECK(completed.ambient_dim() > 1);
  const auto nrep =
      sup_norm_check(completed, 4 * completed.max_total_degree() + 5, 1.0, 1e-6, true);
  CHECK(nrep.pass);
  SubCatalysts subs = subcatalysts_from_blocks(x, kCfg);
  Protocol proto = synthesize_mqsp(completed, subs, kCfg);
  CHECK(verify_protocol(proto, completed) < 1e-6);
}

TEST_CASE("m = 1 pipeline matches the univariate modules") {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 5; ++trial) {
    const int deg = 1 + static_cast<int>(rng() % 5);
    PolyVector tau = random_completed_tau(2, deg, rng);
    MqspInstance inst{tau, {deg}, false};
    SolveReport rep;
    BlockCatalystMatrices x = solve_feasibility(inst, kCfg, &rep);
    CHECK(rep.converged);
    CatalystMatrix closed = catalyst_gram(tau, kCfg);
    CHECK((x.blocks[0] - closed.x).cwiseAbs().maxCoeff() < 1e-7);
    SubCatalysts subs = subcatalysts_from_blocks(x, kCfg);
    Protocol via_mqsp = synthesize_mqsp(tau, subs, kCfg);
    Protocol direct = synthesize_direct(tau, kCfg);
    CHECK(verify_protocol(via_mqsp, tau) < 1e-8);
    CHECK(verify_protocol(direct, protocol_polynomial(via_mqsp)) < 1e-8);
  }
}
