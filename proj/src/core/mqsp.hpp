#pragma once

#include "core/catalyst.hpp"
#include "core/config.hpp"
#include "core/poly.hpp"
#include "core/protocol.hpp"

namespace qspcat {

struct MqspInstance {
  PolyVector tau;           // full target, or P alone in partial mode
  std::vector<int> window;  // per-variable bound l_j >= deg_j(tau)
  bool partial = false;
};

// Block Gram matrices X^(j) of the per-variable catalyst components, all
// indexed by the window hyperrectangle {0 <= k_j < l_j} in lexicographic
// order, plus the residual Gram on the extended window {0 <= k_j <= l_j}.
struct BlockCatalystMatrices {
  int num_vars = 0;
  std::vector<int> window;
  std::vector<MultiIndex> x_index_order;
  std::vector<Mat> blocks;
  std::vector<MultiIndex> residual_index_order;
  Mat residual;
  bool partial = false;
};

struct SolveReport {
  bool converged = false;
  int iterations = 0;
  double constraint_violation = 0.0;  // max |affine residual|
  double min_block_eig = 0.0;
  double residual_min_eig = 0.0;
};

std::vector<MultiIndex> window_indices(const std::vector<int>& extents);

// Recomputes G_sigma[k,h] = delta delta - <tau_k,tau_h> - sum_j (X^(j)_{k,h} -
// X^(j)_{k-e_j,h-e_j}) from scratch on the extended window.
Mat residual_gram(const BlockCatalystMatrices& x, const PolyVector& tau);

// Douglas-Rachford alternating projections between the product of PSD cones
// and the affine displacement constraint. Total mode drives the residual to
// zero; partial mode keeps it in the PSD cone. Non-convergence is reported,
// never claimed as infeasibility.
BlockCatalystMatrices solve_feasibility(const MqspInstance& inst, const Config& cfg,
                                        SolveReport* report = nullptr);

// Log-det style reweighting: repeatedly steps against tr(W_j X^(j)) with
// W_j = (X^(j) + delta I)^{-1} and reprojects onto the feasible set, keeping
// the best (lowest total numerical rank) feasible iterate.
BlockCatalystMatrices rank_heuristic(const MqspInstance& inst,
                                     const BlockCatalystMatrices& start,
                                     const Config& cfg, SolveReport* report = nullptr,
                                     std::vector<int>* rank_history = nullptr);

std::vector<int> block_ranks(const BlockCatalystMatrices& x, const Config& cfg);

// Graded sub-catalysts: per step k the polynomial v^(k) = direct sum over j of
// the Pi_j components, each of degree <= k in total degree.
struct SubCatalysts {
  std::vector<PolyVector> combined;              // v^(k)
  std::vector<std::vector<PolyVector>> per_block;  // [k][j], ambient = stage dim
  std::vector<std::vector<int>> block_dims;        // [k][j]
};

SubCatalysts subcatalysts_from_blocks(const BlockCatalystMatrices& x, const Config& cfg);

// Factors the residual Gram into complementary polynomials appended to tau
// (partial mode); total mode returns tau unchanged after checking the
// residual is negligible.
PolyVector complete_from_residual(const PolyVector& tau, const BlockCatalystMatrices& x,
                                  const Config& cfg);

// Multivariate layer stripping guided by the sub-catalysts. tau must be the
// completed (normalized) state matching x's residual.
Protocol synthesize_mqsp(const PolyVector& tau, const SubCatalysts& subs,
                         const Config& cfg);

struct SupportReport {
  bool pass = false;
  std::vector<MultiIndex> violations;
};

// Verifies catalyst support lies in the hyperrectangle 0 <= h_j < n_j.
SupportReport support_check(const BlockCatalystMatrices& x, const std::vector<int>& n,
                            const Config& cfg);
SupportReport support_check(const Catalyst& v, const std::vector<int>& n,
                            const Config& cfg);

}  // namespace qspcat
