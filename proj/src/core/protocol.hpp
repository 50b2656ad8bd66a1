#pragma once

#include "core/catalyst.hpp"
#include "core/config.hpp"
#include "core/poly.hpp"

namespace qspcat {

// Diagonal signal operator: symbol 0 is the constant 1, symbol j >= 1 is the
// variable z_j. Synthesis emits symbols in canonical order (1 first, then by
// variable index); parsed protocols may carry any arrangement.
struct SignalLayer {
  std::vector<int> symbols;
};

// Alternating product A_n W_n ... W_1 A_0 applied to |0>.
struct Protocol {
  int dim = 0;       // N
  int num_vars = 1;  // m
  std::vector<SignalLayer> layers;
  std::vector<Mat> unitaries;  // n+1 matrices, N x N

  int length() const { return static_cast<int>(layers.size()); }
  void validate(double unitarity_tol) const;
};

Vec evaluate_protocol(const Protocol& p, const std::vector<Complex>& z);

// Exact symbolic expansion of the ansatz.
PolyVector protocol_polynomial(const Protocol& p);

// Unitary with U * fam_b = fam_a columnwise, extended to the full ambient
// space. Families are padded to a common dimension; their Gram matrices must
// agree within gram_tol (a mismatch is the M-QSP obstruction signal).
Mat unitary_from_gram_match(const std::vector<Vec>& fam_a, const std::vector<Vec>& fam_b,
                            const Config& cfg);

struct StripResult {
  Mat processing;    // the A peeled off the top
  PolyVector next;   // tau' = W(z)^H A^H tau, degree reduced by one
};

// One layer-stripping step of a normalized univariate tau of degree >= 1
// against the canonical layer (1,...,1,z). Uses the endpoint orthogonality
// <tau_0, tau_n> = 0.
StripResult strip_layer(const PolyVector& tau, const Config& cfg);

// Builds a protocol of length deg(tau) whose polynomial equals tau. dim = 0
// takes max(ambient_dim, 2). tau must be a normalized polynomial state.
Protocol synthesize_direct(const PolyVector& tau, const Config& cfg, int dim = 0);

// Same result, but every intermediate state is checked against the catalyst
// grading tau_+ = e^{-i phi} z v^(n-1); an inconsistent catalyst is an error.
Protocol synthesize_from_catalyst(const PolyVector& tau, const Catalyst& v,
                                  const Config& cfg);

// Max over the grid of ||protocol(z) - tau(z)||; grid = 0 picks 4*deg+1.
double verify_protocol(const Protocol& p, const PolyVector& tau, int grid_per_axis = 0);

}  // namespace qspcat
