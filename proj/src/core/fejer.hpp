#pragma once

#include "core/config.hpp"
#include "core/poly.hpp"

namespace qspcat {

// Laurent coefficients of G(z) = 1 - ||P(z)||^2 on the unit circle.
// c(k + n) holds c_k for k in -n..n; Hermitian symmetry c_{-k} = conj(c_k).
struct GapPolynomial {
  int n = 0;
  Vec c;
  Complex coeff(int k) const { return c[k + n]; }
};

// Finite roots of z^n G(z), classified and paired. Roots at the origin pair
// with the matching reciprocal deficit at infinity and carry partner -1, as
// do boundary roots.
struct RootInventory {
  std::vector<Complex> roots;
  std::vector<bool> boundary;
  std::vector<int> partner;
  int origin_multiplicity = 0;
};

// Accepts scalar or vector P; the gap is 1 - sum_i |P_i|^2. Throws if
// ||P|| exceeds 1 beyond gap_tol on the check grid (not completable).
GapPolynomial gap_polynomial(const PolyVector& p, const Config& cfg);

RootInventory root_inventory(const GapPolynomial& g, const Config& cfg);

// The outer complementary polynomial: no roots strictly inside the open unit
// disk, |P|^2 + |Q|^2 = 1 on T, lowest nonzero coefficient real positive.
// G identically zero yields Q = 0. Odd boundary-root clusters are an error.
PolyVector complete_outer(const PolyVector& p, const Config& cfg);

// Moves the root `alpha` of Q to 1/conj(alpha), preserving |Q| on T.
// alpha must be an actual root with |alpha| != 1.
PolyVector blaschke_flip(const PolyVector& q, Complex alpha, const Config& cfg);

// All distinct complementary polynomials reachable by flipping subsets of the
// off-circle roots of the outer completion, truncated at max_count.
std::vector<PolyVector> enumerate_completions(const PolyVector& p, int max_count,
                                              const Config& cfg);

// P extended to the normalized state P |0> + Q |K>: used by partial-mode
// catalyst computation. P may be vector-valued.
PolyVector complete_to_state(const PolyVector& p, const Config& cfg);

}  // namespace qspcat
