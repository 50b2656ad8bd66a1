#pragma once

#include "core/config.hpp"
#include "core/poly.hpp"

namespace qspcat {

struct Protocol;

// Gram matrix of the unique univariate catalyst, indexed 0..n-1.
struct CatalystMatrix {
  int n = 0;
  Mat x;
};

// Graded family v^(0..n-1); part k has degree <= k with real nonnegative
// leading coefficient. Parts are scalar for univariate targets and may have
// larger ambient dimension in the multivariate pipeline.
struct Catalyst {
  std::vector<PolyVector> parts;
};

struct DisplacementReport {
  bool pass = false;
  double max_residual = 0.0;    // max |equality violation| over the window
  double residual_min_eig = 0.0;
  Mat residual;                 // window (n+1) x (n+1), total-degree order 0..n
};

// Closed-form solution of the displacement system for a normalized univariate
// tau: X_{k,h} = sum_{j>=0} delta_{k-j,0} delta_{h-j,0} - <tau_{k-j}, tau_{h-j}>.
// window = 0 takes deg(tau); a larger window pads zero rows.
CatalystMatrix catalyst_gram(const PolyVector& tau, const Config& cfg, int window = 0);

// Checks delta_{k,0} delta_{h,0} - <tau_k, tau_h> = X_{k,h} - X_{k-1,h-1} on
// {0..n}^2 (X read as 0 outside {0..n-1}^2). Total mode passes on equality to
// tol; partial mode accepts any residual Gram that is PSD within tol.
DisplacementReport verify_displacement(const CatalystMatrix& x, const PolyVector& tau,
                                       double tol, bool partial = false);

// Cholesky-style factorization X = V^H V with V lower triangular; row k of V
// becomes v^(k). Rank-deficient X falls back to an eigenvalue factorization
// with clipped spectrum, producing zero trailing parts.
Catalyst catalyst_from_gram(const CatalystMatrix& x, const Config& cfg);

// c * v, feasible for |0> -> c*tau with residual Gram (1-c^2) G_xi. Requires
// 0 < c <= 1.
Catalyst scale_catalyst(const Catalyst& v, double c);

// Runs the protocol symbolically on |0> and collects the oracle-subspace
// projection of every intermediate state; their direct sum is a catalyst for
// the protocol's output polynomial.
Catalyst catalyst_from_protocol(const Protocol& p, const Config& cfg);

// max_z sum_k ||v^(k)(z)||^2 on a uniform grid (the Las Vegas objective).
double catalyst_objective(const Catalyst& v, int grid_per_axis = 0);

Mat catalyst_coefficient_gram(const Catalyst& v);

}  // namespace qspcat
