#pragma once

#include "core/catalyst.hpp"
#include "core/config.hpp"
#include "core/poly.hpp"
#include "core/protocol.hpp"

namespace qspcat {

// Finite-label state conversion instance. Oracles act on the space M of
// dimension oracle_dim; catalyst vectors live in M (x) W laid out M-major.
struct ConversionInstance {
  int oracle_dim = 1;
  std::vector<Mat> oracles;  // one unitary per label
  std::vector<Vec> xi;       // unit vectors
  std::vector<Vec> tau;      // norms equal xi (total) or below (partial)
  bool partial = false;

  int labels() const { return static_cast<int>(oracles.size()); }
  void validate(double unitarity_tol) const;
};

struct SimReport {
  int t_queries = 0;
  double epsilon = 0.0;
  std::vector<double> error_normalized;  // per label
  std::vector<double> error_raw;
  std::vector<double> las_vegas;
  double max_error_normalized = 0.0;
  double max_error_raw = 0.0;
};

// The one-query conversion unitary S with S(xi_x + O_x v_x) = tau_x + sigma_x
// + v_x (direct sums; everything padded to a common block size). Existence is
// exactly the feasibility constraint rearranged; a Gram mismatch beyond
// gram_tol throws.
struct ConversionUnitary {
  Mat s;            // acts on C^{2*block}
  int block = 0;    // per-slot padding size
  int dim_target = 0;  // tau + sigma
  std::vector<Vec> sigma;
};

ConversionUnitary build_S(const ConversionInstance& inst, const std::vector<Vec>& v,
                          const Config& cfg);

// Simulates Algorithm-style state conversion with T = ceil(2L/eps^2) queries
// on the X/A/B registers, per label. v ~ 0 collapses to the query-free
// unitary conversion (T = 0).
SimReport run_algorithm1(const ConversionInstance& inst, const std::vector<Vec>& v,
                         double epsilon, const Config& cfg);

// Las Vegas value of a protocol at signal point z: the oracle-subspace mass
// summed over pre-oracle states.
double las_vegas_protocol(const Protocol& p, const std::vector<Complex>& z);

struct DualReport {
  bool accepted = false;
  double value = 0.0;
  double constraint_eig = 0.0;  // lambda_max(Gamma o Delta)
  double gamma_max_eig = 0.0;   // checked against 0 in partial mode
};

// Evaluates lambda_max(Gamma o E) if lambda_max(Gamma o Delta) <= 1 +
// dual_tol (and Gamma <= 0 in partial mode); rejects otherwise.
DualReport dual_certificate_value(const Mat& gamma, const ConversionInstance& inst,
                                  bool partial, const Config& cfg);

// Labels on the uniform torus grid (odd size >= 2 deg + 1); xi = |0>,
// tau_x = tau(z_x), oracle = diag(z_1..z_m).
ConversionInstance qsp_instance(const PolyVector& tau, int grid_per_axis,
                                const Config& cfg);

// Per-label catalyst vectors for a univariate qsp_instance: the stacked part
// values v_x = (+)_k v^(k)(z_x). Signal points are read off the oracle
// diagonals.
std::vector<Vec> catalyst_vectors(const Catalyst& v, const ConversionInstance& inst);

}  // namespace qspcat
