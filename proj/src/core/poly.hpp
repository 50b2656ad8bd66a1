#pragma once

#include <map>
#include <vector>

#include "core/config.hpp"
#include "core/linalg.hpp"

namespace qspcat {

// Exponent tuple of a monomial z_1^{k_1} ... z_m^{k_m}. Ordering is
// lexicographic (std::vector's default), which is also the canonical term
// order of the JSON schema.
using MultiIndex = std::vector<int>;

int total_degree(const MultiIndex& k);

// Finitely supported map MultiIndex -> C^K: a polynomial with vector
// coefficients on the m-torus. Values are immutable in spirit; mutating
// helpers return new objects. Coefficients with norm <= drop_tol are pruned
// on insertion so supports stay finite under arithmetic.
class PolyVector {
 public:
  PolyVector(int num_vars, int ambient_dim);

  int num_vars() const { return num_vars_; }
  int ambient_dim() const { return ambient_dim_; }
  const std::map<MultiIndex, Vec>& coeffs() const { return coeffs_; }
  bool is_zero() const { return coeffs_.empty(); }

  void set_coeff(const MultiIndex& k, const Vec& v, double drop_tol = 1e-12);
  void add_coeff(const MultiIndex& k, const Vec& v, double drop_tol = 1e-12);
  Vec coeff(const MultiIndex& k) const;  // zero vector if absent

  // Max exponent of variable j over the support (0 for the zero polynomial).
  int degree(int var) const;
  std::vector<int> degrees() const;
  int max_total_degree() const;

  Vec evaluate(const std::vector<Complex>& z) const;

  PolyVector scaled(Complex factor) const;
  PolyVector plus(const PolyVector& other) const;
  // z_j * p: shifts every exponent by one in variable j.
  PolyVector shifted(int var) const;
  PolyVector component(int row) const;  // scalar slice, ambient_dim 1

  // Monomial builders.
  static PolyVector monomial(int num_vars, int ambient_dim, const MultiIndex& k,
                             const Vec& coeff);
  static PolyVector scalar_univariate(const Vec& ascending_coeffs);
  // Ascending coefficient vector of a univariate scalar polynomial.
  Vec univariate_coeffs() const;

  // Coefficient at exponent k of component `row`, ascending, length deg+1
  // (univariate only).
  static PolyVector stack(const std::vector<PolyVector>& parts);

 private:
  int num_vars_;
  int ambient_dim_;
  std::map<MultiIndex, Vec> coeffs_;
};

// Hermitian matrix of pairwise inner products with its index order.
struct GramMatrix {
  std::vector<MultiIndex> index_order;
  Mat entries;
};

struct SupNormReport {
  bool pass = false;
  double max_norm = 0.0;
  double min_norm = 0.0;
};

// <p, q> = sum_k <p_k, q_k>, the Parseval form of the normalized torus
// integral (conjugate-linear in p).
Complex l2_inner(const PolyVector& p, const PolyVector& q);

GramMatrix coefficient_gram(const std::vector<Vec>& family);
// Gram of polynomial vectors under the L^2(T^m) inner product.
Mat l2_gram(const std::vector<PolyVector>& family);

// Evaluates ||p(z)|| on a uniform grid. `pass` means max <= bound + tol; in
// equality mode additionally min >= bound - tol. Requires grid_per_axis >=
// 2*maxdeg+1 so trigonometric moments are exact.
SupNormReport sup_norm_check(const PolyVector& p, int grid_per_axis, double bound,
                             double tol, bool equality_mode);

PolyVector apply_unitary(const Mat& u, const PolyVector& p, double unitarity_tol = 1e-10);
PolyVector direct_sum(const PolyVector& p, const PolyVector& q);

}  // namespace qspcat
