#include "core/poly.hpp"

#include <cmath>

namespace qspcat {

int total_degree(const MultiIndex& k) {
  int s = 0;
  for (int e : k) s += e;
  return s;
}

PolyVector::PolyVector(int num_vars, int ambient_dim)
    : num_vars_(num_vars), ambient_dim_(ambient_dim) {
  if (num_vars < 1) throw NumericError("PolyVector: num_vars must be >= 1");
  if (ambient_dim < 1) throw NumericError("PolyVector: ambient_dim must be >= 1");
}

void PolyVector::set_coeff(const MultiIndex& k, const Vec& v, double drop_tol) {
  if (static_cast<int>(k.size()) != num_vars_)
    throw NumericError("PolyVector: exponent arity mismatch");
  for (int e : k)
    if (e < 0) throw NumericError("PolyVector: negative exponent");
  if (v.size() != ambient_dim_)
    throw NumericError("PolyVector: coefficient dimension mismatch");
  if (v.norm() <= drop_tol)
    coeffs_.erase(k);
  else
    coeffs_[k] = v;
}

void PolyVector::add_coeff(const MultiIndex& k, const Vec& v, double drop_tol) {
  auto it = coeffs_.find(k);
  Vec sum = (it == coeffs_.end()) ? v : Vec(it->second + v);
  set_coeff(k, sum, drop_tol);
}

Vec PolyVector::coeff(const MultiIndex& k) const {
  auto it = coeffs_.find(k);
  return it == coeffs_.end() ? Vec(Vec::Zero(ambient_dim_)) : it->second;
}

int PolyVector::degree(int var) const {
  int d = 0;
  for (const auto& [k, v] : coeffs_) d = std::max(d, k[var]);
  return d;
}

std::vector<int> PolyVector::degrees() const {
  std::vector<int> d(num_vars_, 0);
  for (const auto& [k, v] : coeffs_)
    for (int j = 0; j < num_vars_; ++j) d[j] = std::max(d[j], k[j]);
  return d;
}

int PolyVector::max_total_degree() const {
  int d = 0;
  for (const auto& [k, v] : coeffs_) d = std::max(d, total_degree(k));
  return d;
}

Vec PolyVector::evaluate(const std::vector<Complex>& z) const {
  if (static_cast<int>(z.size()) != num_vars_)
    throw NumericError("evaluate: point arity does not match num_vars");
  Vec out = Vec::Zero(ambient_dim_);
  for (const auto& [k, v] : coeffs_) {
    Complex mono = 1.0;
    for (int j = 0; j < num_vars_; ++j)
      for (int e = 0; e < k[j]; ++e) mono *= z[j];
    out += mono * v;
  }
  return out;
}

PolyVector PolyVector::scaled(Complex factor) const {
  PolyVector out(num_vars_, ambient_dim_);
  for (const auto& [k, v] : coeffs_) out.set_coeff(k, factor * v);
  return out;
}

PolyVector PolyVector::plus(const PolyVector& other) const {
  if (other.num_vars_ != num_vars_ || other.ambient_dim_ != ambient_dim_)
    throw NumericError("plus: shape mismatch");
  PolyVector out = *this;
  for (const auto& [k, v] : other.coeffs_) out.add_coeff(k, v);
  return out;
}

PolyVector PolyVector::shifted(int var) const {
  PolyVector out(num_vars_, ambient_dim_);
  for (const auto& [k, v] : coeffs_) {
    MultiIndex k2 = k;
    k2[var] += 1;
    out.set_coeff(k2, v);
  }
  return out;
}

PolyVector PolyVector::component(int row) const {
  PolyVector out(num_vars_, 1);
  for (const auto& [k, v] : coeffs_) out.set_coeff(k, Vec::Constant(1, v[row]));
  return out;
}

PolyVector PolyVector::monomial(int num_vars, int ambient_dim, const MultiIndex& k,
                                const Vec& coeff) {
  PolyVector p(num_vars, ambient_dim);
  p.set_coeff(k, coeff);
  return p;
}

PolyVector PolyVector::scalar_univariate(const Vec& ascending_coeffs) {
  PolyVector p(1, 1);
  for (Eigen::Index i = 0; i < ascending_coeffs.size(); ++i)
    p.set_coeff({static_cast<int>(i)}, Vec::Constant(1, ascending_coeffs[i]));
  return p;
}

Vec PolyVector::univariate_coeffs() const {
  if (num_vars_ != 1 || ambient_dim_ != 1)
    throw NumericError("univariate_coeffs: polynomial is not scalar univariate");
  Vec c = Vec::Zero(degree(0) + 1);
  for (const auto& [k, v] : coeffs_) c[k[0]] = v[0];
  return c;
}

PolyVector PolyVector::stack(const std::vector<PolyVector>& parts) {
  if (parts.empty()) throw NumericError("stack: empty family");
  const int m = parts.front().num_vars();
  int dim = 0;
  for (const auto& p : parts) {
    if (p.num_vars() != m) throw NumericError("stack: num_vars mismatch");
    dim += p.ambient_dim();
  }
  PolyVector out(m, dim);
  int offset = 0;
  for (const auto& p : parts) {
    for (const auto& [k, v] : p.coeffs()) {
      Vec padded = Vec::Zero(dim);
      padded.segment(offset, p.ambient_dim()) = v;
      out.add_coeff(k, padded);
    }
    offset += p.ambient_dim();
  }
  return out;
}

Complex l2_inner(const PolyVector& p, const PolyVector& q) {
  if (p.num_vars() != q.num_vars() || p.ambient_dim() != q.ambient_dim())
    throw NumericError("l2_inner: shape mismatch");
  Complex s = 0.0;
  for (const auto& [k, v] : p.coeffs()) {
    auto it = q.coeffs().find(k);
    if (it != q.coeffs().end()) s += v.dot(it->second);
  }
  return s;
}

GramMatrix coefficient_gram(const std::vector<Vec>& family) {
  if (family.empty()) throw NumericError("coefficient_gram: empty family");
  const Eigen::Index dim = family.front().size();
  for (const auto& v : family)
    if (v.size() != dim) throw NumericError("coefficient_gram: mixed dimensions");
  GramMatrix g;
  g.entries = Mat(family.size(), family.size());
  for (std::size_t i = 0; i < family.size(); ++i)
    for (std::size_t j = 0; j < family.size(); ++j)
      g.entries(i, j) = family[i].dot(family[j]);
  return g;
}

Mat l2_gram(const std::vector<PolyVector>& family) {
  Mat g(family.size(), family.size());
  for (std::size_t i = 0; i < family.size(); ++i)
    for (std::size_t j = 0; j < family.size(); ++j)
      g(i, j) = l2_inner(family[i], family[j]);
  return g;
}

SupNormReport sup_norm_check(const PolyVector& p, int grid_per_axis, double bound,
                             double tol, bool equality_mode) {
  int maxdeg = 0;
  for (int d : p.degrees()) maxdeg = std::max(maxdeg, d);
  if (grid_per_axis < 2 * maxdeg + 1)
    throw NumericError("sup_norm_check: grid must have >= 2*deg+1 points per axis");
  const auto angles = torus_angles(grid_per_axis);
  const int m = p.num_vars();
  std::vector<int> idx(m, 0);
  SupNormReport rep;
  rep.max_norm = 0.0;
  rep.min_norm = std::numeric_limits<double>::infinity();
  while (true) {
    std::vector<Complex> z(m);
    for (int j = 0; j < m; ++j) z[j] = std::polar(1.0, angles[idx[j]]);
    const double n = p.evaluate(z).norm();
    rep.max_norm = std::max(rep.max_norm, n);
    rep.min_norm = std::min(rep.min_norm, n);
    int j = 0;
    for (; j < m; ++j) {
      if (++idx[j] < grid_per_axis) break;
      idx[j] = 0;
    }
    if (j == m) break;
  }
  rep.pass = rep.max_norm <= bound + tol &&
             (!equality_mode || rep.min_norm >= bound - tol);
  return rep;
}

PolyVector apply_unitary(const Mat& u, const PolyVector& p, double unitarity_tol) {
  if (u.rows() != p.ambient_dim() || u.cols() != p.ambient_dim())
    throw NumericError("apply_unitary: matrix does not match ambient dimension");
  if (!is_unitary(u, unitarity_tol))
    throw NumericError("apply_unitary: matrix is not unitary");
  PolyVector out(p.num_vars(), p.ambient_dim());
  for (const auto& [k, v] : p.coeffs()) out.set_coeff(k, u * v);
  return out;
}

PolyVector direct_sum(const PolyVector& p, const PolyVector& q) {
  if (p.num_vars() != q.num_vars()) throw NumericError("direct_sum: num_vars mismatch");
  return PolyVector::stack({p, q});
}

}  // namespace qspcat
