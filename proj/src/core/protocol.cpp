#include "core/protocol.hpp"

#include <cmath>

namespace qspcat {
namespace {

PolyVector apply_linear(const Mat& a, const PolyVector& p) {
  PolyVector out(p.num_vars(), static_cast<int>(a.rows()));
  for (const auto& [k, vec] : p.coeffs()) out.set_coeff(k, a * vec);
  return out;
}

PolyVector apply_layer(const SignalLayer& layer, const PolyVector& p) {
  PolyVector out(p.num_vars(), p.ambient_dim());
  for (const auto& [k, vec] : p.coeffs()) {
    for (int r = 0; r < p.ambient_dim(); ++r) {
      if (vec[r] == Complex(0.0)) continue;
      MultiIndex k2 = k;
      if (layer.symbols[r] != 0) k2[layer.symbols[r] - 1] += 1;
      Vec unit = Vec::Zero(p.ambient_dim());
      unit[r] = vec[r];
      out.add_coeff(k2, unit);
    }
  }
  return out;
}

PolyVector pad_ambient(const PolyVector& p, int dim) {
  if (p.ambient_dim() == dim) return p;
  if (p.ambient_dim() > dim) throw NumericError("pad_ambient: cannot shrink");
  PolyVector out(p.num_vars(), dim);
  for (const auto& [k, vec] : p.coeffs()) {
    Vec v = Vec::Zero(dim);
    v.head(p.ambient_dim()) = vec;
    out.set_coeff(k, v);
  }
  return out;
}

// Numerical degree after discarding leading coefficients below tol.
int effective_degree(const PolyVector& tau, double tol) {
  int deg = tau.degree(0);
  while (deg > 0 && tau.coeff({deg}).norm() <= tol) --deg;
  return deg;
}

// Newton retraction onto the normalized manifold: tau <- tau * (1 - g/2)
// truncated, where g(z) = <tau(z),tau(z)> - 1. Squares the normalization
// defect, which otherwise compounds geometrically across strips.
PolyVector renormalize_state(const PolyVector& tau, double guard) {
  const int n = tau.degree(0);
  Vec g = Vec::Zero(2 * n + 1);  // g[k+n] holds the z^k coefficient
  for (int k = -n; k <= n; ++k) {
    Complex s = (k == 0) ? -1.0 : 0.0;
    for (int j = std::max(0, -k); j <= n - std::max(0, k); ++j)
      s += tau.coeff({j}).dot(tau.coeff({j + k}));
    g[k + n] = s;
  }
  const double defect = g.cwiseAbs().maxCoeff();
  if (defect > guard)
    throw NumericError("state is not normalized (defect " + std::to_string(defect) +
                       ")");
  if (defect < 1e-15) return tau;
  PolyVector out(1, tau.ambient_dim());
  for (int k = 0; k <= n; ++k) {
    Vec c = tau.coeff({k});
    for (int j = 0; j <= n; ++j) {
      const int gk = k - j;
      if (gk < -n || gk > n) continue;
      c -= 0.5 * g[gk + n] * tau.coeff({j});
    }
    out.set_coeff({k}, c);
  }
  return out;
}

SignalLayer canonical_layer(int dim) {
  SignalLayer layer;
  layer.symbols.assign(dim, 0);
  layer.symbols.back() = 1;  // single z slot at the end
  return layer;
}

}  // namespace

void Protocol::validate(double unitarity_tol) const {
  if (dim < 1) throw NumericError("protocol: dimension must be >= 1");
  if (num_vars < 1) throw NumericError("protocol: num_vars must be >= 1");
  if (unitaries.size() != layers.size() + 1)
    throw NumericError("protocol: need exactly len(layers)+1 processing operators");
  for (const auto& a : unitaries) {
    if (a.rows() != dim || a.cols() != dim)
      throw NumericError("protocol: processing operator has wrong shape");
    if (!is_unitary(a, unitarity_tol))
      throw NumericError("protocol: processing operator is not unitary");
  }
  for (const auto& layer : layers) {
    if (static_cast<int>(layer.symbols.size()) != dim)
      throw NumericError("protocol: signal layer has wrong length");
    bool has_one = false, has_z = false;
    for (int s : layer.symbols) {
      if (s < 0 || s > num_vars)
        throw NumericError("protocol: signal symbol out of range");
      (s == 0 ? has_one : has_z) = true;
    }
    if (num_vars == 1 && dim >= 2 && (!has_one || !has_z))
      throw NumericError("protocol: univariate layers need both a 1 and a z symbol");
  }
}

Vec evaluate_protocol(const Protocol& p, const std::vector<Complex>& z) {
  if (static_cast<int>(z.size()) != p.num_vars)
    throw NumericError("evaluate_protocol: signal arity mismatch");
  Vec state = p.unitaries[0].col(0);
  for (int i = 0; i < p.length(); ++i) {
    for (int r = 0; r < p.dim; ++r) {
      const int s = p.layers[i].symbols[r];
      if (s != 0) state[r] *= z[s - 1];
    }
    state = p.unitaries[i + 1] * state;
  }
  return state;
}

PolyVector protocol_polynomial(const Protocol& p) {
  PolyVector state(p.num_vars, p.dim);
  state.set_coeff(MultiIndex(p.num_vars, 0), p.unitaries[0].col(0));
  for (int i = 0; i < p.length(); ++i)
    state = apply_linear(p.unitaries[i + 1], apply_layer(p.layers[i], state));
  return state;
}

Mat unitary_from_gram_match(const std::vector<Vec>& fam_a, const std::vector<Vec>& fam_b,
                            const Config& cfg) {
  if (fam_a.size() != fam_b.size() || fam_a.empty())
    throw NumericError("unitary_from_gram_match: families must match and be nonempty");
  Eigen::Index dim = 0;
  for (const auto& v : fam_a) dim = std::max(dim, v.size());
  for (const auto& v : fam_b) dim = std::max(dim, v.size());
  Mat fa = Mat::Zero(dim, fam_a.size());
  Mat fb = Mat::Zero(dim, fam_b.size());
  for (std::size_t i = 0; i < fam_a.size(); ++i) fa.col(i).head(fam_a[i].size()) = fam_a[i];
  for (std::size_t i = 0; i < fam_b.size(); ++i) fb.col(i).head(fam_b[i].size()) = fam_b[i];

  const double gram_err =
      (fa.adjoint() * fa - fb.adjoint() * fb).cwiseAbs().maxCoeff();
  if (gram_err > cfg.gram_tol)
    throw NumericError("unitary_from_gram_match: Gram matrices differ by " +
                       std::to_string(gram_err) + "; no such unitary exists");
  Mat u = procrustes_unitary(fa, fb);
  const double match_err = (u * fb - fa).cwiseAbs().maxCoeff();
  if (match_err > std::max(cfg.match_tol, 1e3 * gram_err))
    throw NumericError("unitary_from_gram_match: matched unitary misses by " +
                       std::to_string(match_err));
  return u;
}

StripResult strip_layer(const PolyVector& tau, const Config& cfg) {
  if (tau.num_vars() != 1) throw NumericError("strip_layer: univariate only");
  const int dim = tau.ambient_dim();
  if (dim < 2) throw NumericError("strip_layer: ambient dimension must be >= 2");
  const int n = effective_degree(tau, 1e-10);
  if (n < 1) throw NumericError("strip_layer: degree must be >= 1");

  const Vec top = tau.coeff({n});
  const Vec bottom = tau.coeff({0});
  if (std::abs(bottom.dot(top)) > cfg.ortho_tol)
    throw NumericError("strip_layer: endpoint coefficients are not orthogonal; "
                       "tau is not normalized");

  // A sends the z slot (last basis vector) to the leading-coefficient
  // direction; the rest is a deterministic orthonormal completion.
  Mat comp = complete_to_unitary(top / top.norm());
  Mat a(dim, dim);
  a.leftCols(dim - 1) = comp.rightCols(dim - 1);
  a.col(dim - 1) = comp.col(0);

  // tau' = W(z)^H A^H tau: the z-slot component shifts down one degree.
  PolyVector rotated = apply_linear(a.adjoint(), tau);
  PolyVector next(1, dim);
  for (const auto& [k, vec] : rotated.coeffs()) {
    Vec kept = vec;
    Complex moved = vec[dim - 1];
    kept[dim - 1] = 0.0;
    if (k[0] >= n) kept.setZero();  // A^H kills degree-n mass outside the z slot
    if (kept.norm() > 1e-13) next.add_coeff(k, kept);
    if (moved != Complex(0.0)) {
      if (k[0] == 0) {
        if (std::abs(moved) > 10.0 * cfg.ortho_tol)
          throw NumericError("strip_layer: z-slot keeps a constant term of size " +
                             std::to_string(std::abs(moved)));
      } else {
        Vec shifted = Vec::Zero(dim);
        shifted[dim - 1] = moved;
        next.add_coeff({k[0] - 1}, shifted);
      }
    }
  }
  if (effective_degree(next, 1e-10) >= 1) next = renormalize_state(next, 1e-6);
  return {a, next};
}

namespace {

Protocol assemble_protocol(int dim, std::vector<Mat> stripped, const Mat& a0) {
  Protocol p;
  p.dim = dim;
  p.num_vars = 1;
  p.unitaries.push_back(a0);
  for (auto it = stripped.rbegin(); it != stripped.rend(); ++it)
    p.unitaries.push_back(std::move(*it));
  p.layers.assign(stripped.size(), canonical_layer(dim));
  return p;
}

}  // namespace

Protocol synthesize_direct(const PolyVector& tau, const Config& cfg, int dim) {
  if (tau.num_vars() != 1) throw NumericError("synthesize_direct: univariate only");
  const int n0 = tau.is_zero() ? 0 : tau.degree(0);
  const auto norm_rep = sup_norm_check(tau, 4 * n0 + 5, 1.0, 1e-7, true);
  if (!norm_rep.pass)
    throw NumericError("synthesize_direct: tau is not a normalized polynomial state");
  const int amb = std::max({dim, tau.ambient_dim(), 2});
  PolyVector cur = pad_ambient(tau, amb);

  std::vector<Mat> stripped;
  while (effective_degree(cur, 1e-10) >= 1) {
    StripResult s = strip_layer(cur, cfg);
    stripped.push_back(std::move(s.processing));
    cur = std::move(s.next);
  }
  Vec constant = cur.coeff(MultiIndex(1, 0));
  Protocol p = assemble_protocol(amb, std::move(stripped),
                                 complete_to_unitary(constant / constant.norm()));
  const double err = verify_protocol(p, tau);
  if (err > cfg.synth_tol)
    throw NumericError("synthesize_direct: verification failed with grid error " +
                       std::to_string(err));
  return p;
}

Protocol synthesize_from_catalyst(const PolyVector& tau, const Catalyst& v,
                                  const Config& cfg) {
  if (tau.num_vars() != 1)
    throw NumericError("synthesize_from_catalyst: univariate only");
  const int n = tau.is_zero() ? 0 : effective_degree(tau, 1e-10);
  if (static_cast<int>(v.parts.size()) != n)
    throw NumericError("synthesize_from_catalyst: catalyst has " +
                       std::to_string(v.parts.size()) + " parts, expected " +
                       std::to_string(n));
  if (n > 0) {
    CatalystMatrix cm;
    cm.n = n;
    cm.x = catalyst_coefficient_gram(v);
    const auto rep = verify_displacement(cm, tau, 1e-7);
    if (!rep.pass)
      throw NumericError("synthesize_from_catalyst: catalyst fails the displacement "
                         "constraint (residual " + std::to_string(rep.max_residual) +
                         "); invalid catalyst");
  }
  const int amb = std::max(tau.ambient_dim(), 2);
  PolyVector cur = pad_ambient(tau, amb);

  std::vector<Mat> stripped;
  for (int d = n; d >= 1; --d) {
    // The stripped z component must reproduce v^(d-1) up to the catalyst
    // phase e^{i phi} = tau_{+,d} / v_{d-1,d-1}; both conventions make the
    // leading entries real positive, so the phase is checked to be trivial.
    const PolyVector& part = v.parts[d - 1];
    const double lead_tau = cur.coeff({d}).norm();
    const double lead_v = std::abs(part.coeff({d - 1})[0]);
    if (std::abs(lead_tau - lead_v) > 1e-4)
      throw NumericError("synthesize_from_catalyst: leading coefficient mismatch "
                         "at degree " + std::to_string(d) + "; invalid catalyst");
    StripResult s = strip_layer(cur, cfg);
    for (int k = 0; k < d; ++k) {
      const Complex got = s.next.coeff({k})[amb - 1];
      const Complex want = part.coeff({k})[0];
      if (std::abs(got - want) > 1e-4)
        throw NumericError("synthesize_from_catalyst: intermediate state differs "
                           "from catalyst part at degree " + std::to_string(d) +
                           "; invalid catalyst");
    }
    stripped.push_back(std::move(s.processing));
    cur = std::move(s.next);
  }
  Vec constant = cur.coeff(MultiIndex(1, 0));
  Protocol p = assemble_protocol(amb, std::move(stripped),
                                 complete_to_unitary(constant / constant.norm()));
  const double err = verify_protocol(p, tau);
  if (err > cfg.synth_tol)
    throw NumericError("synthesize_from_catalyst: verification failed with grid "
                       "error " + std::to_string(err));
  return p;
}

double verify_protocol(const Protocol& p, const PolyVector& tau, int grid_per_axis) {
  PolyVector actual = protocol_polynomial(p);
  const int amb = std::max(actual.ambient_dim(), tau.ambient_dim());
  PolyVector diff = pad_ambient(actual, amb).plus(pad_ambient(tau, amb).scaled(-1.0));
  int maxdeg = 1;
  for (int d : actual.degrees()) maxdeg = std::max(maxdeg, d);
  for (int d : tau.degrees()) maxdeg = std::max(maxdeg, d);
  if (grid_per_axis == 0) grid_per_axis = 4 * maxdeg + 1;
  grid_per_axis = std::max(grid_per_axis, 2 * maxdeg + 1);
  return sup_norm_check(diff, grid_per_axis, 0.0, 1e300, false).max_norm;
}

}  // namespace qspcat
